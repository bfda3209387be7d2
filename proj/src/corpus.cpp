#include "hsearch/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "hsearch/error.hpp"
#include "hsearch/kernels.hpp"

namespace hsearch {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view Document::sentence_text(std::size_t index) const {
    const SentenceSpan& span = sentences.at(index);
    return std::string_view(body).substr(span.start, span.end - span.start);
}

Document make_document(std::string doc_id, std::string title, std::string body) {
    Document doc{std::move(doc_id), std::move(title), std::move(body), {}, {}};
    doc.sentences = segment_sentences(doc.body);
    doc.tokens = tokenize(doc.body, doc.sentences);
    return doc;
}

Corpus::Corpus(std::vector<Document> documents, std::map<std::string, std::string> metadata)
    : documents_(std::move(documents)), metadata_(std::move(metadata)) {
    if (documents_.empty()) {
        throw Error(ErrorCode::EmptyCorpus, "corpus contains no documents");
    }
    by_id_.reserve(documents_.size());
    for (std::size_t i = 0; i < documents_.size(); ++i) {
        const std::string& id = documents_[i].doc_id;
        if (id.empty()) {
            throw Error(ErrorCode::MalformedRecord, "document " + std::to_string(i) + " has an empty id");
        }
        if (!by_id_.emplace(id, i).second) {
            throw Error(ErrorCode::DuplicateDocId, "duplicate document id '" + id + "'");
        }
    }
}

const Document* Corpus::find(std::string_view doc_id) const {
    const auto it = by_id_.find(std::string(doc_id));
    return it == by_id_.end() ? nullptr : &documents_[it->second];
}

const Document& Corpus::at(std::string_view doc_id) const {
    const Document* doc = find(doc_id);
    if (doc == nullptr) {
        throw Error(ErrorCode::UnknownDocId, "unknown document id '" + std::string(doc_id) + "'");
    }
    return *doc;
}

InputFormat parse_input_format(std::string_view name) {
    if (name == "jsonl") return InputFormat::jsonl;
    if (name == "dir" || name == "plain_dir") return InputFormat::plain_dir;
    throw Error(ErrorCode::InvalidArgument, "unknown input format '" + std::string(name) + "'");
}

namespace {

struct RawRecord {
    std::string id;
    std::string title;
    std::string text;
    std::size_t line = 0;
};

// Runs the analysis kernel over all records and checks the token invariant.
Corpus build_corpus(std::vector<RawRecord> records, std::map<std::string, std::string> metadata) {
    if (records.empty()) {
        throw Error(ErrorCode::EmptyCorpus, "input contains no records");
    }
    std::vector<std::string_view> texts;
    texts.reserve(records.size());
    for (const RawRecord& record : records) {
        texts.emplace_back(record.text);
    }
    std::vector<kernels::AnalyzedText> analyzed = kernels::analyze(texts);

    std::vector<Document> documents;
    documents.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (analyzed[i].tokens.empty()) {
            throw Error(ErrorCode::MalformedRecord, "record '" + records[i].id + "' has no tokens in \"text\"",
                        records[i].line);
        }
        documents.push_back(Document{std::move(records[i].id), std::move(records[i].title),
                                     std::move(records[i].text), std::move(analyzed[i].sentences),
                                     std::move(analyzed[i].tokens)});
    }
    metadata["documents"] = std::to_string(documents.size());
    metadata["version"] = std::string(kCorpusFormat);
    return Corpus(std::move(documents), std::move(metadata));
}

}  // namespace

Corpus ingest_jsonl(std::istream& in, const std::string& source) {
    std::vector<RawRecord> records;
    std::unordered_map<std::string, std::size_t> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (std::all_of(line.begin(), line.end(), [](char c) { return is_space(c); })) {
            continue;
        }
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::MalformedRecord, std::string("invalid JSON: ") + e.what(), line_no);
        }
        if (!record.is_object()) {
            throw Error(ErrorCode::MalformedRecord, "record is not a JSON object", line_no);
        }
        if (!record.contains("id") || !record["id"].is_string() || record["id"].get<std::string>().empty()) {
            throw Error(ErrorCode::MalformedRecord, "missing or empty string field \"id\"", line_no);
        }
        if (!record.contains("text") || !record["text"].is_string()) {
            throw Error(ErrorCode::MalformedRecord, "missing string field \"text\"", line_no);
        }
        RawRecord raw;
        raw.id = record["id"].get<std::string>();
        raw.text = record["text"].get<std::string>();
        raw.line = line_no;
        if (record.contains("title") && !record["title"].is_null()) {
            if (!record["title"].is_string()) {
                throw Error(ErrorCode::MalformedRecord, "field \"title\" is not a string", line_no);
            }
            raw.title = record["title"].get<std::string>();
        }
        if (const auto [it, inserted] = seen.emplace(raw.id, line_no); !inserted) {
            throw Error(ErrorCode::DuplicateDocId,
                        "document id '" + raw.id + "' first seen at line " + std::to_string(it->second), line_no);
        }
        records.push_back(std::move(raw));
    }
    return build_corpus(std::move(records), {{"source", source}, {"format", "jsonl"}});
}

Corpus ingest_directory(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw Error(ErrorCode::IoError, "not a directory: " + dir.string());
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());

    std::vector<RawRecord> records;
    for (const fs::path& file : files) {
        std::ifstream in(file, std::ios::binary);
        if (!in) {
            throw Error(ErrorCode::IoError, "cannot read " + file.string());
        }
        std::ostringstream buffer;
        buffer << in.rdbuf();
        records.push_back(RawRecord{file.stem().string(), "", buffer.str(), 0});
    }
    return build_corpus(std::move(records), {{"source", dir.string()}, {"format", "dir"}});
}

Corpus ingest(const fs::path& path, InputFormat format) {
    if (!fs::exists(path)) {
        throw Error(ErrorCode::IoError, "input does not exist: " + path.string());
    }
    if (format == InputFormat::plain_dir) {
        return ingest_directory(path);
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot read " + path.string());
    }
    return ingest_jsonl(in, path.string());
}

json corpus_to_json(const Corpus& corpus) {
    json docs = json::array();
    for (const Document& doc : corpus.documents()) {
        docs.push_back({{"id", doc.doc_id}, {"title", doc.title}, {"text", doc.body}});
    }
    return {{"format", kCorpusFormat}, {"metadata", corpus.metadata()}, {"documents", std::move(docs)}};
}

Corpus corpus_from_json(const json& snapshot) {
    if (!snapshot.is_object() || snapshot.value("format", "") != kCorpusFormat) {
        throw Error(ErrorCode::IncompatibleSnapshot,
                    "expected corpus snapshot format '" + std::string(kCorpusFormat) + "'");
    }
    std::vector<RawRecord> records;
    for (const json& doc : snapshot.at("documents")) {
        records.push_back(RawRecord{doc.at("id").get<std::string>(), doc.value("title", ""),
                                    doc.at("text").get<std::string>(), records.size() + 1});
    }
    auto metadata = snapshot.value("metadata", std::map<std::string, std::string>{});
    return build_corpus(std::move(records), std::move(metadata));
}

void save_snapshot(const Corpus& corpus, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
    out << corpus_to_json(corpus).dump() << '\n';
}

Corpus load_snapshot(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot read " + path.string());
    }
    json snapshot;
    try {
        snapshot = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::IncompatibleSnapshot, std::string("corpus snapshot is not valid JSON: ") + e.what());
    }
    return corpus_from_json(snapshot);
}

}  // namespace hsearch
