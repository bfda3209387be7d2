#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "hsearch/text.hpp"

namespace hsearch {

inline constexpr std::string_view kCorpusFormat = "hsearch-corpus/1";

struct Document {
    std::string doc_id;
    std::string title;
    std::string body;
    std::vector<SentenceSpan> sentences;
    std::vector<Token> tokens;

    std::string_view sentence_text(std::size_t index) const;
};

// Builds a document, running sentence segmentation and tokenization on `body`.
Document make_document(std::string doc_id, std::string title, std::string body);

// An immutable document collection with O(1) lookup by id.
class Corpus {
public:
    Corpus() = default;
    // Throws DuplicateDocId, EmptyCorpus, or MalformedRecord (empty id).
    Corpus(std::vector<Document> documents, std::map<std::string, std::string> metadata = {});

    const std::vector<Document>& documents() const noexcept { return documents_; }
    const std::map<std::string, std::string>& metadata() const noexcept { return metadata_; }
    std::size_t size() const noexcept { return documents_.size(); }

    const Document* find(std::string_view doc_id) const;
    const Document& at(std::string_view doc_id) const;  // UnknownDocId
    bool contains(std::string_view doc_id) const { return find(doc_id) != nullptr; }

private:
    std::vector<Document> documents_;
    std::map<std::string, std::string> metadata_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

enum class InputFormat { jsonl, plain_dir };

InputFormat parse_input_format(std::string_view name);

Corpus ingest(const std::filesystem::path& path, InputFormat format);

// One {"id", "title"?, "text"} object per line; blank lines are skipped.
Corpus ingest_jsonl(std::istream& in, const std::string& source = "<stream>");

// Every *.txt file directly under `dir`, in filename order; the stem is the doc id.
Corpus ingest_directory(const std::filesystem::path& dir);

nlohmann::json corpus_to_json(const Corpus& corpus);
Corpus corpus_from_json(const nlohmann::json& snapshot);

void save_snapshot(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_snapshot(const std::filesystem::path& path);

}  // namespace hsearch
