#include "hsearch/annotations.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <tuple>

#include <json.hpp>

#include "hsearch/error.hpp"

namespace hsearch {

using nlohmann::json;

CategorySet CategorySet::defaults() {
    return CategorySet({
        {"Hazard", "#e6194b"},
        {"HarmfulConsequence", "#f58231"},
        {"ConstructionActivity", "#3cb44b"},
        {"ProjectAttribute", "#4363d8"},
        {"Equipment", "#911eb4"},
        {"Other", "#808080"},
    });
}

CategorySet::CategorySet(std::vector<EntityCategory> categories) : categories_(std::move(categories)) {
    std::unordered_set<std::string> names;
    for (const EntityCategory& category : categories_) {
        if (category.name.empty() || !names.insert(category.name).second) {
            throw Error(ErrorCode::InvalidArgument, "category names must be unique and non-empty");
        }
    }
}

bool CategorySet::contains(std::string_view name) const {
    return std::any_of(categories_.begin(), categories_.end(),
                       [&](const EntityCategory& category) { return category.name == name; });
}

const std::string& CategorySet::color(std::string_view name) const {
    for (const EntityCategory& category : categories_) {
        if (category.name == name) {
            return category.display_color;
        }
    }
    throw Error(ErrorCode::UnknownCategory, "unknown entity category '" + std::string(name) + "'");
}

void Gazetteer::add(std::string_view phrase, std::string_view category) {
    const std::vector<std::string> words = normalized_words(phrase);
    if (words.empty()) {
        throw Error(ErrorCode::InvalidArgument, "gazetteer phrase '" + std::string(phrase) + "' has no tokens");
    }
    std::string key = join(words, " ");
    const auto [it, inserted] = entries_.emplace(key, std::string(category));
    if (!inserted && it->second != category) {
        throw Error(ErrorCode::GazetteerConflict,
                    "phrase '" + key + "' maps to both " + it->second + " and " + std::string(category));
    }
    max_words_ = std::max(max_words_, words.size());
}

Gazetteer Gazetteer::from_tsv(std::istream& in, const CategorySet& categories) {
    Gazetteer gazetteer;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw Error(ErrorCode::ParseError, "expected phrase<TAB>category", line_no);
        }
        const std::string category = line.substr(tab + 1);
        if (!categories.contains(category)) {
            throw Error(ErrorCode::UnknownCategory, "unknown entity category '" + category + "'", line_no);
        }
        try {
            gazetteer.add(line.substr(0, tab), category);
        } catch (const Error& e) {
            throw Error(e.code(), e.message(), line_no);
        }
    }
    return gazetteer;
}

Gazetteer Gazetteer::load_tsv(const std::filesystem::path& path, const CategorySet& categories) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot read " + path.string());
    }
    return from_tsv(in, categories);
}

void Gazetteer::write_tsv(std::ostream& out) const {
    for (const auto& [key, category] : entries()) {
        out << key << '\t' << category << '\n';
    }
}

const std::string* Gazetteer::lookup(std::string_view key) const {
    const auto it = entries_.find(std::string(key));
    return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::pair<std::string, std::string>> Gazetteer::entries() const {
    std::vector<std::pair<std::string, std::string>> out(entries_.begin(), entries_.end());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<GazetteerMatch> match_gazetteer(std::span<const Token> tokens, const Gazetteer& gazetteer) {
    std::vector<GazetteerMatch> matches;
    std::size_t i = 0;
    while (i < tokens.size()) {
        std::size_t limit = i;
        while (limit < tokens.size() && limit - i < gazetteer.max_words() &&
               tokens[limit].sentence_index == tokens[i].sentence_index) {
            ++limit;
        }
        // Build every prefix key once, then probe from the longest.
        std::vector<std::string> keys;
        std::string key;
        for (std::size_t j = i; j < limit; ++j) {
            if (j > i) key.push_back(' ');
            key += tokens[j].normalized;
            keys.push_back(key);
        }
        bool matched = false;
        for (std::size_t len = keys.size(); len >= 1; --len) {
            if (const std::string* category = gazetteer.lookup(keys[len - 1])) {
                matches.push_back({i, i + len, *category, keys[len - 1]});
                i += len;
                matched = true;
                break;
            }
        }
        if (!matched) {
            ++i;
        }
    }
    return matches;
}

std::vector<EntityMention> tag_document(const Document& doc, const Gazetteer& gazetteer) {
    std::vector<EntityMention> mentions;
    for (const GazetteerMatch& match : match_gazetteer(doc.tokens, gazetteer)) {
        EntityMention mention;
        mention.doc_id = doc.doc_id;
        mention.category = match.category;
        mention.start = doc.tokens[match.first_token].start;
        mention.end = doc.tokens[match.end_token - 1].end;
        mention.surface = doc.body.substr(mention.start, mention.end - mention.start);
        mention.normalized = normalize_phrase(mention.surface);
        mentions.push_back(std::move(mention));
    }
    return mentions;
}

std::vector<EntityMention> tag_with_gazetteer(const Corpus& corpus, const Gazetteer& gazetteer) {
    if (gazetteer.empty()) {
        throw Error(ErrorCode::InvalidArgument, "gazetteer is empty");
    }
    std::vector<EntityMention> mentions;
    for (const Document& doc : corpus.documents()) {
        std::vector<EntityMention> found = tag_document(doc, gazetteer);
        mentions.insert(mentions.end(), std::make_move_iterator(found.begin()), std::make_move_iterator(found.end()));
    }
    std::stable_sort(mentions.begin(), mentions.end(), [](const EntityMention& a, const EntityMention& b) {
        return std::tie(a.doc_id, a.start) < std::tie(b.doc_id, b.start);
    });
    return mentions;
}

std::vector<EntityMention> load_annotations(const Corpus& corpus, std::istream& in, const CategorySet& categories) {
    struct Loaded {
        EntityMention mention;
        std::size_t line;
    };
    std::vector<Loaded> loaded;
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
            throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what(), line_no);
        }
        const bool well_formed = record.is_object() && record.contains("doc_id") && record["doc_id"].is_string() &&
                                 record.contains("category") && record["category"].is_string() &&
                                 record.contains("start") && record["start"].is_number_integer() &&
                                 record.contains("end") && record["end"].is_number_integer();
        if (!well_formed) {
            throw Error(ErrorCode::ParseError, "expected {doc_id, category, start, end}", line_no);
        }
        EntityMention mention;
        mention.doc_id = record["doc_id"].get<std::string>();
        mention.category = record["category"].get<std::string>();
        const auto start = record["start"].get<long long>();
        const auto end = record["end"].get<long long>();

        const Document* doc = corpus.find(mention.doc_id);
        if (doc == nullptr) {
            throw Error(ErrorCode::UnknownDocId, "unknown document id '" + mention.doc_id + "'", line_no);
        }
        if (!categories.contains(mention.category)) {
            throw Error(ErrorCode::UnknownCategory, "unknown entity category '" + mention.category + "'", line_no);
        }
        if (start < 0 || end <= start || static_cast<std::size_t>(end) > doc->body.size()) {
            throw Error(ErrorCode::OffsetOutOfBounds,
                        "span [" + std::to_string(start) + ", " + std::to_string(end) + ") outside document of length " +
                            std::to_string(doc->body.size()),
                        line_no);
        }
        mention.start = static_cast<std::size_t>(start);
        mention.end = static_cast<std::size_t>(end);
        mention.surface = doc->body.substr(mention.start, mention.end - mention.start);
        mention.normalized = normalize_phrase(mention.surface);
        loaded.push_back({std::move(mention), line_no});
    }

    std::stable_sort(loaded.begin(), loaded.end(), [](const Loaded& a, const Loaded& b) {
        return std::tie(a.mention.doc_id, a.mention.start) < std::tie(b.mention.doc_id, b.mention.start);
    });
    for (std::size_t i = 1; i < loaded.size(); ++i) {
        const EntityMention& prev = loaded[i - 1].mention;
        const EntityMention& cur = loaded[i].mention;
        if (prev.doc_id == cur.doc_id && cur.start < prev.end) {
            throw Error(ErrorCode::OverlapConflict,
                        "mention overlaps the mention at line " + std::to_string(loaded[i - 1].line) + " in '" +
                            cur.doc_id + "'",
                        loaded[i].line);
        }
    }

    std::vector<EntityMention> mentions;
    mentions.reserve(loaded.size());
    for (Loaded& entry : loaded) {
        mentions.push_back(std::move(entry.mention));
    }
    return mentions;
}

std::vector<EntityMention> load_annotations(const Corpus& corpus, const std::filesystem::path& path,
                                            const CategorySet& categories) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot read " + path.string());
    }
    return load_annotations(corpus, in, categories);
}

void write_annotations(std::ostream& out, std::span<const EntityMention> mentions) {
    for (const EntityMention& m : mentions) {
        out << json{{"doc_id", m.doc_id}, {"category", m.category}, {"start", m.start}, {"end", m.end}}.dump()
            << '\n';
    }
}

void save_annotations(const std::filesystem::path& path, std::span<const EntityMention> mentions) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
    write_annotations(out, mentions);
}

std::vector<EntityCount> entity_aggregate(std::span<const EntityMention> mentions,
                                          const std::unordered_set<std::string>& doc_ids,
                                          const std::optional<std::string>& category) {
    struct Group {
        std::size_t mentions = 0;
        std::unordered_set<std::string> docs;
    };
    std::map<std::pair<std::string, std::string>, Group> groups;
    for (const EntityMention& m : mentions) {
        if (!doc_ids.contains(m.doc_id) || (category && m.category != *category)) {
            continue;
        }
        Group& group = groups[{m.normalized, m.category}];
        ++group.mentions;
        group.docs.insert(m.doc_id);
    }

    std::vector<EntityCount> out;
    out.reserve(groups.size());
    for (auto& [key, group] : groups) {
        out.push_back({key.first, key.second, group.mentions, group.docs.size()});
    }
    std::sort(out.begin(), out.end(), [](const EntityCount& a, const EntityCount& b) {
        if (a.doc_count != b.doc_count) return a.doc_count > b.doc_count;
        if (a.mention_count != b.mention_count) return a.mention_count > b.mention_count;
        return std::tie(a.normalized, a.category) < std::tie(b.normalized, b.category);
    });
    return out;
}

}  // namespace hsearch
