#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hsearch/corpus.hpp"

namespace hsearch {

struct EntityCategory {
    std::string name;
    std::string display_color;  // "#rrggbb"
};

// The closed set of entity categories a deployment recognises.
class CategorySet {
public:
    // Hazard, HarmfulConsequence, ConstructionActivity, ProjectAttribute,
    // Equipment and Other, each with a fixed palette colour.
    static CategorySet defaults();

    explicit CategorySet(std::vector<EntityCategory> categories);

    bool contains(std::string_view name) const;
    const std::string& color(std::string_view name) const;  // UnknownCategory
    const std::vector<EntityCategory>& all() const noexcept { return categories_; }

private:
    std::vector<EntityCategory> categories_;
};

struct EntityMention {
    std::string doc_id;
    std::string category;
    std::size_t start = 0;
    std::size_t end = 0;
    std::string surface;
    std::string normalized;

    friend bool operator==(const EntityMention&, const EntityMention&) = default;
};

// Normalized phrase -> category. Phrases are keyed by their normalized tokens
// joined with single spaces, so "Step-Ladder" and "step-ladder" coincide.
class Gazetteer {
public:
    // InvalidArgument for an empty phrase, GazetteerConflict when the phrase
    // already maps to another category.
    void add(std::string_view phrase, std::string_view category);

    // phrase<TAB>category per line; blank lines and '#' comments skipped.
    static Gazetteer from_tsv(std::istream& in, const CategorySet& categories);
    static Gazetteer load_tsv(const std::filesystem::path& path, const CategorySet& categories);
    void write_tsv(std::ostream& out) const;

    const std::string* lookup(std::string_view key) const;
    std::size_t max_words() const noexcept { return max_words_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    // Sorted by key.
    std::vector<std::pair<std::string, std::string>> entries() const;

private:
    std::unordered_map<std::string, std::string> entries_;
    std::size_t max_words_ = 0;
};

struct GazetteerMatch {
    std::size_t first_token = 0;
    std::size_t end_token = 0;  // exclusive
    std::string category;
    std::string key;
};

// Longest match, left to right, non-overlapping, never crossing a sentence.
std::vector<GazetteerMatch> match_gazetteer(std::span<const Token> tokens, const Gazetteer& gazetteer);

std::vector<EntityMention> tag_document(const Document& doc, const Gazetteer& gazetteer);

// InvalidArgument when the gazetteer is empty.
std::vector<EntityMention> tag_with_gazetteer(const Corpus& corpus, const Gazetteer& gazetteer);

// Reads {"doc_id","category","start","end"} lines and validates each mention
// against the corpus. Results are sorted by (doc_id, start).
std::vector<EntityMention> load_annotations(const Corpus& corpus, std::istream& in, const CategorySet& categories);
std::vector<EntityMention> load_annotations(const Corpus& corpus, const std::filesystem::path& path,
                                            const CategorySet& categories);

void write_annotations(std::ostream& out, std::span<const EntityMention> mentions);
void save_annotations(const std::filesystem::path& path, std::span<const EntityMention> mentions);

struct EntityCount {
    std::string normalized;
    std::string category;
    std::size_t mention_count = 0;
    std::size_t doc_count = 0;

    friend bool operator==(const EntityCount&, const EntityCount&) = default;
};

// Grouped by (normalized, category); doc count desc, mention count desc,
// then normalized text and category ascending.
std::vector<EntityCount> entity_aggregate(std::span<const EntityMention> mentions,
                                          const std::unordered_set<std::string>& doc_ids,
                                          const std::optional<std::string>& category = std::nullopt);

}  // namespace hsearch
