#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsearch/annotations.hpp"
#include "hsearch/corpus.hpp"
#include "hsearch/evaluation.hpp"

namespace hsearch::synth {

struct SynthConfig {
    std::size_t documents = 3000;
    std::uint64_t seed = 7;
    double distractor_fraction = 0.15;
    std::size_t assessors = 4;
    double assessor_noise = 0.03;  // chance an assessor marks a relevant doc as 1 instead of 2

    void validate() const;  // InvalidArgument
};

struct SynthQuery {
    std::string query_id;
    std::string text;
    std::string category;  // category of the targeted entity
};

// A generated incident-report collection with its ground truth. Relevance
// for query q is 2 exactly when a document carries a mention of q's entity.
struct SynthCorpus {
    Corpus corpus;
    std::vector<EntityMention> mentions;
    Gazetteer gazetteer;
    std::vector<SynthQuery> queries;
    std::vector<Judgment> judgments;  // assessor ids a1..aN
    nlohmann::json manifest;
};

// The (category, phrase) inventory planted by the generator.
const std::vector<std::pair<std::string, std::string>>& entity_inventory();

SynthCorpus generate(const SynthConfig& config);

// corpus.jsonl, annotations.jsonl, gazetteer.tsv, queries.tsv,
// qrels.<assessor> per assessor, manifest.json.
void write_synthetic(const SynthCorpus& synth, const std::filesystem::path& dir);

// "qid<TAB>query text" lines.
std::vector<std::pair<std::string, std::string>> load_queries(const std::filesystem::path& path);

}  // namespace hsearch::synth
