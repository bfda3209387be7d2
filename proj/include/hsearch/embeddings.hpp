#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hsearch/corpus.hpp"
#include "hsearch/error.hpp"

namespace hsearch {

struct TrainingConfig {
    int dimension = 100;
    int window = 5;
    int negatives = 5;
    int epochs = 5;
    double initial_learning_rate = 0.025;
    double final_learning_rate = 1e-4;
    int min_count = 2;
    std::uint64_t seed = 42;
    // 1 keeps training bitwise reproducible; more threads run lock-free
    // (Hogwild) updates whose result depends on scheduling.
    int threads = 1;

    void validate() const;  // InvalidArgument
};

class EmbeddingModel {
public:
    EmbeddingModel() = default;
    // `vectors` is row-major, words.size() x dimension.
    EmbeddingModel(std::vector<std::string> words, std::vector<float> vectors, std::size_t dimension,
                   TrainingConfig config = {});

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t size() const noexcept { return words_.size(); }
    const std::vector<std::string>& words() const noexcept { return words_; }
    const std::vector<float>& matrix() const noexcept { return vectors_; }
    const TrainingConfig& config() const noexcept { return config_; }

    std::optional<std::size_t> index_of(std::string_view word) const;
    std::span<const float> vector(std::size_t index) const;
    // Empty span when the word is out of vocabulary.
    std::span<const float> find(std::string_view word) const;

    // "|V| D" header, then one "word v1 ... vD" row per word.
    void save(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;
    static EmbeddingModel load(std::istream& in);  // MalformedModelFile
    static EmbeddingModel load(const std::filesystem::path& path);

    friend bool operator==(const EmbeddingModel& a, const EmbeddingModel& b) {
        return a.dimension_ == b.dimension_ && a.words_ == b.words_ && a.vectors_ == b.vectors_;
    }

private:
    std::size_t dimension_ = 0;
    std::vector<std::string> words_;
    std::vector<float> vectors_;
    std::unordered_map<std::string, std::size_t> index_;
    TrainingConfig config_;
};

// Multiword units become single tokens: words joined with '_'.
std::string phrase_unit(std::span<const std::string> words);

// Normalized token sentences with every phrase occurrence merged into its
// unit token (greedy longest match, left to right).
std::vector<std::vector<std::string>> merged_sentences(const Corpus& corpus,
                                                       std::span<const std::vector<std::string>> phrases);

// EmptyVocabulary when no word reaches min_count.
EmbeddingModel train_on_sentences(const std::vector<std::vector<std::string>>& sentences, const TrainingConfig& config);
EmbeddingModel train(const Corpus& corpus, std::span<const std::vector<std::string>> phrases,
                     const TrainingConfig& config);

// 0 when either vector is all zeros; DimensionMismatch for unequal sizes.
double cosine(std::span<const float> a, std::span<const float> b);
double cosine(std::span<const double> a, std::span<const double> b);

// Mean of the in-vocabulary token and phrase-unit vectors; zero vector when
// none is in vocabulary.
std::vector<double> sentence_vector(const EmbeddingModel& model, std::span<const std::string> tokens,
                                    std::span<const std::string> enriched_units);

// Skip-gram negative-sampling objective for one (center, context, negatives)
// triple and the matching plain SGD update.
namespace sgns {

template <typename T>
T sigmoid(T x) {
    return T(1) / (T(1) + std::exp(-x));
}

// -log(sigmoid(x)) without overflow.
template <typename T>
T neg_log_sigmoid(T x) {
    return x > T(0) ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

template <typename T>
T dot(std::span<const T> a, std::span<const T> b) {
    T sum = T(0);
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

template <typename T>
T loss(std::span<const T> center, std::span<const T> context, std::span<const std::span<const T>> negatives) {
    T total = neg_log_sigmoid(dot(context, center));
    for (std::span<const T> negative : negatives) {
        total += neg_log_sigmoid(-dot(negative, center));
    }
    return total;
}

// One gradient step of size `rate` on all involved vectors, every gradient
// evaluated at the pre-update parameters. `scratch` needs center.size()
// elements. Returns the loss before the update. Negatives must be distinct
// from each other and from the context row.
template <typename T>
T step(std::span<T> center, std::span<T> context, std::span<const std::span<T>> negatives, T rate,
       std::span<T> scratch) {
    const std::size_t dim = center.size();
    std::fill(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(dim), T(0));
    T before = T(0);
    const auto update = [&](std::span<T> target, T label) {
        const T f = dot<T>(target, center);
        before += label > T(0) ? neg_log_sigmoid(f) : neg_log_sigmoid(-f);
        const T g = (label - sigmoid(f)) * rate;
        for (std::size_t i = 0; i < dim; ++i) scratch[i] += g * target[i];
        for (std::size_t i = 0; i < dim; ++i) target[i] += g * center[i];
    };
    update(context, T(1));
    for (std::span<T> negative : negatives) {
        update(negative, T(0));
    }
    for (std::size_t i = 0; i < dim; ++i) center[i] += scratch[i];
    return before;
}

}  // namespace sgns

}  // namespace hsearch
