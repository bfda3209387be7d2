#include "hsearch/embeddings.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <omp.h>

namespace hsearch {

void TrainingConfig::validate() const {
    if (dimension <= 0 || window <= 0 || negatives <= 0 || epochs <= 0 || min_count <= 0 || threads <= 0 ||
        !(initial_learning_rate > 0.0) || !(final_learning_rate > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "training configuration values must all be positive");
    }
}

EmbeddingModel::EmbeddingModel(std::vector<std::string> words, std::vector<float> vectors, std::size_t dimension,
                               TrainingConfig config)
    : dimension_(dimension), words_(std::move(words)), vectors_(std::move(vectors)), config_(config) {
    if (dimension_ == 0 || vectors_.size() != words_.size() * dimension_) {
        throw Error(ErrorCode::DimensionMismatch, "vector matrix does not match |V| x D");
    }
    index_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) {
        if (!index_.emplace(words_[i], i).second) {
            throw Error(ErrorCode::InvalidArgument, "duplicate vocabulary entry '" + words_[i] + "'");
        }
    }
}

std::optional<std::size_t> EmbeddingModel::index_of(std::string_view word) const {
    const auto it = index_.find(std::string(word));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::span<const float> EmbeddingModel::vector(std::size_t index) const {
    return std::span<const float>(vectors_).subspan(index * dimension_, dimension_);
}

std::span<const float> EmbeddingModel::find(std::string_view word) const {
    const auto index = index_of(word);
    return index ? vector(*index) : std::span<const float>{};
}

void EmbeddingModel::save(std::ostream& out) const {
    out << words_.size() << ' ' << dimension_ << '\n';
    char buffer[32];
    for (std::size_t w = 0; w < words_.size(); ++w) {
        out << words_[w];
        for (float value : vector(w)) {
            // %.9g round-trips every float exactly.
            std::snprintf(buffer, sizeof(buffer), " %.9g", static_cast<double>(value));
            out << buffer;
        }
        out << '\n';
    }
}

void EmbeddingModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
    save(out);
}

EmbeddingModel EmbeddingModel::load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::MalformedModelFile, "missing header line", 1);
    }
    std::istringstream header(line);
    long long rows = -1;
    long long dim = -1;
    std::string extra;
    if (!(header >> rows >> dim) || (header >> extra) || rows < 0 || dim <= 0) {
        throw Error(ErrorCode::MalformedModelFile, "header must be \"|V| D\"", 1);
    }

    std::vector<std::string> words;
    std::vector<float> vectors;
    words.reserve(static_cast<std::size_t>(rows));
    vectors.reserve(static_cast<std::size_t>(rows * dim));
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        if (static_cast<long long>(words.size()) == rows) {
            throw Error(ErrorCode::MalformedModelFile, "more rows than the header declares", line_no);
        }
        std::istringstream row(line);
        std::string word;
        row >> word;
        for (long long d = 0; d < dim; ++d) {
            std::string field;
            if (!(row >> field)) {
                throw Error(ErrorCode::MalformedModelFile, "row has fewer than D components", line_no);
            }
            char* end = nullptr;
            const float value = std::strtof(field.c_str(), &end);
            if (end == field.c_str() || *end != '\0' || !std::isfinite(value)) {
                throw Error(ErrorCode::MalformedModelFile, "invalid component '" + field + "'", line_no);
            }
            vectors.push_back(value);
        }
        if (row >> extra) {
            throw Error(ErrorCode::MalformedModelFile, "row has more than D components", line_no);
        }
        words.push_back(std::move(word));
    }
    if (static_cast<long long>(words.size()) != rows) {
        throw Error(ErrorCode::MalformedModelFile,
                    "header declares " + std::to_string(rows) + " rows, found " + std::to_string(words.size()));
    }
    try {
        return EmbeddingModel(std::move(words), std::move(vectors), static_cast<std::size_t>(dim));
    } catch (const Error& e) {
        throw Error(ErrorCode::MalformedModelFile, e.what());
    }
}

EmbeddingModel EmbeddingModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot read " + path.string());
    }
    return load(in);
}

std::string phrase_unit(std::span<const std::string> words) { return join(words, "_"); }

std::vector<std::vector<std::string>> merged_sentences(const Corpus& corpus,
                                                       std::span<const std::vector<std::string>> phrases) {
    std::unordered_map<std::string, std::string> units;
    std::size_t longest = 0;
    for (const std::vector<std::string>& phrase : phrases) {
        if (phrase.size() < 2) continue;
        units.emplace(join(phrase, " "), phrase_unit(phrase));
        longest = std::max(longest, phrase.size());
    }

    std::vector<std::vector<std::string>> sentences;
    for (const Document& doc : corpus.documents()) {
        std::size_t i = 0;
        while (i < doc.tokens.size()) {
            const std::size_t sentence = doc.tokens[i].sentence_index;
            std::size_t end = i;
            while (end < doc.tokens.size() && doc.tokens[end].sentence_index == sentence) ++end;

            std::vector<std::string> merged;
            std::size_t pos = i;
            while (pos < end) {
                std::size_t matched = 0;
                const std::string* unit = nullptr;
                std::string key = doc.tokens[pos].normalized;
                for (std::size_t len = 2; len <= longest && pos + len <= end; ++len) {
                    key += ' ';
                    key += doc.tokens[pos + len - 1].normalized;
                    if (const auto it = units.find(key); it != units.end()) {
                        matched = len;
                        unit = &it->second;
                    }
                }
                if (matched > 0) {
                    merged.push_back(*unit);
                    pos += matched;
                } else {
                    merged.push_back(doc.tokens[pos].normalized);
                    ++pos;
                }
            }
            sentences.push_back(std::move(merged));
            i = end;
        }
    }
    return sentences;
}

namespace {

// Uniform double in [0, 1) from the top 53 bits.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Vocabulary {
    std::vector<std::string> words;
    std::vector<std::uint64_t> counts;
};

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& sentences, int min_count) {
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& sentence : sentences) {
        for (const std::string& word : sentence) ++counts[word];
    }
    std::vector<std::pair<std::string, std::uint64_t>> kept;
    for (auto& [word, count] : counts) {
        if (count >= static_cast<std::uint64_t>(min_count)) kept.emplace_back(word, count);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    Vocabulary vocab;
    for (auto& [word, count] : kept) {
        vocab.words.push_back(word);
        vocab.counts.push_back(count);
    }
    return vocab;
}

// Negatives are drawn from the unigram distribution raised to 3/4.
class NegativeSampler {
public:
    explicit NegativeSampler(const std::vector<std::uint64_t>& counts) {
        cumulative_.reserve(counts.size());
        double total = 0.0;
        for (std::uint64_t count : counts) {
            total += std::pow(static_cast<double>(count), 0.75);
            cumulative_.push_back(total);
        }
    }

    std::size_t sample(std::mt19937_64& rng) const {
        const double target = unit_uniform(rng) * cumulative_.back();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
        return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
    }

private:
    std::vector<double> cumulative_;
};

}  // namespace

EmbeddingModel train_on_sentences(const std::vector<std::vector<std::string>>& sentences, const TrainingConfig& config) {
    config.validate();
    const Vocabulary vocab = build_vocabulary(sentences, config.min_count);
    if (vocab.words.empty()) {
        throw Error(ErrorCode::EmptyVocabulary, "no token reaches min_count=" + std::to_string(config.min_count));
    }
    std::unordered_map<std::string, std::uint32_t> ids;
    for (std::size_t i = 0; i < vocab.words.size(); ++i) ids.emplace(vocab.words[i], static_cast<std::uint32_t>(i));

    std::vector<std::vector<std::uint32_t>> encoded;
    std::uint64_t total_tokens = 0;
    for (const auto& sentence : sentences) {
        std::vector<std::uint32_t> row;
        for (const std::string& word : sentence) {
            if (const auto it = ids.find(word); it != ids.end()) row.push_back(it->second);
        }
        total_tokens += row.size();
        if (row.size() >= 2) encoded.push_back(std::move(row));
    }

    const auto dim = static_cast<std::size_t>(config.dimension);
    const std::size_t vocab_size = vocab.words.size();
    std::mt19937_64 init_rng(config.seed);
    std::vector<float> input(vocab_size * dim);
    for (float& value : input) {
        value = static_cast<float>((unit_uniform(init_rng) - 0.5) / static_cast<double>(dim));
    }
    std::vector<float> output(vocab_size * dim, 0.0f);
    const NegativeSampler sampler(vocab.counts);

    const double total_steps = static_cast<double>(std::max<std::uint64_t>(1, total_tokens)) * config.epochs;
    std::atomic<std::uint64_t> processed{0};
    const auto learning_rate = [&](std::uint64_t done) {
        const double progress = std::min(1.0, static_cast<double>(done) / total_steps);
        return std::max(config.final_learning_rate,
                        config.initial_learning_rate -
                            (config.initial_learning_rate - config.final_learning_rate) * progress);
    };

    const auto row = [dim](std::vector<float>& matrix, std::size_t index) {
        return std::span<float>(matrix).subspan(index * dim, dim);
    };

    const auto train_sentence = [&](const std::vector<std::uint32_t>& sentence, std::mt19937_64& rng,
                                    std::vector<std::span<float>>& negatives, std::vector<float>& scratch,
                                    std::vector<std::size_t>& drawn) {
        const std::uint64_t done = processed.fetch_add(sentence.size(), std::memory_order_relaxed);
        const auto rate = static_cast<float>(learning_rate(done));
        const auto n = static_cast<std::ptrdiff_t>(sentence.size());
        for (std::ptrdiff_t pos = 0; pos < n; ++pos) {
            const auto reach = static_cast<std::ptrdiff_t>(config.window - static_cast<int>(rng() % config.window));
            for (std::ptrdiff_t c = std::max<std::ptrdiff_t>(0, pos - reach); c <= std::min(n - 1, pos + reach); ++c) {
                if (c == pos) continue;
                const std::uint32_t target = sentence[c];
                negatives.clear();
                drawn.clear();
                for (int k = 0; k < config.negatives; ++k) {
                    const std::size_t sample = sampler.sample(rng);
                    if (sample == target || std::find(drawn.begin(), drawn.end(), sample) != drawn.end()) continue;
                    drawn.push_back(sample);
                    negatives.push_back(row(output, sample));
                }
                sgns::step<float>(row(input, sentence[pos]), row(output, target), negatives, rate, scratch);
            }
        }
    };

    if (config.threads == 1) {
        std::mt19937_64 rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
        std::vector<std::span<float>> negatives;
        std::vector<float> scratch(dim);
        std::vector<std::size_t> drawn;
        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            for (const auto& sentence : encoded) train_sentence(sentence, rng, negatives, scratch, drawn);
        }
    } else {
        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            const auto count = static_cast<std::ptrdiff_t>(encoded.size());
#pragma omp parallel num_threads(config.threads)
            {
                std::mt19937_64 rng(config.seed + 0x9E3779B97F4A7C15ULL * (omp_get_thread_num() + 1) + epoch);
                std::vector<std::span<float>> negatives;
                std::vector<float> scratch(dim);
                std::vector<std::size_t> drawn;
#pragma omp for schedule(dynamic, 64)
                for (std::ptrdiff_t s = 0; s < count; ++s) train_sentence(encoded[s], rng, negatives, scratch, drawn);
            }
        }
    }

    return EmbeddingModel(vocab.words, std::move(input), dim, config);
}

EmbeddingModel train(const Corpus& corpus, std::span<const std::vector<std::string>> phrases,
                     const TrainingConfig& config) {
    return train_on_sentences(merged_sentences(corpus, phrases), config);
}

namespace {

template <typename T>
double cosine_impl(std::span<const T> a, std::span<const T> b) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "cosine of vectors with " + std::to_string(a.size()) + " and " + std::to_string(b.size()) +
                        " components");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a[i];
        const double y = b[i];
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

}  // namespace

double cosine(std::span<const float> a, std::span<const float> b) { return cosine_impl(a, b); }
double cosine(std::span<const double> a, std::span<const double> b) { return cosine_impl(a, b); }

std::vector<double> sentence_vector(const EmbeddingModel& model, std::span<const std::string> tokens,
                                    std::span<const std::string> enriched_units) {
    std::vector<double> mean(model.dimension(), 0.0);
    std::size_t used = 0;
    const auto add = [&](const std::string& word) {
        const std::span<const float> v = model.find(word);
        if (v.empty()) return;
        for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i];
        ++used;
    };
    for (const std::string& token : tokens) add(token);
    for (const std::string& unit : enriched_units) add(unit);
    if (used > 0) {
        for (double& value : mean) value /= static_cast<double>(used);
    }
    return mean;
}

}  // namespace hsearch
