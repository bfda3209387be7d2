// Umbrella command line for the search engine: building artifacts, querying
// them, evaluating runs and serving the HTTP API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hsearch/annotations.hpp"
#include "hsearch/clustering.hpp"
#include "hsearch/config.hpp"
#include "hsearch/corpus.hpp"
#include "hsearch/embeddings.hpp"
#include "hsearch/error.hpp"
#include "hsearch/evaluation.hpp"
#include "hsearch/index.hpp"
#include "hsearch/server.hpp"
#include "hsearch/summarizer.hpp"
#include "hsearch/synth.hpp"
#include "hsearch/terms.hpp"

namespace {

using namespace hsearch;
using nlohmann::json;

void print_json(const json& value) {
    std::cout << value.dump(2, ' ', false, json::error_handler_t::replace) << '\n';
}

// "name=path,name=path" into ordered pairs.
std::vector<std::pair<std::string, std::string>> named_paths(const std::string& list, const char* what) {
    std::vector<std::pair<std::string, std::string>> out;
    std::stringstream stream(list);
    for (std::string item; std::getline(stream, item, ',');) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
            throw Error(ErrorCode::InvalidArgument, std::string(what) + " entries must look like name=path");
        }
        out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    if (out.empty()) {
        throw Error(ErrorCode::InvalidArgument, std::string("no ") + what + " given");
    }
    return out;
}

std::vector<std::vector<std::string>> mention_phrases(const std::vector<EntityMention>& mentions) {
    std::set<std::vector<std::string>> unique;
    for (const EntityMention& m : mentions) {
        std::vector<std::string> words = normalized_words(m.surface);
        if (words.size() >= 2) unique.insert(std::move(words));
    }
    return {unique.begin(), unique.end()};
}

std::vector<EntityMention> read_mentions(const Corpus& corpus, const std::string& path) {
    if (path.empty()) return {};
    return load_annotations(corpus, std::filesystem::path(path), CategorySet::defaults());
}

Gazetteer read_gazetteer(const std::string& path) {
    if (path.empty()) return {};
    return Gazetteer::load_tsv(path, CategorySet::defaults());
}

json search_json(const InvertedIndex& index, const Query& query, SearchMode mode) {
    const SearchResult result = index.search(query, mode);
    json hits = json::array();
    for (const SearchHit& hit : result.hits) {
        json entities = json::array();
        for (const auto& [category, surface] : hit.matched_entities) entities.push_back({category, surface});
        hits.push_back({{"doc_id", hit.doc_id},
                        {"score", hit.score},
                        {"snippet", hit.snippet.text},
                        {"matched_entities", std::move(entities)}});
    }
    return {{"total", result.total}, {"hits", std::move(hits)}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semantic faceted search over incident reports"};
    app.require_subcommand(1);
    app.set_version_flag("--version", HSEARCH_VERSION);

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic incident-report collection with ground truth");
    std::string synth_out;
    synth::SynthConfig synth_config;
    synth_cmd->add_option("--out", synth_out, "Output directory")->required();
    synth_cmd->add_option("--docs", synth_config.documents, "Number of documents")->capture_default_str();
    synth_cmd->add_option("--seed", synth_config.seed, "Random seed")->capture_default_str();
    synth_cmd->add_option("--distractors", synth_config.distractor_fraction, "Fraction of distractor notes")
        ->capture_default_str();
    synth_cmd->add_option("--assessors", synth_config.assessors, "Number of simulated assessors")->capture_default_str();

    // ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "Build a corpus snapshot from JSONL or a directory of .txt files");
    std::string ingest_input;
    std::string ingest_format = "jsonl";
    std::string ingest_out;
    ingest_cmd->add_option("--input", ingest_input, "JSONL file or directory")->required();
    ingest_cmd->add_option("--format", ingest_format, "jsonl or dir")->capture_default_str();
    ingest_cmd->add_option("--out", ingest_out, "Snapshot path")->required();

    // annotate
    auto* annotate_cmd = app.add_subcommand("annotate", "Tag entities with a gazetteer or validate standoff annotations");
    std::string annotate_corpus;
    std::string annotate_gazetteer;
    std::string annotate_input;
    std::string annotate_out;
    annotate_cmd->add_option("--corpus", annotate_corpus, "Corpus snapshot")->required();
    auto* gazetteer_opt = annotate_cmd->add_option("--gazetteer", annotate_gazetteer, "Gazetteer TSV to tag with");
    auto* input_opt = annotate_cmd->add_option("--annotations", annotate_input, "Standoff annotations to validate");
    gazetteer_opt->excludes(input_opt);
    annotate_cmd->add_option("--out", annotate_out, "Validated annotation JSONL")->required();

    // train-embeddings
    auto* train_cmd = app.add_subcommand("train-embeddings", "Train skip-gram negative-sampling vectors");
    std::string train_corpus;
    std::string train_annotations;
    std::string train_out;
    TrainingConfig train_config;
    train_cmd->add_option("--corpus", train_corpus, "Corpus snapshot")->required();
    train_cmd->add_option("--annotations", train_annotations, "Mentions whose phrases become single units");
    train_cmd->add_option("--out", train_out, "Model file")->required();
    train_cmd->add_option("--dim", train_config.dimension)->capture_default_str();
    train_cmd->add_option("--window", train_config.window)->capture_default_str();
    train_cmd->add_option("--negatives", train_config.negatives)->capture_default_str();
    train_cmd->add_option("--epochs", train_config.epochs)->capture_default_str();
    train_cmd->add_option("--min-count", train_config.min_count)->capture_default_str();
    train_cmd->add_option("--seed", train_config.seed)->capture_default_str();
    train_cmd->add_option("--threads", train_config.threads, "More than 1 is faster but not reproducible")
        ->capture_default_str();

    // index
    auto* index_cmd = app.add_subcommand("index", "Build the word and entity inverted index");
    std::string index_corpus;
    std::string index_annotations;
    std::string index_gazetteer;
    std::string index_out;
    Bm25Params index_params;
    index_cmd->add_option("--corpus", index_corpus, "Corpus snapshot")->required();
    index_cmd->add_option("--annotations", index_annotations, "Entity annotations JSONL");
    index_cmd->add_option("--gazetteer", index_gazetteer, "Gazetteer used to link query text to entities");
    index_cmd->add_option("--out", index_out, "Index snapshot")->required();
    index_cmd->add_option("--k1", index_params.k1)->capture_default_str();
    index_cmd->add_option("--b", index_params.b)->capture_default_str();
    index_cmd->add_option("--w-word", index_params.w_word)->capture_default_str();
    index_cmd->add_option("--w-entity", index_params.w_entity)->capture_default_str();

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "Serve the JSON API and the static UI");
    std::string serve_config;
    std::string serve_index;
    std::string serve_model;
    std::string serve_static;
    std::string serve_host;
    int serve_port = -1;
    serve_cmd->add_option("--config", serve_config, "Config JSON");
    serve_cmd->add_option("--index", serve_index, "Index snapshot (overrides config)");
    serve_cmd->add_option("--model", serve_model, "Embedding model (overrides config)");
    serve_cmd->add_option("--static-dir", serve_static, "UI bundle directory (overrides config)");
    serve_cmd->add_option("--host", serve_host, "Bind address (overrides config)");
    serve_cmd->add_option("--port", serve_port, "Port, 0 for any free port (overrides config)");

    // search
    auto* search_cmd = app.add_subcommand("search", "Run one query against an index");
    std::string search_index;
    std::string search_mode = "hybrid";
    Query search_query;
    std::string search_category;
    std::string search_surface;
    search_cmd->add_option("--index", search_index, "Index snapshot")->required();
    search_cmd->add_option("--query", search_query.text, "Query text");
    search_cmd->add_option("--mode", search_mode, "word, entity or hybrid")->capture_default_str();
    search_cmd->add_option("--page", search_query.page)->capture_default_str();
    search_cmd->add_option("--page-size", search_query.page_size)->capture_default_str();
    search_cmd->add_option("--entity-category", search_category, "Keep documents with an entity of this category");
    search_cmd->add_option("--entity-surface", search_surface, "Keep documents mentioning this entity");

    // summarize
    auto* summarize_cmd = app.add_subcommand("summarize", "Extractive summary of one document");
    std::string summarize_index;
    std::string summarize_model;
    std::string summarize_doc;
    SummaryConfig summarize_config;
    std::size_t summarize_terms = FacetSettings{}.summary_terms;
    summarize_cmd->add_option("--index", summarize_index, "Index snapshot")->required();
    summarize_cmd->add_option("--model", summarize_model, "Embedding model")->required();
    summarize_cmd->add_option("--doc", summarize_doc, "Document id")->required();
    summarize_cmd->add_option("--size", summarize_config.summary_size)->capture_default_str();
    summarize_cmd->add_option("--lambda", summarize_config.mmr_lambda)->capture_default_str();

    // clusters
    auto* clusters_cmd = app.add_subcommand("clusters", "Descriptive clusters of a query's result set");
    std::string clusters_index;
    std::string clusters_query;
    std::string clusters_mode = "hybrid";
    ClusteringConfig clusters_config;
    clusters_cmd->add_option("--index", clusters_index, "Index snapshot")->required();
    clusters_cmd->add_option("--query", clusters_query, "Query text")->required();
    clusters_cmd->add_option("--mode", clusters_mode)->capture_default_str();
    clusters_cmd->add_option("--max-clusters", clusters_config.max_clusters)->capture_default_str();

    // terms
    auto* terms_cmd = app.add_subcommand("terms", "C-value multiword terms of a corpus or document subset");
    std::string terms_corpus;
    std::vector<std::string> terms_docs;
    std::size_t terms_top = 50;
    terms_cmd->add_option("--corpus", terms_corpus, "Corpus snapshot")->required();
    terms_cmd->add_option("--docs", terms_docs, "Restrict to these document ids")->delimiter(',');
    terms_cmd->add_option("--top", terms_top)->capture_default_str();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Score runs against qrels: nDCG, P@k, kappa, tau");
    std::string eval_runs;
    std::string eval_qrels;
    std::string eval_out;
    std::string eval_tsv;
    EvalConfig eval_config;
    eval_cmd->add_option("--runs", eval_runs, "system=run,system=run")->required();
    eval_cmd->add_option("--qrels", eval_qrels, "assessor=qrels,assessor=qrels")->required();
    eval_cmd->add_option("--out", eval_out, "Report JSON");
    eval_cmd->add_option("--tsv", eval_tsv, "Report TSV");
    eval_cmd->add_option("--cutoff", eval_config.ndcg_cutoff, "nDCG cutoff")->capture_default_str();
    eval_cmd->add_option("--k", eval_config.precision_k, "Precision cutoff")->capture_default_str();

    // export-run
    auto* run_cmd = app.add_subcommand("export-run", "Write a TREC run for a query file");
    std::string run_index;
    std::string run_queries;
    std::string run_mode = "hybrid";
    std::size_t run_depth = 100;
    std::string run_tag;
    std::string run_out;
    run_cmd->add_option("--index", run_index, "Index snapshot")->required();
    run_cmd->add_option("--queries", run_queries, "qid<TAB>text lines")->required();
    run_cmd->add_option("--mode", run_mode)->capture_default_str();
    run_cmd->add_option("--depth", run_depth)->capture_default_str();
    run_cmd->add_option("--tag", run_tag, "Run tag (defaults to the mode)");
    run_cmd->add_option("--out", run_out, "Run file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth_cmd->parsed()) {
            const synth::SynthCorpus generated = synth::generate(synth_config);
            synth::write_synthetic(generated, synth_out);
            std::printf("wrote %zu documents, %zu mentions, %zu queries to %s\n", generated.corpus.size(),
                        generated.mentions.size(), generated.queries.size(), synth_out.c_str());
        } else if (ingest_cmd->parsed()) {
            const Corpus corpus = ingest(ingest_input, parse_input_format(ingest_format));
            save_snapshot(corpus, ingest_out);
            std::printf("ingested %zu documents into %s\n", corpus.size(), ingest_out.c_str());
        } else if (annotate_cmd->parsed()) {
            const Corpus corpus = load_snapshot(annotate_corpus);
            std::vector<EntityMention> mentions;
            if (!annotate_gazetteer.empty()) {
                mentions = tag_with_gazetteer(corpus, read_gazetteer(annotate_gazetteer));
            } else if (!annotate_input.empty()) {
                mentions = read_mentions(corpus, annotate_input);
            } else {
                throw Error(ErrorCode::InvalidArgument, "annotate needs --gazetteer or --annotations");
            }
            save_annotations(annotate_out, mentions);
            std::printf("wrote %zu mentions to %s\n", mentions.size(), annotate_out.c_str());
        } else if (train_cmd->parsed()) {
            const Corpus corpus = load_snapshot(train_corpus);
            const std::vector<std::vector<std::string>> phrases =
                mention_phrases(read_mentions(corpus, train_annotations));
            const EmbeddingModel model = train(corpus, phrases, train_config);
            model.save(std::filesystem::path(train_out));
            std::printf("trained %zu vectors of dimension %zu into %s\n", model.size(), model.dimension(),
                        train_out.c_str());
        } else if (index_cmd->parsed()) {
            Corpus corpus = load_snapshot(index_corpus);
            std::vector<EntityMention> mentions = read_mentions(corpus, index_annotations);
            const InvertedIndex index =
                InvertedIndex::build(std::move(corpus), std::move(mentions), read_gazetteer(index_gazetteer), index_params);
            index.save(index_out);
            std::printf("indexed %zu documents (%zu terms, %zu entities) into %s\n", index.doc_count(),
                        index.word_postings().size(), index.entity_postings().size(), index_out.c_str());
        } else if (serve_cmd->parsed()) {
            AppConfig config = load_config(serve_config.empty() ? std::nullopt
                                                                : std::optional<std::filesystem::path>(serve_config));
            if (!serve_index.empty()) config.artifacts.index = serve_index;
            if (!serve_model.empty()) config.artifacts.model = serve_model;
            if (!serve_static.empty()) config.server.static_dir = serve_static;
            if (!serve_host.empty()) config.server.host = serve_host;
            if (serve_port >= 0) config.server.port = serve_port;
            server::Api api;
            server::HttpServer http(api, config.server);
            const int port = http.bind();
            api.install(server::load_state(config));
            std::printf("listening on http://%s:%d\n", config.server.host.c_str(), port);
            std::fflush(stdout);
            http.listen();
        } else if (search_cmd->parsed()) {
            const InvertedIndex index = InvertedIndex::load(search_index);
            if (!search_category.empty()) search_query.filters.entity_category = search_category;
            if (!search_surface.empty()) search_query.filters.entity_surface = search_surface;
            print_json(search_json(index, search_query, parse_search_mode(search_mode)));
        } else if (summarize_cmd->parsed()) {
            const InvertedIndex index = InvertedIndex::load(summarize_index);
            const EmbeddingModel model = EmbeddingModel::load(std::filesystem::path(summarize_model));
            const auto ordinal = index.ordinal(summarize_doc);
            if (!ordinal) throw Error(ErrorCode::UnknownDoc, "unknown document '" + summarize_doc + "'");
            std::vector<ScoredTerm> terms = cvalue_rank(extract_candidates(index.corpus(), default_stoplist()));
            if (terms.size() > summarize_terms) terms.resize(summarize_terms);
            const Summary summary = summarize(index.document(*ordinal), index.mentions_of(*ordinal), terms, model,
                                              summarize_config);
            print_json({{"doc_id", summarize_doc}, {"sentences", summary.sentences}, {"bypassed", summary.bypassed}});
        } else if (clusters_cmd->parsed()) {
            const InvertedIndex index = InvertedIndex::load(clusters_index);
            Query query{clusters_query, {}, 1, 1};
            const SearchResult result = index.search(query, parse_search_mode(clusters_mode));
            if (result.result_docs.empty()) throw Error(ErrorCode::EmptySubset, "the query matches no documents");
            const auto terms = word_cloud(index.corpus(), result.result_docs, clusters_config.label_terms);
            const auto candidates =
                candidate_labels(index.corpus(), result.result_docs, index.mentions(), terms, clusters_config);
            const ClusterSet set = select_clusters(clusters_query, candidates, result.result_docs, clusters_config);
            json clusters = json::array();
            for (const Cluster& c : set.clusters) {
                clusters.push_back({{"cluster_id", c.cluster_id}, {"label", c.label}, {"size", c.members.size()}});
            }
            print_json({{"clusters", std::move(clusters)},
                        {"residual_id", set.residual_id},
                        {"residual_size", set.residual.size()}});
        } else if (terms_cmd->parsed()) {
            const Corpus corpus = load_snapshot(terms_corpus);
            std::vector<std::string> subset = terms_docs;
            if (subset.empty()) {
                for (const Document& doc : corpus.documents()) subset.push_back(doc.doc_id);
            }
            json terms = json::array();
            for (const ScoredTerm& t : word_cloud(corpus, subset, terms_top)) {
                terms.push_back({{"term", t.phrase()}, {"cvalue", t.cvalue}, {"frequency", t.frequency},
                                 {"doc_frequency", t.doc_frequency}});
            }
            print_json({{"terms", std::move(terms)}});
        } else if (eval_cmd->parsed()) {
            std::vector<NamedRun> runs;
            for (const auto& [name, path] : named_paths(eval_runs, "runs")) runs.emplace_back(name, load_run(path));
            std::vector<NamedQrels> qrels;
            for (const auto& [name, path] : named_paths(eval_qrels, "qrels")) {
                qrels.emplace_back(name, load_qrels(path, name));
            }
            const EvalReport report = evaluate(runs, qrels, eval_config);
            if (!eval_out.empty()) {
                std::ofstream out(eval_out, std::ios::trunc);
                if (!out) throw Error(ErrorCode::IoError, "cannot write " + eval_out);
                out << report.to_json().dump(2) << '\n';
            }
            if (!eval_tsv.empty()) {
                std::ofstream out(eval_tsv, std::ios::trunc);
                if (!out) throw Error(ErrorCode::IoError, "cannot write " + eval_tsv);
                out << report.to_tsv();
            }
            std::cout << report.to_tsv();
        } else if (run_cmd->parsed()) {
            const InvertedIndex index = InvertedIndex::load(run_index);
            std::vector<RunQuery> queries;
            for (const auto& [qid, text] : synth::load_queries(run_queries)) queries.push_back({qid, Query{text}});
            if (queries.empty()) throw Error(ErrorCode::InvalidArgument, "query file is empty");
            const SearchMode mode = parse_search_mode(run_mode);
            std::ofstream out(run_out, std::ios::trunc);
            if (!out) throw Error(ErrorCode::IoError, "cannot write " + run_out);
            index.export_run(queries, mode, run_depth, run_tag.empty() ? std::string(to_string(mode)) : run_tag, out);
            std::printf("wrote run for %zu queries to %s\n", queries.size(), run_out.c_str());
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
