#include "hsearch/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <unordered_set>

#include "hsearch/error.hpp"
#include "hsearch/text.hpp"

namespace hsearch::synth {

namespace {

using Rng = std::mt19937_64;

struct Phrases {
    std::vector<std::string> equipment = {
        "stanley knife blade", "angle grinder", "step ladder",   "forklift truck",
        "circular saw",        "nail gun",      "scaffold tube", "mobile elevating work platform",
        "concrete mixer",      "pallet truck",
    };
    std::vector<std::string> slip_hazards = {"wet floor", "icy surface", "oil spill"};
    std::vector<std::string> trip_hazards = {"loose cable", "uneven ground"};
    std::vector<std::string> struck_hazards = {"falling debris", "unsecured load", "swinging boom"};
    std::vector<std::string> consequences = {
        "fractured wrist", "back injury",     "deep laceration", "burn injury",
        "sprained ankle",  "head injury",     "crushed finger",
    };
    std::vector<std::string> activities = {
        "manual handling", "scaffold erection", "roof work", "excavation work", "demolition work", "steel fixing",
    };
    std::vector<std::string> attributes = {
        "night shift", "confined space", "live traffic", "public highway", "occupied building",
    };
    std::vector<std::string> other = {"welfare unit", "site canteen", "car park"};
};

const Phrases& phrases() {
    static const Phrases p;
    return p;
}

// Entities targeted by the query suite, in query order.
const std::vector<std::pair<std::string, std::string>>& query_targets() {
    static const std::vector<std::pair<std::string, std::string>> targets = {
        {"Equipment", "stanley knife blade"},
        {"Equipment", "angle grinder"},
        {"Equipment", "step ladder"},
        {"Equipment", "forklift truck"},
        {"Equipment", "circular saw"},
        {"Equipment", "nail gun"},
        {"Equipment", "scaffold tube"},
        {"Equipment", "concrete mixer"},
        {"Hazard", "wet floor"},
        {"Hazard", "oil spill"},
        {"Hazard", "loose cable"},
        {"Hazard", "falling debris"},
        {"HarmfulConsequence", "fractured wrist"},
        {"HarmfulConsequence", "back injury"},
        {"HarmfulConsequence", "deep laceration"},
        {"HarmfulConsequence", "burn injury"},
        {"HarmfulConsequence", "sprained ankle"},
        {"ConstructionActivity", "manual handling"},
        {"ConstructionActivity", "scaffold erection"},
        {"ConstructionActivity", "demolition work"},
    };
    return targets;
}

const std::vector<std::string> kFillers = {
    "The supervisor completed an accident report the same day.",
    "The area was cordoned off pending investigation.",
    "A risk assessment was reviewed after the event.",
    "Work resumed the following day after a toolbox talk.",
    "Witness statements were collected from two colleagues.",
    "The principal contractor was informed by telephone.",
    "The method statement did not cover this situation.",
    "Lighting in the area was reported as adequate.",
    "The operative had received induction training.",
    "Weather conditions were dry and overcast.",
    "Personal protective equipment was being worn.",
    "The site manager arranged additional supervision.",
    "An internal investigation was opened by the safety team.",
    "Housekeeping standards were discussed at the next briefing.",
    "The client was notified of the incident within the hour.",
    "Photographs of the location were taken for the file.",
    "The permit to work had expired the previous week.",
    "A near miss had been logged at the same spot earlier.",
    "The subcontractor provided its own supervision.",
    "Barriers were installed around the location afterwards.",
    "The occupational health adviser followed up by phone.",
    "Rain had fallen overnight before the shift began.",
    "The gang had been on site for three weeks.",
    "A replacement operative was brought in to finish the task.",
    "The welfare arrangements were judged suitable.",
    "Temporary lighting was added along the route.",
    "The design team reviewed the sequence of works.",
    "A safety alert was circulated to all contractors.",
    "Training records were checked by the auditor.",
    "The delivery schedule was changed to reduce congestion.",
    "Signage at the entrance was updated.",
    "The foreman reported the event to the project director.",
    "An ambulance was not required.",
    "Noise levels were high at the time.",
    "The job had been planned at short notice.",
    "Traffic marshals were present on the day.",
};

const std::vector<std::string> kWordTemplates = {
    "A {} was listed in the inventory sheet.",
    "Nobody mentioned the {} during the morning briefing.",
    "The audit checklist includes the keyword {} for this trade.",
    "Records show a {} entry in the stores ledger.",
    "The induction slides refer to {} in passing.",
};

std::size_t pick(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

bool chance(Rng& rng, double p) { return static_cast<double>(rng() >> 11) * 0x1.0p-53 < p; }

template <typename T>
const T& choose(Rng& rng, const std::vector<T>& items) {
    return items[pick(rng, items.size())];
}

template <typename T>
void shuffle(Rng& rng, std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[pick(rng, i)]);
}

std::string fill(std::string_view pattern, std::string_view value) {
    std::string out(pattern);
    const auto at = out.find("{}");
    out.replace(at, 2, value);
    return out;
}

// One planned sentence: literal text with at most one entity slot.
struct Sentence {
    std::string before;
    std::string category;  // empty when there is no entity
    std::string surface;
    std::string after;
};

Sentence plain(std::string text) { return {std::move(text), {}, {}, {}}; }

Sentence with_entity(std::string_view pattern, std::string category, std::string surface) {
    const auto at = pattern.find("{}");
    return {std::string(pattern.substr(0, at)), std::move(category), std::move(surface),
            std::string(pattern.substr(at + 2))};
}

struct Built {
    std::string body;
    std::vector<EntityMention> mentions;
};

Built assemble(const std::string& doc_id, const std::vector<Sentence>& sentences) {
    Built out;
    for (const Sentence& s : sentences) {
        if (!out.body.empty()) out.body.push_back(' ');
        out.body += s.before;
        if (!s.category.empty()) {
            EntityMention m;
            m.doc_id = doc_id;
            m.category = s.category;
            m.start = out.body.size();
            out.body += s.surface;
            m.end = out.body.size();
            m.surface = s.surface;
            m.normalized = normalize_phrase(s.surface);
            out.mentions.push_back(std::move(m));
        }
        out.body += s.after;
    }
    return out;
}

std::string maybe_capitalized(Rng& rng, std::string phrase, double p) {
    if (chance(rng, p) && !phrase.empty()) {
        phrase[0] = static_cast<char>(phrase[0] - 'a' + 'A');
    }
    return phrase;
}

struct ReportPlan {
    std::vector<Sentence> sentences;
    bool slipped = false;
    std::string headline;
};

ReportPlan plan_report(Rng& rng) {
    const Phrases& p = phrases();
    ReportPlan plan;

    const std::string activity = choose(rng, p.activities);
    static const std::vector<std::string> activity_patterns = {
        "The injured person was engaged in {} at the time of the incident.",
        "The team had been assigned to {} that morning.",
        "Before the incident the gang was carrying out {} on level two.",
    };
    plan.sentences.push_back(with_entity(choose(rng, activity_patterns), "ConstructionActivity", activity));

    std::vector<Sentence> middle;
    std::string hazard;
    if (chance(rng, 0.9)) {
        const std::size_t kind = pick(rng, 3);
        if (kind == 0) {
            hazard = choose(rng, p.slip_hazards);
            static const std::vector<std::string> patterns = {
                "The IP slipped on the {} near the stores.",
                "She slipped on the {} while carrying materials.",
                "He slipped on the {} at the bottom of the ramp.",
            };
            middle.push_back(with_entity(choose(rng, patterns), "Hazard", hazard));
            plan.slipped = true;
        } else if (kind == 1) {
            hazard = choose(rng, p.trip_hazards);
            static const std::vector<std::string> patterns = {
                "The IP tripped over the {} in the walkway.",
                "He caught his foot on the {} close to the gate.",
            };
            middle.push_back(with_entity(choose(rng, patterns), "Hazard", hazard));
        } else {
            hazard = choose(rng, p.struck_hazards);
            static const std::vector<std::string> patterns = {
                "The IP was struck by the {} from the level above.",
                "A colleague shouted a warning about the {} too late.",
            };
            middle.push_back(with_entity(choose(rng, patterns), "Hazard", hazard));
        }
    }
    if (chance(rng, 0.85)) {
        static const std::vector<std::string> patterns = {
            "While using the {} the operative lost control.",
            "The {} was being operated without a guard.",
            "The operative reached for the {} and lost balance.",
        };
        middle.push_back(
            with_entity(choose(rng, patterns), "Equipment", maybe_capitalized(rng, choose(rng, p.equipment), 0.15)));
    }
    if (chance(rng, 0.5)) {
        static const std::vector<std::string> patterns = {
            "Site records note a {} constraint for this task.",
            "Planning had flagged the {} as a concern.",
            "The job sheet referred to a {} requirement.",
        };
        middle.push_back(with_entity(choose(rng, patterns), "ProjectAttribute", choose(rng, p.attributes)));
    }
    if (chance(rng, 0.3)) {
        middle.push_back(with_entity("The IP was later taken to the {} to rest.", "Other", choose(rng, p.other)));
    }
    const std::size_t fillers = 2 + pick(rng, 4);
    std::vector<std::string> pool = kFillers;
    shuffle(rng, pool);
    for (std::size_t i = 0; i < fillers; ++i) middle.push_back(plain(pool[i]));
    shuffle(rng, middle);
    plan.sentences.insert(plan.sentences.end(), middle.begin(), middle.end());

    const std::string consequence = choose(rng, p.consequences);
    static const std::vector<std::string> consequence_patterns = {
        "The IP suffered a {} and was taken to hospital.",
        "First aiders treated a {} at the scene.",
        "The injury was recorded as a {} by the nurse.",
    };
    plan.sentences.push_back(with_entity(choose(rng, consequence_patterns), "HarmfulConsequence", consequence));
    if (chance(rng, 0.2)) {
        plan.sentences.push_back(
            with_entity("The {} kept the IP off work for a week.", "HarmfulConsequence", consequence));
    }
    plan.sentences.push_back(plain(pool[fillers % pool.size()]));
    plan.headline = hazard.empty() ? consequence : hazard + " and " + consequence;
    return plan;
}

// Short report holding every word of `target` in separate sentences, so the
// words match but the phrase never does.
std::vector<Sentence> plan_distractor(Rng& rng, const std::string& target) {
    std::vector<Sentence> sentences;
    for (const std::string& word : normalized_words(target)) {
        sentences.push_back(plain(fill(choose(rng, kWordTemplates), word)));
    }
    sentences.push_back(plain(choose(rng, kFillers)));
    shuffle(rng, sentences);
    return sentences;
}

std::string entity_index(const std::string& category, const std::string& phrase) { return category + "\t" + phrase; }

}  // namespace

void SynthConfig::validate() const {
    if (documents < 20) {
        throw Error(ErrorCode::InvalidArgument, "synthetic corpus needs at least 20 documents");
    }
    if (!(distractor_fraction >= 0.0 && distractor_fraction < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "distractor_fraction must lie in [0, 1)");
    }
    if (assessors == 0) {
        throw Error(ErrorCode::InvalidArgument, "at least one assessor is required");
    }
    if (!(assessor_noise >= 0.0 && assessor_noise <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "assessor_noise must lie in [0, 1]");
    }
}

const std::vector<std::pair<std::string, std::string>>& entity_inventory() {
    static const std::vector<std::pair<std::string, std::string>> inventory = [] {
        const Phrases& p = phrases();
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& e : p.equipment) out.emplace_back("Equipment", e);
        for (const auto* list : {&p.slip_hazards, &p.trip_hazards, &p.struck_hazards}) {
            for (const auto& h : *list) out.emplace_back("Hazard", h);
        }
        for (const auto& c : p.consequences) out.emplace_back("HarmfulConsequence", c);
        for (const auto& a : p.activities) out.emplace_back("ConstructionActivity", a);
        for (const auto& a : p.attributes) out.emplace_back("ProjectAttribute", a);
        for (const auto& o : p.other) out.emplace_back("Other", o);
        return out;
    }();
    return inventory;
}

SynthCorpus generate(const SynthConfig& config) {
    config.validate();
    Rng rng(config.seed);
    const auto& targets = query_targets();

    std::vector<Document> documents;
    std::vector<EntityMention> mentions;
    std::vector<std::string> slipped;
    std::map<std::string, std::vector<std::string>> distractors;  // by query id
    std::size_t next_distractor = 0;

    char id_buffer[32];
    char qid_buffer[32];
    for (std::size_t i = 0; i < config.documents; ++i) {
        std::snprintf(id_buffer, sizeof(id_buffer), "RR-%05zu", i + 1);
        const std::string doc_id = id_buffer;
        if (chance(rng, config.distractor_fraction)) {
            const std::size_t q = next_distractor++ % targets.size();
            std::snprintf(qid_buffer, sizeof(qid_buffer), "Q%02zu", q + 1);
            const Built built = assemble(doc_id, plan_distractor(rng, targets[q].second));
            documents.push_back(make_document(doc_id, "Observation note " + doc_id, built.body));
            distractors[qid_buffer].push_back(doc_id);
            continue;
        }
        const ReportPlan plan = plan_report(rng);
        Built built = assemble(doc_id, plan.sentences);
        documents.push_back(make_document(doc_id, "Incident: " + plan.headline, built.body));
        if (plan.slipped) slipped.push_back(doc_id);
        for (EntityMention& m : built.mentions) mentions.push_back(std::move(m));
    }

    SynthCorpus out;
    out.corpus = Corpus(std::move(documents), {{"source", "synthetic"}, {"seed", std::to_string(config.seed)}});
    for (const auto& [category, phrase] : entity_inventory()) out.gazetteer.add(phrase, category);

    std::map<std::string, std::set<std::string>> entity_docs;
    std::map<std::string, std::size_t> entity_mentions;
    std::map<std::string, std::size_t> category_counts;
    for (const EntityMention& m : mentions) {
        const std::string key = entity_index(m.category, join(normalized_words(m.surface), " "));
        entity_docs[key].insert(m.doc_id);
        ++entity_mentions[key];
        ++category_counts[m.category];
    }

    for (std::size_t q = 0; q < targets.size(); ++q) {
        std::snprintf(qid_buffer, sizeof(qid_buffer), "Q%02zu", q + 1);
        out.queries.push_back({qid_buffer, targets[q].second, targets[q].first});
    }

    // Pool: every document sharing a word with the query.
    for (const SynthQuery& query : out.queries) {
        const std::vector<std::string> words = normalized_words(query.text);
        const std::unordered_set<std::string> word_set(words.begin(), words.end());
        const std::set<std::string>& relevant = entity_docs[entity_index(query.category, query.text)];
        for (const Document& doc : out.corpus.documents()) {
            const bool pooled = std::any_of(doc.tokens.begin(), doc.tokens.end(),
                                            [&](const Token& t) { return word_set.contains(t.normalized); });
            if (!pooled) continue;
            const bool is_relevant = relevant.contains(doc.doc_id);
            for (std::size_t a = 0; a < config.assessors; ++a) {
                int rel = is_relevant ? 2 : 0;
                if (is_relevant && chance(rng, config.assessor_noise)) rel = 1;
                out.judgments.push_back({query.query_id, doc.doc_id, rel, "a" + std::to_string(a + 1)});
            }
        }
    }
    std::stable_sort(out.judgments.begin(), out.judgments.end(), [](const Judgment& x, const Judgment& y) {
        return std::tie(x.assessor_id, x.query_id, x.doc_id) < std::tie(y.assessor_id, y.query_id, y.doc_id);
    });

    std::sort(mentions.begin(), mentions.end(), [](const EntityMention& x, const EntityMention& y) {
        return std::tie(x.doc_id, x.start) < std::tie(y.doc_id, y.start);
    });
    out.mentions = std::move(mentions);

    nlohmann::json entities = nlohmann::json::array();
    for (const auto& [category, phrase] : entity_inventory()) {
        const std::string key = entity_index(category, phrase);
        const auto docs = entity_docs.find(key);
        entities.push_back({{"category", category},
                            {"phrase", phrase},
                            {"docs", docs == entity_docs.end() ? std::vector<std::string>{}
                                                               : std::vector<std::string>(docs->second.begin(),
                                                                                          docs->second.end())},
                            {"mentions", entity_mentions[key]}});
    }
    nlohmann::json queries = nlohmann::json::array();
    for (const SynthQuery& query : out.queries) {
        queries.push_back({{"query_id", query.query_id},
                           {"text", query.text},
                           {"category", query.category},
                           {"relevant", entity_docs[entity_index(query.category, query.text)].size()},
                           {"distractors", distractors[query.query_id]}});
    }
    nlohmann::json collocations = nlohmann::json::array();
    for (const auto& [category, phrase] : entity_inventory()) {
        const std::vector<std::string> words = normalized_words(phrase);
        if (category == "Equipment" && words.size() >= 2) collocations.push_back({words[0], words[1]});
    }
    out.manifest = {
        {"seed", config.seed},
        {"documents", config.documents},
        {"distractor_fraction", config.distractor_fraction},
        {"assessors", config.assessors},
        {"slipped", {{"docs", slipped}, {"phrases", phrases().slip_hazards}}},
        {"entities", std::move(entities)},
        {"category_counts", category_counts},
        {"collocations", std::move(collocations)},
        {"queries", std::move(queries)},
    };
    return out;
}

void write_synthetic(const SynthCorpus& synth, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto open = [&](const std::string& name) {
        std::ofstream out(dir / name, std::ios::trunc);
        if (!out) {
            throw Error(ErrorCode::IoError, "cannot write " + (dir / name).string());
        }
        return out;
    };
    {
        std::ofstream out = open("corpus.jsonl");
        for (const Document& doc : synth.corpus.documents()) {
            out << nlohmann::json{{"id", doc.doc_id}, {"title", doc.title}, {"text", doc.body}}.dump() << '\n';
        }
    }
    {
        std::ofstream out = open("annotations.jsonl");
        write_annotations(out, synth.mentions);
    }
    {
        std::ofstream out = open("gazetteer.tsv");
        synth.gazetteer.write_tsv(out);
    }
    {
        std::ofstream out = open("queries.tsv");
        for (const SynthQuery& q : synth.queries) out << q.query_id << '\t' << q.text << '\n';
    }
    std::map<std::string, std::vector<Judgment>> by_assessor;
    for (const Judgment& j : synth.judgments) by_assessor[j.assessor_id].push_back(j);
    for (const auto& [assessor, judgments] : by_assessor) {
        std::ofstream out = open("qrels." + assessor);
        write_qrels(judgments, out);
    }
    {
        std::ofstream out = open("manifest.json");
        out << synth.manifest.dump(2) << '\n';
    }
}

std::vector<std::pair<std::string, std::string>> load_queries(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot read " + path.string());
    }
    std::vector<std::pair<std::string, std::string>> queries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
            throw Error(ErrorCode::ParseError, "query line needs 'qid<TAB>text'", line_no);
        }
        queries.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    return queries;
}

}  // namespace hsearch::synth
