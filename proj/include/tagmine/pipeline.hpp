#pragma once

// One mining round: ingest -> classify -> mine -> propose -> reports.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "tagmine/classify.hpp"
#include "tagmine/corpus.hpp"
#include "tagmine/demographics.hpp"
#include "tagmine/errors.hpp"
#include "tagmine/geospatial.hpp"
#include "tagmine/itemsets.hpp"
#include "tagmine/lexicon.hpp"
#include "tagmine/network.hpp"
#include "tagmine/temporal.hpp"

namespace tagmine {

inline constexpr std::array<std::string_view, 6> kReportKinds = {"popularity",   "temporal", "demographics",
                                                                 "interests",    "network",  "geo"};
inline constexpr std::array<std::string_view, 5> kStages = {"ingest", "classify", "mine", "propose", "reports"};

inline bool is_report_kind(std::string_view kind) {
    return std::find(kReportKinds.begin(), kReportKinds.end(), kind) != kReportKinds.end();
}

struct SurveyShares {
    std::map<Category, double> shares;

    static SurveyShares from_json(const nlohmann::json& j) {
        SurveyShares s;
        double sum = 0.0;
        for (const auto& [k, v] : j.items()) {
            auto c = parse_category(k);
            if (c == Category::general) throw ConfigError("survey shares cover weed, syrup and pills only");
            double x = v.get<double>();
            if (!(x >= 0.0)) throw ConfigError("survey shares must be nonnegative");
            s.shares[c] = x;
            sum += x;
        }
        if (sum > 1.0 + 1e-9) throw ConfigError("survey shares sum to more than 1");
        return s;
    }
    nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [c, x] : shares) j[std::string(to_string(c))] = x;
        return j;
    }
};

/// Every knob a run reads. Paths are resolved against the directory the
/// config came from (or the caller's base directory).
struct RunConfig {
    ClassificationConfig classification;
    double mine_min_support = 0.05;
    double proposal_min_support = 0.20;
    std::optional<std::size_t> max_itemset_size = 3;
    double peak_prominence = 0.02;
    BaselineProfile baseline = BaselineProfile::uniform();
    std::optional<SurveyShares> survey;
    std::optional<BoundingBox> target_region;
    double cluster_eps_m = 100.0;
    std::size_t cluster_min_points = 10;
    double interest_min_support = 0.05;
    double rule_min_confidence = 0.5;
    std::size_t max_followers = 1000;
    std::size_t top_k = 10;
    double face_sigma = 5.0;
    std::optional<std::string> faces_path;
    std::optional<std::string> geocoder_path;
    std::optional<std::string> follows_path;
    std::optional<std::string> nodes_path;

    void validate() const {
        classification.validate();
        detail::check_min_support(mine_min_support);
        detail::check_min_support(proposal_min_support);
        detail::check_min_support(interest_min_support);
        if (max_itemset_size && *max_itemset_size == 0) throw ConfigError("max_itemset_size must be >= 1");
        if (!(peak_prominence >= 0.0 && peak_prominence < 1.0)) throw ConfigError("peak_prominence must lie in [0,1)");
        if (!(rule_min_confidence > 0.0 && rule_min_confidence <= 1.0))
            throw ConfigError("rule_min_confidence must lie in (0,1]");
        if (!(cluster_eps_m > 0.0)) throw ConfigError("cluster_eps_m must be positive");
        if (cluster_min_points == 0) throw ConfigError("cluster_min_points must be >= 1");
        if (top_k == 0) throw ConfigError("top_k must be >= 1");
        if (!(face_sigma > 0.0)) throw ConfigError("face_sigma must be positive");
        if (target_region) target_region->validate();
    }

    static RunConfig from_json(const nlohmann::json& j) {
        RunConfig c;
        try {
            if (j.contains("classification")) c.classification = ClassificationConfig::from_json(j.at("classification"));
            c.mine_min_support = j.value("mine_min_support", c.mine_min_support);
            c.proposal_min_support = j.value("proposal_min_support", c.proposal_min_support);
            if (j.contains("max_itemset_size")) {
                if (j.at("max_itemset_size").is_null())
                    c.max_itemset_size.reset();
                else
                    c.max_itemset_size = j.at("max_itemset_size").get<std::size_t>();
            }
            c.peak_prominence = j.value("peak_prominence", c.peak_prominence);
            if (j.contains("baseline") && !j.at("baseline").is_string())
                c.baseline = BaselineProfile::from_json(j.at("baseline"));
            if (j.contains("survey_shares") && !j.at("survey_shares").is_null())
                c.survey = SurveyShares::from_json(j.at("survey_shares"));
            if (j.contains("target_region") && !j.at("target_region").is_null())
                c.target_region = BoundingBox::from_json(j.at("target_region"));
            c.cluster_eps_m = j.value("cluster_eps_m", c.cluster_eps_m);
            c.cluster_min_points = j.value("cluster_min_points", c.cluster_min_points);
            c.interest_min_support = j.value("interest_min_support", c.interest_min_support);
            c.rule_min_confidence = j.value("rule_min_confidence", c.rule_min_confidence);
            c.max_followers = j.value("max_followers", c.max_followers);
            c.top_k = j.value("top_k", c.top_k);
            c.face_sigma = j.value("face_sigma", c.face_sigma);
            auto path = [&](const char* key, std::optional<std::string>& out) {
                if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<std::string>();
            };
            path("faces", c.faces_path);
            path("geocoder", c.geocoder_path);
            path("follows", c.follows_path);
            path("nodes", c.nodes_path);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("run config: ") + e.what());
        }
        c.validate();
        return c;
    }

    /// Canonical form; keys sorted, every field present.
    nlohmann::json to_json() const {
        auto opt = [](const std::optional<std::string>& s) { return s ? nlohmann::json(*s) : nlohmann::json(); };
        return {{"classification", classification.to_json()},
                {"mine_min_support", mine_min_support},
                {"proposal_min_support", proposal_min_support},
                {"max_itemset_size", max_itemset_size ? nlohmann::json(*max_itemset_size) : nlohmann::json()},
                {"peak_prominence", peak_prominence},
                {"baseline", baseline.weights},
                {"survey_shares", survey ? survey->to_json() : nlohmann::json()},
                {"target_region", target_region ? target_region->to_json() : nlohmann::json()},
                {"cluster_eps_m", cluster_eps_m},
                {"cluster_min_points", cluster_min_points},
                {"interest_min_support", interest_min_support},
                {"rule_min_confidence", rule_min_confidence},
                {"max_followers", max_followers},
                {"top_k", top_k},
                {"face_sigma", face_sigma},
                {"faces", opt(faces_path)},
                {"geocoder", opt(geocoder_path)},
                {"follows", opt(follows_path)},
                {"nodes", opt(nodes_path)}};
    }
};

inline std::string read_file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Raw bytes of everything a run reads. Reports depend on nothing else.
struct RunInputs {
    std::string corpus;
    std::optional<std::string> faces;
    std::optional<std::string> geocoder;
    std::optional<std::string> follows;
    std::optional<std::string> nodes;

    static RunInputs load(const std::filesystem::path& corpus_path, const RunConfig& config,
                          const std::filesystem::path& base_dir = {}) {
        RunInputs in;
        in.corpus = read_file_bytes(corpus_path);
        auto opt = [&](const std::optional<std::string>& p) -> std::optional<std::string> {
            if (!p) return std::nullopt;
            std::filesystem::path path(*p);
            if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
            return read_file_bytes(path);
        };
        in.faces = opt(config.faces_path);
        in.geocoder = opt(config.geocoder_path);
        in.follows = opt(config.follows_path);
        in.nodes = opt(config.nodes_path);
        return in;
    }
};

/// Fingerprint of what matching sees: the version plus every active term.
inline std::string active_fingerprint(const Lexicon& lexicon) {
    Fnv1a h;
    h.field(std::to_string(lexicon.version()));
    for (const auto& [text, t] : lexicon.terms())
        if (t.active()) h.field(text).field(to_string(t.category));
    return h.hex();
}

/// Content-derived id: equal inputs give equal ids.
inline std::string derive_run_id(const RunInputs& in, const Lexicon& lexicon, const RunConfig& config) {
    Fnv1a h;
    h.field(in.corpus);
    h.field(active_fingerprint(lexicon));
    auto cfg = config.to_json();
    for (const char* k : {"faces", "geocoder", "follows", "nodes"}) cfg.erase(k);  // paths do not matter, bytes do
    h.field(cfg.dump());
    for (const auto* f : {&in.faces, &in.geocoder, &in.follows, &in.nodes}) h.field(f->has_value() ? **f : "\x01none");
    return "run-" + h.hex();
}

struct StageStatus {
    std::string name;
    std::string status = "pending";  // pending | ok | failed | skipped
    nlohmann::json metrics = nlohmann::json::object();
    std::string error;

    nlohmann::json to_json() const {
        nlohmann::json j{{"name", name}, {"status", status}, {"metrics", metrics}};
        if (!error.empty()) j["error"] = error;
        return j;
    }
};

struct Run {
    std::string run_id;
    int lexicon_version_used = 0;
    std::string corpus_ref;
    std::vector<StageStatus> stages;
    std::int64_t started_at_ms = 0;
    std::int64_t finished_at_ms = 0;

    std::string status() const {
        for (const auto& s : stages)
            if (s.status == "failed") return "failed";
        for (const auto& s : stages)
            if (s.status != "ok") return "incomplete";
        return "completed";
    }

    nlohmann::json to_json() const {
        auto st = nlohmann::json::array();
        for (const auto& s : stages) st.push_back(s.to_json());
        return {{"run_id", run_id},
                {"lexicon_version", lexicon_version_used},
                {"corpus_ref", corpus_ref},
                {"status", status()},
                {"stages", st},
                {"started_at_ms", started_at_ms},
                {"finished_at_ms", finished_at_ms}};
    }

    static Run from_json(const nlohmann::json& j) {
        Run r;
        r.run_id = j.at("run_id").get<std::string>();
        r.lexicon_version_used = j.at("lexicon_version").get<int>();
        r.corpus_ref = j.value("corpus_ref", "");
        for (const auto& s : j.at("stages")) {
            StageStatus st;
            st.name = s.at("name").get<std::string>();
            st.status = s.at("status").get<std::string>();
            st.metrics = s.at("metrics");
            st.error = s.value("error", "");
            r.stages.push_back(std::move(st));
        }
        r.started_at_ms = j.value("started_at_ms", std::int64_t{0});
        r.finished_at_ms = j.value("finished_at_ms", std::int64_t{0});
        return r;
    }
};

/// Pending term plus the context a reviewer needs.
struct CandidateCard {
    Term term;
    std::vector<std::pair<std::string, std::uint64_t>> co_occurring;  // active term, joint count
    std::vector<nlohmann::json> samples;
    std::string run_id;

    nlohmann::json to_json() const {
        auto co = nlohmann::json::array();
        for (const auto& [t, n] : co_occurring) co.push_back({{"term", t}, {"joint_count", n}});
        return {{"term", term.text},
                {"support_at_proposal", term.support_at_proposal.value_or(0.0)},
                {"co_occurring", co},
                {"samples", samples},
                {"run_id", run_id}};
    }
};

/// Six report documents, each stamped with run_id and lexicon_version.
struct ReportBundle {
    std::map<std::string, nlohmann::json> reports;

    nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [k, v] : reports) j[k] = v;
        return j;
    }
    std::string bytes() const { return to_json().dump(2) + "\n"; }
};

struct RunResult {
    Run run;
    ReportBundle bundle;
    std::vector<CandidateCard> candidates;
    nlohmann::json geojson = clusters_geojson({});
    std::vector<ClassAttribution> classified;
    std::vector<ItemSet> itemsets;
    std::uint64_t drug_posts = 0;
};

// ---------------------------------------------------------------------------
// Reports

/// Per-class drug-post counts; a post naming two classes counts for both.
/// Survey columns are share * total drug posts.
inline nlohmann::json popularity_report(std::span<const ClassAttribution> classified,
                                        const std::optional<SurveyShares>& survey = std::nullopt) {
    std::uint64_t total = 0;
    std::uint64_t unattributed = 0;
    std::map<Category, std::uint64_t> counts;
    for (auto c : kDrugClasses) counts[c] = 0;
    for (const auto& a : classified) {
        if (!a.drug_positive) continue;
        ++total;
        if (a.unattributed) ++unattributed;
        for (auto c : a.classes.list()) ++counts[c];
    }
    nlohmann::json classes = nlohmann::json::object();
    for (auto c : kDrugClasses) {
        const auto n = counts[c];
        nlohmann::json row{{"count", n}, {"share", total == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(total)}};
        if (survey) {
            double share = survey->shares.contains(c) ? survey->shares.at(c) : 0.0;
            row["survey_share"] = share;
            row["survey_expected"] = std::round(share * static_cast<double>(total) * 1e6) / 1e6;
        }
        classes[std::string(to_string(c))] = row;
    }
    return {{"drug_posts", total}, {"unattributed", unattributed}, {"classes", classes},
            {"survey", survey ? survey->to_json() : nlohmann::json()}};
}

struct GeoValidation {
    std::uint64_t users = 0;
    std::uint64_t geo_users = 0;
    std::uint64_t inside = 0;

    std::optional<double> share() const {
        if (geo_users == 0) return std::nullopt;
        return static_cast<double>(inside) / static_cast<double>(geo_users);
    }
    nlohmann::json to_json() const {
        auto s = share();
        nlohmann::json j{{"users", users}, {"geo_users", geo_users}, {"inside", inside}};
        if (s) j["share_inside"] = *s;
        return j;
    }
};

/// Users with a geotagged drug post; a user is inside when any such post lies
/// in the region.
inline GeoValidation geolocation_validation(std::span<const UserRecord> users, const Corpus& corpus,
                                            std::span<const ClassAttribution> classified, const BoundingBox& region) {
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < corpus.posts().size(); ++i) pos[corpus.posts()[i].media_id] = i;
    GeoValidation v;
    for (const auto& u : users) {
        ++v.users;
        bool any = false;
        bool in = false;
        for (const auto& id : u.posts) {
            auto it = pos.find(id);
            if (it == pos.end() || !classified[it->second].drug_positive) continue;
            const auto& p = corpus.posts()[it->second];
            if (!p.geo) continue;
            any = true;
            if (region.contains(*p.geo)) in = true;
        }
        if (any) ++v.geo_users;
        if (in) ++v.inside;
    }
    return v;
}

inline nlohmann::json temporal_report(std::span<const Post* const> drug_posts, const Lexicon& lexicon,
                                      const RunConfig& config) {
    nlohmann::json out = nlohmann::json::object();
    for (auto mode : {TimeMode::hour, TimeMode::weekday}) {
        nlohmann::json by_class = nlohmann::json::object();
        std::vector<std::optional<Category>> filters{std::nullopt, Category::weed, Category::syrup, Category::pills};
        for (const auto& f : filters) {
            auto h = histogram(drug_posts, mode, f, lexicon, config.classification);
            auto j = h.to_json();
            j["peaks"] = detect_peaks(h, config.peak_prominence);
            if (mode == TimeMode::hour && h.total > 0) j["divergence"] = divergence_from_baseline(h, config.baseline);
            by_class[f ? std::string(to_string(*f)) : "all"] = j;
        }
        out[std::string(to_string(mode))] = by_class;
    }
    return out;
}

/// hour,all,weed,syrup,pills rows from a temporal report.
inline std::string temporal_csv(const nlohmann::json& temporal, std::string_view mode = "hour") {
    std::ostringstream out;
    const auto& m = temporal.at(std::string(mode));
    out << mode << ",all,weed,syrup,pills\n";
    const auto n = m.at("all").at("bins").size();
    for (std::size_t i = 0; i < n; ++i) {
        out << i;
        for (const char* k : {"all", "weed", "syrup", "pills"}) out << ',' << m.at(k).at("bins").at(i).get<std::uint64_t>();
        out << '\n';
    }
    return out.str();
}

namespace detail {

inline std::vector<std::string> user_ids(std::span<const UserRecord> users) {
    std::vector<std::string> ids;
    for (const auto& u : users) ids.push_back(u.user_id);
    return ids;
}

inline std::vector<NodeIndex> present(const DirectedGraph& g, std::span<const std::string> ids) {
    std::vector<NodeIndex> out;
    for (const auto& id : ids)
        if (auto i = g.index_of(id)) out.push_back(*i);
    std::sort(out.begin(), out.end());
    return out;
}

/// Edges touching at least one seed.
inline std::vector<FollowEdge> incident_edges(std::span<const FollowEdge> edges, std::span<const std::string> seeds) {
    std::set<std::string, std::less<>> s(seeds.begin(), seeds.end());
    std::vector<FollowEdge> out;
    for (const auto& e : edges)
        if (s.contains(e.follower) || s.contains(e.followed)) out.push_back(e);
    return out;
}

inline nlohmann::json stats_row(const DirectedGraph& g, std::span<const NodeIndex> subset) {
    if (subset.empty()) return nullptr;
    return group_stats(g, subset).to_json();
}

inline nlohmann::json ranked_json(std::span<const RankedAccount> ranked) {
    auto arr = nlohmann::json::array();
    for (const auto& r : ranked)
        arr.push_back({{"id", r.id}, {"in_degree", r.in_degree}, {"display", render_account(r.id, r.role)}});
    return arr;
}

inline nlohmann::json cohort_network(std::span<const FollowEdge> edges, std::span<const NodeInfo> meta,
                                     std::span<const std::string> seeds, const RunConfig& config) {
    auto local = incident_edges(edges, seeds);
    auto g = build_graph(local, meta);
    auto tri = triangle_count(g);
    auto hub = hub_by_triangles(g, tri);
    return {{"nodes", g.node_count()},
            {"edges", g.edge_count()},
            {"triangles", tri.total},
            {"mutual_triangles", mutual_triangle_count(g)},
            {"hub", hub ? nlohmann::json(*hub) : nlohmann::json()},
            {"top_in_degree", ranked_json(g.node_count() ? top_k_in_degree(g, config.top_k) : std::vector<RankedAccount>{})}};
}

}  // namespace detail

/// Per-cohort graphs (triangles, hubs, top accounts) and per-group degree rows, all
/// degrees measured in the combined follow graph.
inline nlohmann::json network_report(std::span<const FollowEdge> edges, std::span<const NodeInfo> meta,
                                     std::span<const std::string> drug_seeds,
                                     std::span<const std::string> nondrug_seeds, const RunConfig& config) {
    GraphBuildReport build;
    auto g = build_graph(edges, meta, &build);
    auto drug = detail::present(g, drug_seeds);
    auto nondrug = detail::present(g, nondrug_seeds);
    std::vector<NodeIndex> dealers;
    for (auto i : drug)
        if (g.node(i).role == Role::dealer) dealers.push_back(i);
    auto regular_drug = regular_filter(g, drug, config.max_followers);
    auto regular_nondrug = regular_filter(g, nondrug, config.max_followers);
    return {{"graph",
             {{"nodes", g.node_count()},
              {"edges", g.edge_count()},
              {"self_loops_dropped", build.self_loops_dropped},
              {"duplicates_dropped", build.duplicates_dropped}}},
            {"groups",
             {{"drug_users", detail::stats_row(g, drug)},
              {"nondrug_users", detail::stats_row(g, nondrug)},
              {"regular_nondrug", detail::stats_row(g, regular_nondrug)},
              {"regular_drug", detail::stats_row(g, regular_drug)},
              {"dealers", detail::stats_row(g, dealers)}}},
            {"cohorts",
             {{"drug", detail::cohort_network(edges, meta, drug_seeds, config)},
              {"nondrug", detail::cohort_network(edges, meta, nondrug_seeds, config)}}},
            {"max_followers", config.max_followers}};
}

// ---------------------------------------------------------------------------

namespace detail {

inline std::int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

inline std::vector<CandidateCard> candidate_cards(std::span<const Term> proposals, std::span<const ItemSet> itemsets,
                                                  std::span<const Post* const> drug_posts, const Lexicon& lexicon,
                                                  const std::string& run_id) {
    std::vector<CandidateCard> cards;
    for (const auto& t : proposals) {
        CandidateCard c{t, {}, {}, run_id};
        for (const auto& s : itemsets) {
            if (s.items.size() != 2 || !s.contains(t.text)) continue;
            const auto& other = s.items[0] == t.text ? s.items[1] : s.items[0];
            if (const Term* o = lexicon.find(other); o && o->active()) c.co_occurring.emplace_back(other, s.count);
        }
        std::stable_sort(c.co_occurring.begin(), c.co_occurring.end(),
                         [](auto& a, auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; });
        if (c.co_occurring.size() > 5) c.co_occurring.resize(5);
        for (const Post* p : drug_posts) {
            if (c.samples.size() == 3) break;
            if (std::find(p->hashtags.begin(), p->hashtags.end(), t.text) == p->hashtags.end()) continue;
            c.samples.push_back({{"media_id", p->media_id}, {"caption", p->caption}, {"hashtags", p->hashtags}});
        }
        cards.push_back(std::move(c));
    }
    return cards;
}

}  // namespace detail

/// Runs every stage against one lexicon snapshot. A stage failure marks that
/// stage failed and the later ones skipped; earlier outputs stay in the result.
inline RunResult execute_run(const RunInputs& inputs, const Lexicon& lexicon, const RunConfig& config,
                             std::string corpus_ref = {}) {
    config.validate();
    RunResult res;
    Run& run = res.run;
    run.run_id = derive_run_id(inputs, lexicon, config);
    run.lexicon_version_used = lexicon.version();
    run.corpus_ref = std::move(corpus_ref);
    run.started_at_ms = detail::now_ms();
    for (auto s : kStages) {
        StageStatus st;
        st.name = std::string(s);
        run.stages.push_back(std::move(st));
    }

    auto stamp = [&](nlohmann::json body) {
        body["run_id"] = run.run_id;
        body["lexicon_version"] = lexicon.version();
        return body;
    };

    Corpus corpus;
    std::vector<const Post*> drug_posts;
    std::vector<UserRecord> candidates_users;
    std::vector<UserRecord> confirmed;
    std::vector<UserRecord> nondrug;
    std::vector<Term> proposals;

    std::size_t stage = 0;
    try {
        {  // ingest
            std::istringstream in(inputs.corpus);
            auto r = ingest(in);
            corpus = std::move(r.corpus);
            run.stages[stage].metrics = r.report.to_json();
            run.stages[stage++].status = "ok";
        }
        {  // classify
            auto cc = classify_corpus(corpus, lexicon, config.classification);
            res.classified = std::move(cc.posts);
            res.drug_posts = cc.drug_posts;
            for (std::size_t i = 0; i < res.classified.size(); ++i)
                if (res.classified[i].drug_positive) drug_posts.push_back(&corpus.posts()[i]);
            candidates_users = extract_candidate_users(corpus, lexicon, config.classification);
            confirmed = selfie_filter(candidates_users, corpus, lexicon, config.classification);
            nondrug = build_nondrug_cohort(corpus, lexicon, config.classification);
            run.stages[stage].metrics = {{"posts", corpus.size()},
                                         {"drug_posts", cc.drug_posts},
                                         {"unattributed", cc.unattributed},
                                         {"candidate_users", candidates_users.size()},
                                         {"confirmed_users", confirmed.size()},
                                         {"nondrug_users", nondrug.size()}};
            run.stages[stage++].status = "ok";
        }
        {  // mine
            std::vector<Transaction> tx;
            tx.reserve(drug_posts.size());
            for (const Post* p : drug_posts) tx.push_back(make_transaction(p->media_id, p->hashtags));
            res.itemsets = apriori(tx, config.mine_min_support, config.max_itemset_size);
            run.stages[stage].metrics = {{"transactions", tx.size()}, {"itemsets", res.itemsets.size()}};
            run.stages[stage++].status = "ok";
        }
        {  // propose
            proposals = propose_candidates(res.itemsets, config.proposal_min_support, lexicon);
            res.candidates = detail::candidate_cards(proposals, res.itemsets, drug_posts, lexicon, run.run_id);
            run.stages[stage].metrics = {{"candidates", proposals.size()}};
            run.stages[stage++].status = "ok";
        }
        {  // reports
            auto& R = res.bundle.reports;
            R["popularity"] = stamp(popularity_report(res.classified, config.survey));

            auto temporal = temporal_report(drug_posts, lexicon, config);
            if (config.target_region) {
                temporal["geolocation_validation"] =
                    geolocation_validation(confirmed, corpus, res.classified, *config.target_region).to_json();
                temporal["geolocation_validation"]["region"] = config.target_region->to_json();
            }
            R["temporal"] = stamp(temporal);

            nlohmann::json demo{{"available", false}};
            if (inputs.faces) {
                std::istringstream fin(*inputs.faces);
                auto provider = StubFaceProvider::from_jsonl(fin, config.face_sigma);
                std::vector<UserDemographics> users;
                std::uint64_t excluded = 0;
                for (const auto& u : confirmed) {
                    std::vector<Post> selfies;
                    for (const auto& id : u.posts)
                        if (const Post* p = corpus.find(id); p && is_selfie_post(*p, lexicon)) selfies.push_back(*p);
                    if (auto d = aggregate_user(u.user_id, selfies, provider))
                        users.push_back(*d);
                    else
                        ++excluded;
                }
                demo = cohort_report(users, drug_posts, excluded).to_json();
                demo["available"] = true;
                demo["sigma"] = config.face_sigma;
                auto per_user = nlohmann::json::array();
                for (const auto& u : users) per_user.push_back(u.to_json());
                demo["per_user"] = per_user;
            }
            R["demographics"] = stamp(demo);

            std::vector<FollowEdge> follows;
            std::vector<NodeInfo> meta;
            if (inputs.follows) {
                std::istringstream fin(*inputs.follows);
                follows = read_edges_csv(fin);
            }
            if (inputs.nodes) {
                std::istringstream nin(*inputs.nodes);
                meta = read_node_metadata(nin);
            }

            nlohmann::json interests{{"available", false}};
            if (inputs.follows) {
                auto ids = detail::user_ids(confirmed);
                auto tx = followed_accounts_transactions(ids, follows);
                auto sets = apriori(tx, config.interest_min_support);
                auto rs = rules(sets, config.rule_min_confidence);
                auto sj = nlohmann::json::array();
                for (const auto& s : sets) sj.push_back(to_json(s));
                auto rj = nlohmann::json::array();
                for (const auto& r : rs) rj.push_back(to_json(r));
                interests = {{"available", true}, {"users", tx.size()}, {"itemsets", sj}, {"rules", rj}};
            }
            R["interests"] = stamp(interests);

            nlohmann::json net{{"available", false}};
            if (inputs.follows) {
                auto drug_ids = detail::user_ids(confirmed);
                auto nondrug_ids = detail::user_ids(nondrug);
                net = network_report(follows, meta, drug_ids, nondrug_ids, config);
                net["available"] = true;
            }
            R["network"] = stamp(net);

            std::vector<GeoTagged> tagged;
            for (const Post* p : drug_posts)
                if (p->geo) tagged.push_back({p->media_id, *p->geo});
            auto clusters = cluster_hotspots(tagged, config.cluster_eps_m, config.cluster_min_points);
            nlohmann::json geo{{"geotagged_posts", tagged.size()}, {"eps_m", config.cluster_eps_m},
                               {"min_points", config.cluster_min_points}};
            if (inputs.geocoder) {
                std::istringstream gin(*inputs.geocoder);
                auto coder = StubGeocoder::from_jsonl(gin);
                geo["venues"] = categorize_venues(clusters, coder).to_json();
            }
            auto cj = nlohmann::json::array();
            for (const auto& c : clusters) cj.push_back(c.to_json());
            geo["clusters"] = cj;
            geo["cluster_count"] = clusters.size();
            res.geojson = clusters_geojson(clusters);
            R["geo"] = stamp(geo);

            run.stages[stage].metrics = {{"reports", R.size()}, {"clusters", clusters.size()}};
            run.stages[stage++].status = "ok";
        }
    } catch (const std::exception& e) {
        run.stages[stage].status = "failed";
        run.stages[stage].error = e.what();
        for (std::size_t k = stage + 1; k < run.stages.size(); ++k) run.stages[k].status = "skipped";
    }
    run.finished_at_ms = detail::now_ms();
    return res;
}

}  // namespace tagmine
