// Exit gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "tagmine/demographics.hpp"
#include "tagmine/geospatial.hpp"
#include "tagmine/itemsets.hpp"
#include "tagmine/network.hpp"
#include "tagmine/pipeline.hpp"
#include "tagmine/service.hpp"
#include "tagmine/synth.hpp"

using namespace tagmine;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---------------------------------------------------------------------------
// C1

using Counts = std::map<std::vector<std::string>, std::uint64_t>;

// Every nonempty submask of every row, tallied. Rows stay small so this is
// exhaustive without walking the whole 2^20 lattice.
Counts submask_oracle(const std::vector<std::vector<int>>& rows, double min_support) {
    std::map<std::uint32_t, std::uint64_t> tally;
    for (const auto& row : rows) {
        std::uint32_t full = 0;
        for (int i : row) full |= 1u << i;
        for (std::uint32_t m = full; m; m = (m - 1) & full) ++tally[m];
    }
    Counts out;
    const double n = static_cast<double>(rows.size());
    for (auto [mask, c] : tally) {
        if (static_cast<double>(c) / n < min_support) continue;
        std::vector<std::string> set;
        for (int b = 0; b < 32; ++b)
            if (mask >> b & 1u) set.push_back(fmt("item%02d", b));
        out[set] = c;
    }
    return out;
}

Outcome c1_apriori_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 gen(20160101);
    std::size_t mismatched = 0, compared = 0;
    for (int inst = 0; inst < 200; ++inst) {
        const int items = 1 + static_cast<int>(gen() % 20);
        const std::size_t n = 1 + gen() % 60;
        std::bernoulli_distribution coin(0.1 + 0.4 * static_cast<double>(gen() % 100) / 100.0);
        const double support = 0.05 * static_cast<double>(1 + inst % 10);
        std::vector<std::vector<int>> rows(n);
        std::vector<Transaction> tx;
        for (std::size_t r = 0; r < n; ++r) {
            std::vector<std::string> names;
            for (int i = 0; i < items; ++i)
                if (coin(gen)) {
                    rows[r].push_back(i);
                    names.push_back(fmt("item%02d", i));
                }
            tx.push_back(make_transaction("t" + std::to_string(r), names));
        }
        Counts got;
        for (const auto& s : apriori(tx, support)) got[s.items] = s.count;
        auto want = submask_oracle(rows, support);
        compared += want.size();
        if (got != want) ++mismatched;
    }
    const double secs = seconds_since(t0);
    return {mismatched == 0 && secs < 60.0,
            fmt("200 instances, %zu itemsets compared, %zu mismatched, %.2fs (limit 60s)", compared, mismatched, secs)};
}

// ---------------------------------------------------------------------------
// C2

Outcome c2_rule_confidence() {
    // Ten users' followed accounts: five follow both sdryno and coylecondenser,
    // three of those also follow oilbrothers and elkthatrun.
    std::vector<std::string> users;
    std::vector<FollowEdge> edges;
    for (int u = 0; u < 10; ++u) {
        const std::string id = "user" + std::to_string(u);
        users.push_back(id);
        auto follow = [&](const char* a) { edges.push_back({id, a}); };
        if (u < 5) {
            follow("sdryno");
            follow("coylecondenser");
        }
        if (u < 3 || u == 8) {
            follow("oilbrothers");
            follow("elkthatrun");
        }
        if (u % 2) follow("saltglass");
    }
    auto tx = followed_accounts_transactions(users, edges);
    auto sets = apriori(tx, 0.1);
    const std::vector<std::string> lhs{"coylecondenser", "sdryno"}, rhs{"elkthatrun", "oilbrothers"};
    const AssociationRule* hit = nullptr;
    auto rs = rules(sets, 0.5);
    for (const auto& r : rs)
        if (r.antecedent == lhs && r.consequent == rhs) hit = &r;
    if (!hit) return {false, "rule not emitted"};

    std::uint64_t a = 0, u = 0;
    std::vector<std::string> all{"coylecondenser", "elkthatrun", "oilbrothers", "sdryno"};
    for (const auto& t : tx) {
        a += std::includes(t.items.begin(), t.items.end(), lhs.begin(), lhs.end());
        u += std::includes(t.items.begin(), t.items.end(), all.begin(), all.end());
    }
    // Every emitted rule re-derived from raw rows.
    std::size_t bad = 0;
    for (const auto& r : rs) {
        auto un = r.antecedent;
        un.insert(un.end(), r.consequent.begin(), r.consequent.end());
        std::sort(un.begin(), un.end());
        std::uint64_t ra = 0, ru = 0;
        for (const auto& t : tx) {
            ra += std::includes(t.items.begin(), t.items.end(), r.antecedent.begin(), r.antecedent.end());
            ru += std::includes(t.items.begin(), t.items.end(), un.begin(), un.end());
        }
        bad += ra != r.antecedent_count || ru != r.union_count;
    }
    const bool ok = hit->confidence() == 0.6 && a == 5 && u == 3 && hit->antecedent_count == a && hit->union_count == u &&
                    bad == 0;
    return {ok, fmt("confidence %s (%llu/%llu, raw %llu/%llu), %zu rules rechecked, %zu disagree",
                    fraction_display(hit->confidence()).c_str(), (unsigned long long)hit->union_count,
                    (unsigned long long)hit->antecedent_count, (unsigned long long)u, (unsigned long long)a, rs.size(),
                    bad)};
}

// ---------------------------------------------------------------------------
// C3

Outcome c3_degree_ratios() {
    struct Row {
        double in, out;
        const char* expected;
    };
    int ok = 0;
    std::string seen;
    for (auto r : {Row{539.88, 799.48, "0.68"}, Row{554.17, 476.10, "1.16"}, Row{467.33, 483.07, "0.97"},
                   Row{495.15, 502.94, "0.98"}, Row{529.36, 463.31, "1.14"}}) {
        auto s = GroupStats::from_averages(r.in, r.out);
        auto shown = GroupStats::format_ratio(*s.in_out_ratio());
        ok += shown == r.expected;
        seen += (seen.empty() ? "" : " ") + shown;
    }
    return {ok == 5, fmt("%d/5 ratios match [%s]", ok, seen.c_str())};
}

// ---------------------------------------------------------------------------
// C4

Outcome c4_triangles() {
    std::mt19937_64 gen(3);
    std::size_t mismatches = 0;
    for (int round = 0; round < 200; ++round) {
        const std::size_t n = 3 + gen() % 48;
        std::bernoulli_distribution coin(0.02 + 0.2 * static_cast<double>(gen() % 100) / 100.0);
        std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
        std::vector<FollowEdge> e;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                if (a != b && coin(gen)) {
                    adj[a][b] = 1;
                    e.push_back({"v" + std::to_string(a), "v" + std::to_string(b)});
                }
        std::uint64_t oracle = 0;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                for (std::size_t c = 0; c < n; ++c)
                    if (a != b && b != c && a != c && adj[a][b] && adj[b][c] && adj[c][a]) ++oracle;
        mismatches += triangle_count(build_graph(e)).total != oracle / 3;
    }
    auto cyclic = triangle_count(build_graph(std::vector<FollowEdge>{{"a", "b"}, {"b", "c"}, {"c", "a"}})).total;
    std::vector<FollowEdge> sym;
    for (const char* a : {"a", "b", "c"})
        for (const char* b : {"a", "b", "c"})
            if (std::string(a) != b) sym.push_back({a, b});
    auto symmetric = triangle_count(build_graph(sym)).total;
    return {mismatches == 0 && cyclic == 1 && symmetric == 2,
            fmt("200 digraphs, %zu mismatches; K3 cyclic %llu, symmetric %llu", mismatches,
                (unsigned long long)cyclic, (unsigned long long)symmetric)};
}

// ---------------------------------------------------------------------------
// C5

std::string corpus_bytes(const SyntheticCorpus& s) {
    std::ostringstream out;
    s.write_corpus(out);
    return out.str();
}

Outcome c5_planted_patterns() {
    const auto t0 = std::chrono::steady_clock::now();
    GeneratorSpec spec;
    spec.drug_users = 100;
    spec.drug_posts_per_user = 100;
    spec.decoy_users = 200;
    spec.hour_weights.fill(1.0);
    spec.hour_weights[16] = 6.0;
    spec.hour_weights[21] = 5.0;
    auto data = generate_synthetic(spec, 505);
    RunInputs in;
    in.corpus = corpus_bytes(data);
    auto res = execute_run(in, shipped_lexicon(), RunConfig{});
    const auto& pop = res.bundle.reports.at("popularity");
    const auto& peaks = res.bundle.reports.at("temporal")["hour"]["all"]["peaks"];
    double worst = 0.0;
    std::string shares;
    for (auto c : kDrugClasses) {
        const double got = pop["classes"][std::string(to_string(c))]["share"].get<double>();
        const double planted = spec.class_weights.at(c);
        worst = std::max(worst, std::abs(got - planted));
        shares += fmt("%s%s %.4f", shares.empty() ? "" : ", ", std::string(to_string(c)).c_str(), got);
    }
    const double secs = seconds_since(t0);
    const bool ok = res.run.status() == "completed" && pop["drug_posts"] == 10000 && worst <= 0.02 &&
                    peaks == nlohmann::json::array({16, 21}) && secs < 120.0;
    return {ok, fmt("drug posts %llu; %s; max share error %.4f (limit 0.02); peaks %s; %.2fs (limit 120s)",
                    (unsigned long long)pop["drug_posts"].get<std::uint64_t>(), shares.c_str(), worst,
                    peaks.dump().c_str(), secs)};
}

// ---------------------------------------------------------------------------
// C6

Outcome c6_feedback_loop() {
    GeneratorSpec spec;
    spec.drug_users = 80;
    spec.decoy_users = 200;
    spec.clean_users = 100;
    spec.slang = SlangSpec{"newslang", "kush", 0.3, 40};
    RunInputs in;
    in.corpus = corpus_bytes(generate_synthetic(spec, 606));
    const RunConfig cfg;

    auto lex = shipped_lexicon();
    auto r1 = execute_run(in, lex, cfg);
    std::vector<Term> pending;
    for (const auto& c : r1.candidates) pending.push_back(c.term);
    lex = add_pending(lex, pending, r1.run.run_id);
    std::vector<CurationDecision> ds;
    for (const auto& t : pending) {
        CurationDecision d;
        d.term_text = t.text;
        d.verdict = Verdict::accept;
        d.category = Category::weed;
        ds.push_back(d);
    }
    lex = apply_decisions(ds, lex);
    auto r2 = execute_run(in, lex, cfg);
    std::vector<Term> second;
    for (const auto& c : r2.candidates) second.push_back(c.term);
    lex = add_pending(lex, second, r2.run.run_id);
    auto r3 = execute_run(in, lex, cfg);

    const bool proposed = r1.candidates.size() == 1 && r1.candidates[0].term.text == "newslang";
    const bool ok = proposed && r2.drug_posts > r1.drug_posts && r3.candidates.empty();
    return {ok, fmt("run 1 proposed %zu (%s), drug posts %llu -> %llu, run 3 proposed %zu", r1.candidates.size(),
                    r1.candidates.empty() ? "none" : r1.candidates[0].term.text.c_str(),
                    (unsigned long long)r1.drug_posts, (unsigned long long)r2.drug_posts, r3.candidates.size())};
}

// ---------------------------------------------------------------------------
// C7

GeoPoint offset_m(GeoPoint c, double north, double east) {
    return {c.lat + north / kMetersPerDegree, c.lon + east / (kMetersPerDegree * std::cos(to_radians(c.lat)))};
}

std::size_t uncovered(const CoveragePlan& plan, const BoundingBox& b, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> lat(b.min_lat, b.max_lat), lon(b.min_lon, b.max_lon);
    std::size_t miss = 0;
    for (int i = 0; i < 10000; ++i) {
        GeoPoint p{lat(gen), lon(gen)};
        bool in = false;
        for (const auto& c : plan.circles)
            if (haversine({c.lat, c.lon}, p) <= c.radius) {
                in = true;
                break;
            }
        miss += !in;
    }
    return miss;
}

Outcome c7_coverage() {
    std::vector<std::pair<BoundingBox, double>> cases;
    const GeoPoint sw{33.740675, -118.260497};
    const auto ne = offset_m(sw, 20000, 20000);
    cases.push_back({{sw.lat, sw.lon, ne.lat, ne.lon}, 5000});
    cases.push_back({{33.70, -118.67, 34.34, -118.15}, 5000});
    cases.push_back({{34.0, -118.0, 34.0, -118.0}, 1000});
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> lat(-70, 70), lon(-179, 170), span(0.001, 0.3), radius(300, 5000);
    for (int i = 0; i < 20; ++i) {
        BoundingBox b{lat(gen), lon(gen), 0, 0};
        b.max_lat = b.min_lat + span(gen);
        b.max_lon = b.min_lon + span(gen);
        cases.push_back({b, radius(gen)});
    }
    std::size_t misses = 0, circles = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        auto plan = plan_cover(cases[i].first, cases[i].second, 1457615968, 1458220768);
        circles += plan.circles.size();
        misses += uncovered(plan, cases[i].first, i);
    }
    bool parsed = false;
    try {
        std::vector<double> tuple{1458220768, 1457615968, 5000, 33.740675, -118.260497};
        auto q = CircleQuery::from_tuple(tuple);
        q.validate();
        parsed = q.min_time == 1457615968 && q.max_time == 1458220768 && q.radius == 5000.0;
    } catch (const Error&) {
    }
    return {misses == 0 && parsed, fmt("%zu plans, %zu circles, %zu of %zu sampled points uncovered; example tuple %s",
                                       cases.size(), circles, misses, cases.size() * 10000,
                                       parsed ? "parses" : "rejected")};
}

// ---------------------------------------------------------------------------
// C8

Outcome c8_demographics() {
    StubFaceProvider provider(5.0);
    std::vector<Post> posts;
    for (int i = 0; i < 32; ++i) {
        Post p;
        p.media_id = "p" + std::to_string(i);
        p.user_id = "u";
        p.media_ref = "img-" + p.media_id;
        FaceObservation f;
        f.rect = {0, 0, 40, 40};
        f.age_estimate = 20 + i % 7;
        f.gender = Gender::female;
        provider.add(*p.media_ref, {f});
        posts.push_back(p);
    }
    auto one = aggregate_user("u", posts, provider);
    const double se = one ? one->age_stderr : -1.0;
    const bool se_ok = std::abs(se - 5.0 / std::sqrt(32.0)) <= 1e-6 && se < 1.0;

    // 406 users, two selfies each; the primary face is the larger one and a
    // smaller opposite-gender bystander appears in some frames.
    std::ostringstream fixture;
    std::map<std::string, std::vector<Post>> by_user;
    for (int u = 0; u < 406; ++u) {
        const bool female = u < 145;
        const char* g = female ? "female" : "male";
        const char* other = female ? "male" : "female";
        for (int k = 0; k < 2; ++k) {
            const std::string ref = fmt("img-%d-%d", u, k);
            nlohmann::json faces = nlohmann::json::array();
            faces.push_back({{"rect", {10, 10, 80, 80}}, {"age", 22 + u % 15}, {"gender", g}});
            if ((u + k) % 3 == 0) faces.push_back({{"rect", {120, 10, 30, 30}}, {"age", 40}, {"gender", other}});
            fixture << nlohmann::json{{"media_ref", ref}, {"faces", faces}}.dump() << '\n';
            Post p;
            p.media_id = ref;
            p.user_id = fmt("user%03d", u);
            p.media_ref = ref;
            by_user[p.user_id].push_back(p);
        }
    }
    std::istringstream in(fixture.str());
    auto stub = StubFaceProvider::from_jsonl(in, 5.0);
    std::vector<UserDemographics> users;
    for (const auto& [id, ps] : by_user)
        if (auto d = aggregate_user(id, ps, stub)) users.push_back(*d);
    auto report = cohort_report(users, {});
    const auto f = report.gender_counts.at(Gender::female), m = report.gender_counts.at(Gender::male);
    return {se_ok && f == 145 && m == 261 && report.users == 406,
            fmt("stderr %.7f (target %.7f); %llu users, female %llu, male %llu", se, 5.0 / std::sqrt(32.0),
                (unsigned long long)report.users, (unsigned long long)f, (unsigned long long)m)};
}

// ---------------------------------------------------------------------------
// C9

std::vector<GeoTagged> planted_points(const std::vector<GeoPoint>& centers, const BoundingBox& noise_box,
                                      int per_hotspot, int noise, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> z(0.0, 50.0);
    std::uniform_real_distribution<double> lat(noise_box.min_lat, noise_box.max_lat),
        lon(noise_box.min_lon, noise_box.max_lon);
    std::vector<GeoTagged> pts;
    for (std::size_t h = 0; h < centers.size(); ++h)
        for (int i = 0; i < per_hotspot; ++i)
            pts.push_back({fmt("h%zu-%d", h, i), offset_m(centers[h], z(gen), z(gen))});
    for (int i = 0; i < noise; ++i) pts.push_back({fmt("n%d", i), {lat(gen), lon(gen)}});
    return pts;
}

Outcome c9_clusters() {
    const BoundingBox box{33.70, -118.67, 34.34, -118.15};
    const std::vector<GeoPoint> centers{{34.0522, -118.2437}, {33.9850, -118.4695}, {34.1016, -118.3267}};
    auto pts = planted_points(centers, box, 200, 1000, 909);
    auto clusters = cluster_hotspots(pts, 100.0, 10);
    double worst = 0.0;
    std::size_t matched = 0;
    for (const auto& c : centers) {
        double best = 1e18;
        for (const auto& k : clusters) best = std::min(best, haversine(c, k.centroid));
        worst = std::max(worst, best);
        matched += best <= 150.0;
    }

    // Ten venues labeled 6 residential / 1 club / 3 restaurant via the stub geocoder.
    std::vector<GeoPoint> venues;
    for (int i = 0; i < 10; ++i) venues.push_back(offset_m({34.0, -118.4}, 0, 2000.0 * i));
    auto vpts = planted_points(venues, box, 60, 0, 910);
    auto vclusters = cluster_hotspots(vpts, 100.0, 10);
    std::ostringstream fixture;
    for (int i = 0; i < 10; ++i) {
        const char* cat = i < 6 ? "residential" : i < 7 ? "club" : "restaurant";
        fixture << nlohmann::json{{"lat", venues[i].lat}, {"lon", venues[i].lon}, {"radius", 300}, {"category", cat}}
                       .dump()
                << '\n';
    }
    std::istringstream in(fixture.str());
    auto coder = StubGeocoder::from_jsonl(in);
    auto vr = categorize_venues(vclusters, coder);
    const double res = vr.share(VenueCategory::residential), club = vr.share(VenueCategory::club),
                 rest = vr.share(VenueCategory::restaurant);
    const bool shares_ok = vr.clusters == 10 && vr.misses == 0 && std::abs(res - 0.6) < 1e-12 &&
                           std::abs(club - 0.1) < 1e-12 && std::abs(rest - 0.3) < 1e-12;
    return {clusters.size() == 3 && matched == 3 && shares_ok,
            fmt("%zu clusters, worst centroid offset %.1f m (limit 150); venues %.2f/%.2f/%.2f over %llu clusters",
                clusters.size(), worst, res, club, rest, (unsigned long long)vr.clusters)};
}

// ---------------------------------------------------------------------------
// C10

Outcome c10_determinism_and_persistence() {
    GeneratorSpec spec;
    spec.drug_users = 60;
    spec.decoy_users = 60;
    spec.clean_users = 60;
    spec.slang = SlangSpec{"newslang", "kush", 0.3, 20};
    spec.geo.geotag_fraction = 0.5;
    spec.geo.hotspots.push_back({{34.05, -118.25}, 50.0, 1.0});
    spec.geo.noise_weight = 0.2;
    spec.network = NetworkSpec{};
    auto bundle_of = [&] {
        auto data = generate_synthetic(spec, 1010);
        RunInputs in;
        in.corpus = corpus_bytes(data);
        std::ostringstream f, e, n;
        data.write_faces(f);
        data.write_follows(e);
        data.write_nodes(n);
        in.faces = f.str();
        in.follows = e.str();
        in.nodes = n.str();
        return execute_run(in, shipped_lexicon(), RunConfig{}).bundle.bytes();
    };
    const bool identical = bundle_of() == bundle_of();

    const auto root = fs::temp_directory_path() / "tagmine-acceptance-store";
    fs::remove_all(root);
    fs::create_directories(root);
    {
        std::ofstream out(root / "corpus.jsonl");
        generate_synthetic(spec, 1010).write_corpus(out);
    }
    nlohmann::json before_lex, before_runs, before_report;
    std::string run_id;
    bool wrote = false;
    {
        PipelineService core(root);
        auto r = core.trigger_run({{"corpus_ref", "corpus.jsonl"}, {"request_id", "run-a"}});
        run_id = r.body.value("run_id", "");
        auto d = core.decide("newslang", {{"verdict", "accept"}, {"category", "weed"}, {"request_id", "dec-a"}});
        auto r2 = core.trigger_run({{"corpus_ref", "corpus.jsonl"}, {"request_id", "run-b"}});
        wrote = r.status == 201 && d.status == 200 && r2.status == 201;
        before_lex = core.list_lexicon(std::nullopt).body;
        before_runs = core.list_runs().body;
        before_report = core.get_report(run_id, "popularity").body;
    }
    PipelineService again(root);
    const bool same_lex = again.list_lexicon(std::nullopt).body == before_lex;
    const bool same_runs = again.list_runs().body == before_runs && before_runs["runs"].size() == 2;
    const bool same_report = again.get_report(run_id, "popularity").body == before_report;
    const bool accepted = again.lexicon()->find("newslang") &&
                          again.lexicon()->find("newslang")->status == TermStatus::accepted;
    fs::remove_all(root);
    const bool ok = identical && wrote && same_lex && same_runs && same_report && accepted;
    return {ok, fmt("bundle bytes %s; after restart lexicon %s, runs %s, reports %s, decision %s",
                    identical ? "identical" : "differ", same_lex ? "kept" : "lost", same_runs ? "kept" : "lost",
                    same_report ? "kept" : "lost", accepted ? "kept" : "lost")};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"C1 apriori matches exhaustive oracle", c1_apriori_oracle},
        {"C2 rule confidence 0.6 from raw counts", c2_rule_confidence},
        {"C3 degree ratios at two decimals", c3_degree_ratios},
        {"C4 directed triangle oracle", c4_triangles},
        {"C5 planted classes and hour peaks", c5_planted_patterns},
        {"C6 feedback loop reaches a fixed point", c6_feedback_loop},
        {"C7 circle cover soundness", c7_coverage},
        {"C8 demographics arithmetic", c8_demographics},
        {"C9 hotspot recovery and venue shares", c9_clusters},
        {"C10 determinism and persistence", c10_determinism_and_persistence},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
