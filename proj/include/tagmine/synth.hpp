#pragma once

// Deterministic synthetic corpus generator with hidden ground truth.
//
// Randomness comes from std::mt19937_64, whose output sequence is fixed by the
// standard; all derived draws (uniform, normal, categorical) are computed here
// rather than through <random> distributions, so a seed reproduces the same
// bytes on every platform.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tagmine/classify.hpp"
#include "tagmine/corpus.hpp"
#include "tagmine/demographics.hpp"
#include "tagmine/errors.hpp"
#include "tagmine/geospatial.hpp"
#include "tagmine/lexicon.hpp"
#include "tagmine/network.hpp"
#include "tagmine/temporal.hpp"

namespace tagmine {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }
    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [lo, hi].
    std::int64_t integer(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
        std::uint64_t v;
        do v = engine_();
        while (v >= limit);
        return lo + static_cast<std::int64_t>(v % span);
    }
    bool chance(double p) { return uniform() < p; }
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * uniform());
    }
    /// Index drawn with probability proportional to weights.
    std::size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double x = uniform() * total;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (x < weights[i]) return i;
            x -= weights[i];
        }
        for (std::size_t i = weights.size(); i-- > 0;)
            if (weights[i] > 0) return i;
        return 0;
    }
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[static_cast<std::size_t>(integer(0, static_cast<std::int64_t>(i) - 1))]);
    }

private:
    std::mt19937_64 engine_;
};

/// Largest-remainder apportionment of n items by weights (ties to lower index).
inline std::vector<std::size_t> apportion(std::size_t n, std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    std::vector<std::size_t> counts(weights.size(), 0);
    if (weights.empty() || total <= 0.0) return counts;
    std::vector<std::pair<double, std::size_t>> rema;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        double exact = static_cast<double>(n) * weights[i] / total;
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        assigned += counts[i];
        rema.emplace_back(exact - std::floor(exact), i);
    }
    std::stable_sort(rema.begin(), rema.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[rema[k % rema.size()].second];
    return counts;
}

struct IntRange {
    int min = 0;
    int max = 0;
};

struct Hotspot {
    GeoPoint center;
    double sigma_m = 50.0;
    double weight = 1.0;
};

struct GeoSpec {
    double geotag_fraction = 0.0;
    BoundingBox region{33.70, -118.67, 34.34, -118.15};
    std::vector<Hotspot> hotspots;
    double noise_weight = 0.0;
    double outside_user_fraction = 0.0;
    BoundingBox outside_region{51.28, -0.51, 51.69, 0.33};
};

struct SlangSpec {
    std::string tag;
    std::string partner;
    double drug_post_rate = 0.25;
    int near_miss_posts = 0;
};

struct DemographicSpec {
    double female_fraction = 0.36;
    std::map<AgeBracket, double> bracket_weights{{AgeBracket::from15to20, 0.2},
                                                 {AgeBracket::from20to30, 0.4},
                                                 {AgeBracket::from30to40, 0.4}};
    double face_noise_sigma = 1.0;
    double extra_face_fraction = 0.02;
    double no_face_fraction = 0.0;
};

struct PlantedPage {
    std::string id;
    double follow_rate = 0.0;
};

struct NetworkSpec {
    std::vector<PlantedPage> drug_pages;
    std::vector<PlantedPage> nondrug_pages;
    double drug_peer_prob = 0.02;
    double nondrug_peer_prob = 0.005;
    int dealers = 0;
    int popular_users = 0;
    int popular_followers = 1200;
};

struct GeneratorSpec {
    int drug_users = 50;
    int drug_posts_per_user = 20;
    int decoy_users = 0;
    int decoy_posts_per_user = 3;
    double decoy_single_term_fraction = 0.2;
    int clean_users = 0;
    int clean_posts_per_user = 3;
    int tainted_probe_users = 0;
    std::string probe_tag = "instapic";
    int min_drug_tags = 2;

    std::map<Category, double> class_weights{{Category::weed, 0.72 / 0.99},
                                             {Category::pills, 0.14 / 0.99},
                                             {Category::syrup, 0.13 / 0.99}};
    std::array<double, 24> hour_weights = uniform_hours();
    std::map<Category, std::array<double, 24>> hour_weights_by_class;
    std::array<double, 7> weekday_weights{1, 1, 1, 1, 1, 1, 1};
    std::int64_t start_time = 1420070400;  // 2015-01-01 00:00 GMT
    int weeks = 52;

    IntRange drug_terms_per_post{2, 3};
    IntRange decoy_tags_per_post{0, 2};
    std::vector<std::string> decoy_vocabulary = default_decoys();

    double selfie_user_fraction = 0.5;
    IntRange selfie_posts_per_user{2, 4};
    bool single_selfie_near_miss = true;

    GeoSpec geo;
    int duplicates = 0;
    std::optional<SlangSpec> slang;
    DemographicSpec demographics;
    std::optional<NetworkSpec> network;

    static std::array<double, 24> uniform_hours() {
        std::array<double, 24> h;
        h.fill(1.0);
        return h;
    }

    static std::vector<std::string> default_decoys() {
        return {"sunset",  "love",     "instagood", "photooftheday", "friends", "happy",   "beach",   "music",
                "food",    "travel",   "fitness",   "nature",        "style",   "tbt",     "art",     "family",
                "summer",  "follow",   "cute",      "beautiful",     "party",   "fun",     "goodtime", "night",
                "city",    "sky",      "coffee",    "weekend",       "mood",    "vibes",   "dog",     "cat",
                "gym",     "sneakers", "throwback", "goals",         "chill",   "roadtrip", "concert", "sports"};
    }

    const std::array<double, 24>& hours_for(Category c) const {
        auto it = hour_weights_by_class.find(c);
        return it == hour_weights_by_class.end() ? hour_weights : it->second;
    }

    void validate(const Lexicon& lexicon) const {
        auto fail = [](const std::string& m) { throw ConfigError("generator spec: " + m); };
        if (drug_users < 0 || decoy_users < 0 || clean_users < 0 || tainted_probe_users < 0)
            fail("user counts must be nonnegative");
        if (drug_posts_per_user < 1 && drug_users > 0) fail("drug_posts_per_user must be >= 1");
        double sum = 0.0;
        for (auto c : kDrugClasses) {
            double w = class_weights.contains(c) ? class_weights.at(c) : 0.0;
            if (w < 0.0) fail("class weights must be nonnegative");
            sum += w;
        }
        if (class_weights.contains(Category::general)) fail("class weights cover weed, syrup and pills only");
        if (std::abs(sum - 1.0) > 1e-9) fail("class weights must sum to 1");
        auto check_hist = [&](std::span<const double> h, const char* what) {
            double s = 0.0;
            for (double w : h) {
                if (w < 0.0) fail(std::string(what) + " weights must be nonnegative");
                s += w;
            }
            if (s <= 0.0) fail(std::string(what) + " weights must not all be zero");
        };
        check_hist(hour_weights, "hour");
        for (const auto& [c, h] : hour_weights_by_class) check_hist(h, "class hour");
        check_hist(weekday_weights, "weekday");
        if (weeks < 1) fail("weeks must be >= 1");
        if (drug_terms_per_post.min < min_drug_tags || drug_terms_per_post.max < drug_terms_per_post.min)
            fail("drug_terms_per_post must be a range starting at min_drug_tags or above");
        if (decoy_tags_per_post.min < 0 || decoy_tags_per_post.max < decoy_tags_per_post.min)
            fail("decoy_tags_per_post is not a valid range");
        if (selfie_posts_per_user.min < 2 || selfie_posts_per_user.max < selfie_posts_per_user.min)
            fail("selfie_posts_per_user must be a range starting at 2 or above");
        if (selfie_user_fraction < 0.0 || selfie_user_fraction > 1.0) fail("selfie_user_fraction must lie in [0,1]");
        for (const auto& d : decoy_vocabulary) {
            if (!is_valid_term_text(d) || d != fold_text(d)) fail("decoy \"" + d + "\" is not a normalized hashtag");
            if (lexicon.find(d)) fail("decoy \"" + d + "\" is a lexicon term");
            if (d == probe_tag || lexicon.is_selfie_tag(d)) fail("decoy \"" + d + "\" collides with a marker tag");
        }
        if (lexicon.find(probe_tag)) fail("probe tag is a lexicon term");
        for (auto c : kDrugClasses) {
            double w = class_weights.contains(c) ? class_weights.at(c) : 0.0;
            std::size_t terms = 0;
            for (const auto& [t, term] : lexicon.terms())
                if (term.active() && term.category == c) ++terms;
            if (w > 0.0 && terms < static_cast<std::size_t>(drug_terms_per_post.max))
                fail("too few categorized terms for class " + std::string(to_string(c)));
        }
        if (geo.geotag_fraction < 0.0 || geo.geotag_fraction > 1.0) fail("geotag_fraction must lie in [0,1]");
        if (geo.outside_user_fraction < 0.0 || geo.outside_user_fraction > 1.0)
            fail("outside_user_fraction must lie in [0,1]");
        if (geo.geotag_fraction > 0.0 && geo.hotspots.empty() && geo.noise_weight <= 0.0)
            fail("geotags need hotspots or a positive noise_weight");
        if (duplicates < 0) fail("duplicates must be nonnegative");
        if (slang) {
            if (!is_valid_term_text(slang->tag) || lexicon.find(slang->tag)) fail("slang tag must be a new hashtag");
            const Term* p = lexicon.find(slang->partner);
            if (!p || !p->active() || p->category == Category::general)
                fail("slang partner must be an active categorized term");
            if (slang->drug_post_rate < 0.0 || slang->drug_post_rate > 1.0) fail("slang rate must lie in [0,1]");
            if (slang->near_miss_posts < 0) fail("near_miss_posts must be nonnegative");
        }
        double bsum = 0.0;
        for (const auto& [b, w] : demographics.bracket_weights) {
            if (w < 0.0) fail("bracket weights must be nonnegative");
            bsum += w;
        }
        if (std::abs(bsum - 1.0) > 1e-9) fail("bracket weights must sum to 1");
        if (demographics.female_fraction < 0.0 || demographics.female_fraction > 1.0)
            fail("female_fraction must lie in [0,1]");
        if (network && network->dealers > drug_users) fail("more dealers than drug users");
        if (network && network->popular_users > drug_users) fail("more popular users than drug users");
    }

    static GeneratorSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

namespace detail {

template <std::size_t N>
std::array<double, N> weights_array(const nlohmann::json& j, const char* what) {
    auto v = j.get<std::vector<double>>();
    if (v.size() != N) throw ConfigError(std::string("generator spec: ") + what + " needs " + std::to_string(N) + " weights");
    std::array<double, N> a{};
    std::copy(v.begin(), v.end(), a.begin());
    return a;
}

inline IntRange range_from(const nlohmann::json& j, IntRange def) {
    if (j.is_number_integer()) return {j.get<int>(), j.get<int>()};
    return {j.value("min", def.min), j.value("max", def.max)};
}

inline GeoPoint point_from(const nlohmann::json& j) { return {j.at("lat").get<double>(), j.at("lon").get<double>()}; }

inline std::vector<PlantedPage> pages_from(const nlohmann::json& j) {
    std::vector<PlantedPage> out;
    for (const auto& p : j) out.push_back({p.at("id").get<std::string>(), p.at("follow_rate").get<double>()});
    return out;
}

}  // namespace detail

inline GeneratorSpec GeneratorSpec::from_json(const nlohmann::json& j) {
    GeneratorSpec s;
    try {
        s.drug_users = j.value("drug_users", s.drug_users);
        s.drug_posts_per_user = j.value("drug_posts_per_user", s.drug_posts_per_user);
        s.decoy_users = j.value("decoy_users", s.decoy_users);
        s.decoy_posts_per_user = j.value("decoy_posts_per_user", s.decoy_posts_per_user);
        s.decoy_single_term_fraction = j.value("decoy_single_term_fraction", s.decoy_single_term_fraction);
        s.clean_users = j.value("clean_users", s.clean_users);
        s.clean_posts_per_user = j.value("clean_posts_per_user", s.clean_posts_per_user);
        s.tainted_probe_users = j.value("tainted_probe_users", s.tainted_probe_users);
        s.probe_tag = j.value("probe_tag", s.probe_tag);
        s.min_drug_tags = j.value("min_drug_tags", s.min_drug_tags);
        if (j.contains("class_weights")) {
            s.class_weights.clear();
            for (const auto& [k, v] : j.at("class_weights").items()) s.class_weights[parse_category(k)] = v.get<double>();
        }
        if (j.contains("hour_weights")) s.hour_weights = detail::weights_array<24>(j.at("hour_weights"), "hour_weights");
        if (j.contains("hour_weights_by_class"))
            for (const auto& [k, v] : j.at("hour_weights_by_class").items())
                s.hour_weights_by_class[parse_category(k)] = detail::weights_array<24>(v, "hour_weights_by_class");
        if (j.contains("weekday_weights"))
            s.weekday_weights = detail::weights_array<7>(j.at("weekday_weights"), "weekday_weights");
        s.start_time = j.value("start_time", s.start_time);
        s.weeks = j.value("weeks", s.weeks);
        if (j.contains("drug_terms_per_post")) s.drug_terms_per_post = detail::range_from(j.at("drug_terms_per_post"), s.drug_terms_per_post);
        if (j.contains("decoy_tags_per_post")) s.decoy_tags_per_post = detail::range_from(j.at("decoy_tags_per_post"), s.decoy_tags_per_post);
        if (j.contains("decoy_vocabulary")) s.decoy_vocabulary = j.at("decoy_vocabulary").get<std::vector<std::string>>();
        s.selfie_user_fraction = j.value("selfie_user_fraction", s.selfie_user_fraction);
        if (j.contains("selfie_posts_per_user")) s.selfie_posts_per_user = detail::range_from(j.at("selfie_posts_per_user"), s.selfie_posts_per_user);
        s.single_selfie_near_miss = j.value("single_selfie_near_miss", s.single_selfie_near_miss);
        if (j.contains("geo")) {
            const auto& g = j.at("geo");
            s.geo.geotag_fraction = g.value("geotag_fraction", 0.0);
            if (g.contains("region")) s.geo.region = BoundingBox::from_json(g.at("region"));
            if (g.contains("hotspots"))
                for (const auto& h : g.at("hotspots"))
                    s.geo.hotspots.push_back({detail::point_from(h), h.value("sigma_m", 50.0), h.value("weight", 1.0)});
            s.geo.noise_weight = g.value("noise_weight", 0.0);
            s.geo.outside_user_fraction = g.value("outside_user_fraction", 0.0);
            if (g.contains("outside_region")) s.geo.outside_region = BoundingBox::from_json(g.at("outside_region"));
        }
        s.duplicates = j.value("duplicates", s.duplicates);
        if (j.contains("slang") && !j.at("slang").is_null()) {
            const auto& sl = j.at("slang");
            s.slang = SlangSpec{sl.at("tag").get<std::string>(), sl.at("partner").get<std::string>(),
                                sl.value("drug_post_rate", 0.25), sl.value("near_miss_posts", 0)};
        }
        if (j.contains("demographics")) {
            const auto& d = j.at("demographics");
            s.demographics.female_fraction = d.value("female_fraction", s.demographics.female_fraction);
            if (d.contains("bracket_weights")) {
                s.demographics.bracket_weights.clear();
                for (const auto& [k, v] : d.at("bracket_weights").items())
                    s.demographics.bracket_weights[parse_bracket(k)] = v.get<double>();
            }
            s.demographics.face_noise_sigma = d.value("face_noise_sigma", s.demographics.face_noise_sigma);
            s.demographics.extra_face_fraction = d.value("extra_face_fraction", s.demographics.extra_face_fraction);
            s.demographics.no_face_fraction = d.value("no_face_fraction", s.demographics.no_face_fraction);
        }
        if (j.contains("network") && !j.at("network").is_null()) {
            const auto& n = j.at("network");
            NetworkSpec net;
            if (n.contains("drug_pages")) net.drug_pages = detail::pages_from(n.at("drug_pages"));
            if (n.contains("nondrug_pages")) net.nondrug_pages = detail::pages_from(n.at("nondrug_pages"));
            net.drug_peer_prob = n.value("drug_peer_prob", net.drug_peer_prob);
            net.nondrug_peer_prob = n.value("nondrug_peer_prob", net.nondrug_peer_prob);
            net.dealers = n.value("dealers", net.dealers);
            net.popular_users = n.value("popular_users", net.popular_users);
            net.popular_followers = n.value("popular_followers", net.popular_followers);
            s.network = net;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("generator spec: ") + e.what());
    }
    return s;
}

inline nlohmann::json GeneratorSpec::to_json() const {
    nlohmann::json j;
    j["drug_users"] = drug_users;
    j["drug_posts_per_user"] = drug_posts_per_user;
    j["decoy_users"] = decoy_users;
    j["decoy_posts_per_user"] = decoy_posts_per_user;
    j["decoy_single_term_fraction"] = decoy_single_term_fraction;
    j["clean_users"] = clean_users;
    j["clean_posts_per_user"] = clean_posts_per_user;
    j["tainted_probe_users"] = tainted_probe_users;
    j["probe_tag"] = probe_tag;
    j["min_drug_tags"] = min_drug_tags;
    for (const auto& [c, w] : class_weights) j["class_weights"][std::string(to_string(c))] = w;
    j["hour_weights"] = hour_weights;
    for (const auto& [c, h] : hour_weights_by_class) j["hour_weights_by_class"][std::string(to_string(c))] = h;
    j["weekday_weights"] = weekday_weights;
    j["start_time"] = start_time;
    j["weeks"] = weeks;
    j["drug_terms_per_post"] = {{"min", drug_terms_per_post.min}, {"max", drug_terms_per_post.max}};
    j["decoy_tags_per_post"] = {{"min", decoy_tags_per_post.min}, {"max", decoy_tags_per_post.max}};
    j["decoy_vocabulary"] = decoy_vocabulary;
    j["selfie_user_fraction"] = selfie_user_fraction;
    j["selfie_posts_per_user"] = {{"min", selfie_posts_per_user.min}, {"max", selfie_posts_per_user.max}};
    j["single_selfie_near_miss"] = single_selfie_near_miss;
    auto hs = nlohmann::json::array();
    for (const auto& h : geo.hotspots)
        hs.push_back({{"lat", h.center.lat}, {"lon", h.center.lon}, {"sigma_m", h.sigma_m}, {"weight", h.weight}});
    j["geo"] = {{"geotag_fraction", geo.geotag_fraction}, {"region", geo.region.to_json()},
                {"hotspots", hs},                       {"noise_weight", geo.noise_weight},
                {"outside_user_fraction", geo.outside_user_fraction},
                {"outside_region", geo.outside_region.to_json()}};
    j["duplicates"] = duplicates;
    if (slang)
        j["slang"] = {{"tag", slang->tag},
                      {"partner", slang->partner},
                      {"drug_post_rate", slang->drug_post_rate},
                      {"near_miss_posts", slang->near_miss_posts}};
    nlohmann::json bw = nlohmann::json::object();
    for (const auto& [b, w] : demographics.bracket_weights) bw[std::string(to_string(b))] = w;
    j["demographics"] = {{"female_fraction", demographics.female_fraction},
                         {"bracket_weights", bw},
                         {"face_noise_sigma", demographics.face_noise_sigma},
                         {"extra_face_fraction", demographics.extra_face_fraction},
                         {"no_face_fraction", demographics.no_face_fraction}};
    if (network) {
        auto pages = [](const std::vector<PlantedPage>& v) {
            auto a = nlohmann::json::array();
            for (const auto& p : v) a.push_back({{"id", p.id}, {"follow_rate", p.follow_rate}});
            return a;
        };
        j["network"] = {{"drug_pages", pages(network->drug_pages)},
                        {"nondrug_pages", pages(network->nondrug_pages)},
                        {"drug_peer_prob", network->drug_peer_prob},
                        {"nondrug_peer_prob", network->nondrug_peer_prob},
                        {"dealers", network->dealers},
                        {"popular_users", network->popular_users},
                        {"popular_followers", network->popular_followers}};
    }
    return j;
}

/// Hidden label for one unique post.
struct TruthRecord {
    std::string media_id;
    bool is_drug = false;
    std::optional<Category> drug_class;
    Cohort cohort = Cohort::unlabeled;

    nlohmann::json to_json() const {
        return {{"media_id", media_id},
                {"is_drug", is_drug},
                {"class", drug_class ? nlohmann::json(to_string(*drug_class)) : nlohmann::json("none")},
                {"cohort", to_string(cohort)}};
    }
};

/// Per-user plants, kept for test oracles.
struct PlantedUser {
    std::string user_id;
    Cohort cohort = Cohort::unlabeled;
    bool selfie_confirmed = false;
    bool outside_region = false;
    bool popular = false;
    Role role = Role::unknown;
    std::optional<Gender> gender;
    std::optional<AgeBracket> bracket;
    double planted_age = 0.0;
};

struct SyntheticCorpus {
    std::vector<Post> emitted;  // stream order, planted duplicates included
    std::vector<TruthRecord> truth;  // one per unique post
    std::vector<std::pair<std::string, std::vector<FaceObservation>>> faces;  // media_ref -> faces
    std::vector<FollowEdge> follows;
    std::vector<NodeInfo> nodes;
    std::vector<PlantedUser> users;
    std::uint64_t planted_duplicates = 0;

    void write_corpus(std::ostream& out) const { tagmine::write_corpus(out, emitted); }
    void write_truth(std::ostream& out) const {
        for (const auto& t : truth) out << t.to_json().dump() << '\n';
    }
    void write_faces(std::ostream& out) const {
        for (const auto& [ref, fs] : faces) {
            auto arr = nlohmann::json::array();
            for (const auto& f : fs)
                arr.push_back({{"rect", {f.rect.x, f.rect.y, f.rect.width, f.rect.height}},
                               {"age", f.age_estimate},
                               {"gender", to_string(f.gender)}});
            out << nlohmann::json{{"media_ref", ref}, {"faces", arr}}.dump() << '\n';
        }
    }
    void write_follows(std::ostream& out) const {
        out << "follower_id,followed_id\n";
        for (const auto& e : follows) out << e.follower << ',' << e.followed << '\n';
    }
    void write_nodes(std::ostream& out) const {
        for (const auto& n : nodes)
            out << nlohmann::json{{"id", n.id}, {"role", to_string(n.role)}, {"cohort", to_string(n.cohort)}}.dump()
                << '\n';
    }
};

namespace detail {

struct Draft {
    std::size_t user;  // index into users
    std::int64_t created_at;
    std::vector<std::string> hashtags;
    std::optional<GeoPoint> geo;
    bool selfie = false;
    bool is_drug = false;
    std::optional<Category> drug_class;
    std::size_t order;  // generation order, breaks timestamp ties
};

inline std::int64_t draw_time(Rng& rng, const GeneratorSpec& spec, std::span<const double> hours) {
    const std::int64_t start_day = spec.start_time / 86400;
    const int first_weekday = day_of_week(start_day * 86400);
    const auto week = rng.integer(0, spec.weeks - 1);
    const auto weekday = static_cast<int>(rng.categorical(spec.weekday_weights));
    const auto day = start_day + week * 7 + (weekday - first_weekday + 7) % 7;
    const auto hour = static_cast<std::int64_t>(rng.categorical(hours));
    return day * 86400 + hour * 3600 + rng.integer(0, 3599);
}

inline GeoPoint uniform_in(Rng& rng, const BoundingBox& b) {
    return {rng.uniform(b.min_lat, b.max_lat), rng.uniform(b.min_lon, b.max_lon)};
}

inline GeoPoint gaussian_around(Rng& rng, const Hotspot& h) {
    const double dy = rng.normal() * h.sigma_m;
    const double dx = rng.normal() * h.sigma_m;
    return {h.center.lat + dy / kMetersPerDegree,
            h.center.lon + dx / (kMetersPerDegree * std::cos(to_radians(h.center.lat)))};
}

inline std::vector<std::string> sample_distinct(Rng& rng, const std::vector<std::string>& pool, std::size_t k) {
    std::vector<std::string> copy = pool;
    k = std::min(k, copy.size());
    for (std::size_t i = 0; i < k; ++i)
        std::swap(copy[i], copy[static_cast<std::size_t>(rng.integer(static_cast<std::int64_t>(i),
                                                                      static_cast<std::int64_t>(copy.size()) - 1))]);
    copy.resize(k);
    return copy;
}

inline void append_unique(std::vector<std::string>& tags, const std::string& t) {
    if (std::find(tags.begin(), tags.end(), t) == tags.end()) tags.push_back(t);
}

inline std::pair<double, double> bracket_age_range(AgeBracket b) {
    switch (b) {
        case AgeBracket::under15: return {11.5, 13.5};
        case AgeBracket::from15to20: return {16.5, 18.5};
        case AgeBracket::from20to30: return {21.5, 28.5};
        case AgeBracket::from30to40: return {31.5, 38.5};
        default: return {41.5, 58.5};
    }
}

}  // namespace detail

/// Generates a labeled corpus. Drug posts carry min..max terms of one class;
/// decoy posts carry at most one lexicon term; clean users post the probe tag
/// and never a lexicon term. Ground truth is computed with the same decision
/// rule the classifier applies, over `lexicon`.
inline SyntheticCorpus generate_synthetic(const GeneratorSpec& spec, std::uint64_t seed,
                                          const Lexicon& lexicon = shipped_lexicon()) {
    spec.validate(lexicon);
    Rng rng(seed);
    SyntheticCorpus out;

    // Users, shuffled so ids carry no cohort information.
    std::vector<PlantedUser> users;
    auto add_users = [&](int n, Cohort c) {
        for (int i = 0; i < n; ++i) {
            PlantedUser u;
            u.cohort = c;
            users.push_back(u);
        }
    };
    add_users(spec.drug_users, Cohort::drug);
    add_users(spec.decoy_users, Cohort::unlabeled);
    add_users(spec.clean_users, Cohort::nondrug);
    const std::size_t tainted_begin = users.size();
    add_users(spec.tainted_probe_users, Cohort::unlabeled);
    std::vector<std::size_t> perm(users.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    rng.shuffle(perm);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "u%06zu", i + 1);
        users[perm[i]].user_id = buf;
    }

    std::vector<std::size_t> drug_idx;
    for (std::size_t i = 0; i < users.size(); ++i)
        if (users[i].cohort == Cohort::drug) drug_idx.push_back(i);

    // Exact plants over drug users: selfie-confirmed, outside-region.
    auto plant_flags = [&](double fraction, auto&& set) {
        std::vector<std::size_t> order = drug_idx;
        rng.shuffle(order);
        const auto n = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(order.size())));
        for (std::size_t k = 0; k < n && k < order.size(); ++k) set(users[order[k]]);
    };
    plant_flags(spec.selfie_user_fraction, [](PlantedUser& u) { u.selfie_confirmed = true; });
    plant_flags(spec.geo.outside_user_fraction, [](PlantedUser& u) { u.outside_region = true; });

    // Gender and bracket by apportionment over selfie-confirmed users.
    {
        std::vector<std::size_t> confirmed;
        for (auto i : drug_idx)
            if (users[i].selfie_confirmed) confirmed.push_back(i);
        rng.shuffle(confirmed);
        const double ff = spec.demographics.female_fraction;
        const std::array<double, 2> gw{ff, 1.0 - ff};
        auto gcount = apportion(confirmed.size(), gw);
        for (std::size_t k = 0; k < confirmed.size(); ++k)
            users[confirmed[k]].gender = k < gcount[0] ? Gender::female : Gender::male;
        rng.shuffle(confirmed);
        std::vector<AgeBracket> brackets;
        std::vector<double> bw;
        for (const auto& [b, w] : spec.demographics.bracket_weights) {
            brackets.push_back(b);
            bw.push_back(w);
        }
        auto bcount = apportion(confirmed.size(), bw);
        std::size_t k = 0;
        for (std::size_t b = 0; b < brackets.size(); ++b)
            for (std::size_t c = 0; c < bcount[b]; ++c, ++k) {
                auto& u = users[confirmed[k]];
                u.bracket = brackets[b];
                auto [lo, hi] = detail::bracket_age_range(brackets[b]);
                u.planted_age = rng.uniform(lo, hi);
            }
    }

    // Categorized term pools per class.
    std::map<Category, std::vector<std::string>> pools;
    for (const auto& [text, term] : lexicon.terms())
        if (term.active() && term.category != Category::general) pools[term.category].push_back(text);
    std::vector<std::string> single_term_pool;
    for (const auto& [text, term] : lexicon.terms())
        if (term.active()) single_term_pool.push_back(text);
    const std::vector<std::string> selfie_tags(lexicon.selfie_tags().begin(), lexicon.selfie_tags().end());

    std::vector<Category> classes;
    std::vector<double> class_w;
    for (auto c : kDrugClasses) {
        classes.push_back(c);
        class_w.push_back(spec.class_weights.contains(c) ? spec.class_weights.at(c) : 0.0);
    }

    std::vector<detail::Draft> drafts;
    auto new_draft = [&](std::size_t user) -> detail::Draft& {
        drafts.push_back(detail::Draft{user, 0, {}, std::nullopt, false, false, std::nullopt, drafts.size()});
        return drafts.back();
    };
    auto add_decoys = [&](detail::Draft& d) {
        auto k = static_cast<std::size_t>(rng.integer(spec.decoy_tags_per_post.min, spec.decoy_tags_per_post.max));
        for (auto& t : detail::sample_distinct(rng, spec.decoy_vocabulary, k)) detail::append_unique(d.hashtags, t);
    };
    auto place_geo = [&](detail::Draft& d, const PlantedUser& u) {
        if (!rng.chance(spec.geo.geotag_fraction)) return;
        if (u.outside_region) {
            d.geo = detail::uniform_in(rng, spec.geo.outside_region);
            return;
        }
        std::vector<double> w;
        for (const auto& h : spec.geo.hotspots) w.push_back(h.weight);
        w.push_back(spec.geo.noise_weight);
        auto pick = rng.categorical(w);
        d.geo = pick < spec.geo.hotspots.size() ? detail::gaussian_around(rng, spec.geo.hotspots[pick])
                                                : detail::uniform_in(rng, spec.geo.region);
    };

    const Category slang_class = spec.slang ? lexicon.find(spec.slang->partner)->category : Category::general;
    const double slang_p = [&] {
        if (!spec.slang) return 0.0;
        double w = spec.class_weights.contains(slang_class) ? spec.class_weights.at(slang_class) : 0.0;
        return w > 0.0 ? std::min(1.0, spec.slang->drug_post_rate / w) : 0.0;
    }();

    // Drug users.
    for (auto ui : drug_idx) {
        auto& u = users[ui];
        std::vector<std::size_t> mine;
        for (int k = 0; k < spec.drug_posts_per_user; ++k) {
            auto& d = new_draft(ui);
            const Category c = classes[rng.categorical(class_w)];
            auto n = static_cast<std::size_t>(rng.integer(spec.drug_terms_per_post.min, spec.drug_terms_per_post.max));
            d.hashtags = detail::sample_distinct(rng, pools[c], n);
            if (spec.slang && c == slang_class && rng.chance(slang_p)) {
                detail::append_unique(d.hashtags, spec.slang->partner);
                detail::append_unique(d.hashtags, spec.slang->tag);
            }
            add_decoys(d);
            d.created_at = detail::draw_time(rng, spec, spec.hours_for(c));
            place_geo(d, u);
            d.drug_class = c;
            mine.push_back(drafts.size() - 1);
        }
        int selfies = 0;
        if (u.selfie_confirmed)
            selfies = static_cast<int>(rng.integer(spec.selfie_posts_per_user.min, spec.selfie_posts_per_user.max));
        else if (spec.single_selfie_near_miss)
            selfies = 1;
        selfies = std::min<int>(selfies, static_cast<int>(mine.size()));
        rng.shuffle(mine);
        for (int s = 0; s < selfies; ++s) {
            auto& d = drafts[mine[static_cast<std::size_t>(s)]];
            detail::append_unique(d.hashtags, selfie_tags[static_cast<std::size_t>(
                                                  rng.integer(0, static_cast<std::int64_t>(selfie_tags.size()) - 1))]);
            d.selfie = true;
        }
    }
    if (spec.slang && !drug_idx.empty()) {
        for (int k = 0; k < spec.slang->near_miss_posts; ++k) {
            auto ui = drug_idx[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(drug_idx.size()) - 1))];
            auto& d = new_draft(ui);
            d.hashtags = {spec.slang->partner, spec.slang->tag};
            add_decoys(d);
            d.created_at = detail::draw_time(rng, spec, spec.hours_for(slang_class));
        }
    }

    // Decoy users: lexicon-free posts, some with exactly one term.
    for (std::size_t ui = 0; ui < users.size(); ++ui) {
        if (users[ui].cohort != Cohort::unlabeled || ui >= tainted_begin) continue;
        for (int k = 0; k < spec.decoy_posts_per_user; ++k) {
            auto& d = new_draft(ui);
            if (rng.chance(spec.decoy_single_term_fraction))
                d.hashtags.push_back(single_term_pool[static_cast<std::size_t>(
                    rng.integer(0, static_cast<std::int64_t>(single_term_pool.size()) - 1))]);
            add_decoys(d);
            if (d.hashtags.empty()) d.hashtags.push_back(spec.decoy_vocabulary.front());
            d.created_at = detail::draw_time(rng, spec, GeneratorSpec::uniform_hours());
        }
    }
    // Probe-tag users: clean ones never touch the lexicon; tainted ones carry one term once.
    for (std::size_t ui = 0; ui < users.size(); ++ui) {
        const bool clean = users[ui].cohort == Cohort::nondrug;
        const bool tainted = ui >= tainted_begin;
        if (!clean && !tainted) continue;
        const int n = std::max(1, spec.clean_posts_per_user);
        for (int k = 0; k < n; ++k) {
            auto& d = new_draft(ui);
            if (k == 0) d.hashtags.push_back(spec.probe_tag);
            if (tainted && k == n - 1)
                d.hashtags.push_back(single_term_pool[static_cast<std::size_t>(
                    rng.integer(0, static_cast<std::int64_t>(single_term_pool.size()) - 1))]);
            add_decoys(d);
            if (d.hashtags.empty()) d.hashtags.push_back(spec.decoy_vocabulary.front());
            d.created_at = detail::draw_time(rng, spec, GeneratorSpec::uniform_hours());
        }
    }

    // Stream order is chronological.
    std::sort(drafts.begin(), drafts.end(), [](const detail::Draft& a, const detail::Draft& b) {
        return a.created_at != b.created_at ? a.created_at < b.created_at : a.order < b.order;
    });

    ClassificationConfig rule;
    rule.min_drug_tags = spec.min_drug_tags;
    std::vector<Post> unique;
    unique.reserve(drafts.size());
    for (std::size_t i = 0; i < drafts.size(); ++i) {
        auto& d = drafts[i];
        const auto& u = users[d.user];
        Post p;
        char buf[32];
        std::snprintf(buf, sizeof buf, "m%08zu", i + 1);
        p.media_id = buf;
        p.user_id = u.user_id;
        p.username = "user_" + u.user_id.substr(1);
        p.created_at = d.created_at;
        p.hashtags = d.hashtags;
        p.geo = d.geo;
        if (d.selfie) p.media_ref = "img-" + p.media_id;

        TruthRecord t;
        t.media_id = p.media_id;
        t.is_drug = is_drug_post(p, lexicon, rule).positive;
        if (t.is_drug) t.drug_class = d.drug_class;
        t.cohort = u.cohort;
        out.truth.push_back(t);

        if (d.selfie && u.selfie_confirmed) {
            std::vector<FaceObservation> faces;
            if (!rng.chance(spec.demographics.no_face_fraction)) {
                FaceObservation f;
                f.rect = {rng.integer(0, 400), rng.integer(0, 400), rng.integer(150, 400), rng.integer(150, 400)};
                f.age_estimate =
                    std::max(0.0, u.planted_age + rng.normal() * spec.demographics.face_noise_sigma);
                f.gender = *u.gender;
                faces.push_back(f);
                if (rng.chance(spec.demographics.extra_face_fraction)) {
                    FaceObservation g;
                    g.rect = {rng.integer(0, 400), rng.integer(0, 400), rng.integer(40, 120), rng.integer(40, 120)};
                    g.age_estimate = rng.uniform(18.0, 60.0);
                    g.gender = rng.chance(0.5) ? Gender::female : Gender::male;
                    faces.insert(faces.begin(), g);
                }
            }
            out.faces.emplace_back(*p.media_ref, std::move(faces));
        }
        unique.push_back(std::move(p));
    }

    // Planted duplicates: copies inserted after their original.
    out.emitted = unique;
    if (!unique.empty()) {
        for (int k = 0; k < spec.duplicates; ++k) {
            auto src = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(unique.size()) - 1));
            Post copy = unique[src];
            auto first = static_cast<std::size_t>(
                std::find_if(out.emitted.begin(), out.emitted.end(),
                             [&](const Post& p) { return p.media_id == copy.media_id; }) -
                out.emitted.begin());
            auto pos = static_cast<std::size_t>(
                rng.integer(static_cast<std::int64_t>(first) + 1, static_cast<std::int64_t>(out.emitted.size())));
            out.emitted.insert(out.emitted.begin() + static_cast<std::ptrdiff_t>(pos), std::move(copy));
            ++out.planted_duplicates;
        }
    }

    // Follow graph.
    if (spec.network) {
        const auto& net = *spec.network;
        std::vector<std::size_t> nondrug_idx;
        for (std::size_t i = 0; i < users.size(); ++i)
            if (users[i].cohort == Cohort::nondrug) nondrug_idx.push_back(i);

        std::vector<std::size_t> order = drug_idx;
        rng.shuffle(order);
        for (int k = 0; k < net.dealers; ++k) users[order[static_cast<std::size_t>(k)]].role = Role::dealer;
        rng.shuffle(order);
        for (int k = 0; k < net.popular_users; ++k) users[order[static_cast<std::size_t>(k)]].popular = true;
        for (auto i : drug_idx)
            if (users[i].role == Role::unknown) users[i].role = Role::user;
        for (auto i : nondrug_idx) users[i].role = Role::user;

        auto follow_pages = [&](const std::vector<std::size_t>& cohort, const std::vector<PlantedPage>& pages) {
            for (const auto& page : pages) {
                std::vector<std::size_t> who = cohort;
                rng.shuffle(who);
                auto n = static_cast<std::size_t>(std::llround(page.follow_rate * static_cast<double>(who.size())));
                for (std::size_t k = 0; k < n && k < who.size(); ++k)
                    out.follows.push_back({users[who[k]].user_id, page.id});
                out.nodes.push_back({page.id, Role::page, Cohort::unlabeled});
            }
        };
        follow_pages(drug_idx, net.drug_pages);
        follow_pages(nondrug_idx, net.nondrug_pages);

        auto peers = [&](const std::vector<std::size_t>& cohort, double p) {
            for (auto a : cohort)
                for (auto b : cohort)
                    if (a != b && rng.chance(p)) out.follows.push_back({users[a].user_id, users[b].user_id});
        };
        peers(drug_idx, net.drug_peer_prob);
        peers(nondrug_idx, net.nondrug_peer_prob);

        for (auto i : drug_idx) {
            if (!users[i].popular) continue;
            for (int f = 0; f < net.popular_followers; ++f)
                out.follows.push_back({"fan_" + users[i].user_id + "_" + std::to_string(f), users[i].user_id});
        }
        for (auto i : drug_idx) out.nodes.push_back({users[i].user_id, users[i].role, Cohort::drug});
        for (auto i : nondrug_idx) out.nodes.push_back({users[i].user_id, users[i].role, Cohort::nondrug});
        std::sort(out.nodes.begin(), out.nodes.end(), [](const NodeInfo& a, const NodeInfo& b) { return a.id < b.id; });
    }

    std::sort(users.begin(), users.end(), [](const PlantedUser& a, const PlantedUser& b) { return a.user_id < b.user_id; });
    out.users = std::move(users);
    return out;
}

}  // namespace tagmine
