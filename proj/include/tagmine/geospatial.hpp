#pragma once

// Circle-cover planning for location search, media-id dedup across circles,
// density clustering of geotagged posts and venue categorization.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "tagmine/corpus.hpp"
#include "tagmine/errors.hpp"

namespace tagmine {

inline constexpr double kEarthRadiusMeters = 6'371'000.0;
inline constexpr double kMaxSearchRadiusMeters = 5'000.0;
/// Meters per degree of latitude on the spherical model.
inline constexpr double kMetersPerDegree = kEarthRadiusMeters * std::numbers::pi / 180.0;

inline double to_radians(double deg) { return deg * std::numbers::pi / 180.0; }

/// Great-circle distance in meters.
inline double haversine(GeoPoint a, GeoPoint b) {
    const double dlat = to_radians(b.lat - a.lat);
    const double dlon = to_radians(b.lon - a.lon);
    const double s = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(to_radians(a.lat)) * std::cos(to_radians(b.lat)) * std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2.0 * kEarthRadiusMeters * std::asin(std::min(1.0, std::sqrt(s)));
}

struct BoundingBox {
    double min_lat = 0.0;
    double min_lon = 0.0;
    double max_lat = 0.0;
    double max_lon = 0.0;

    void validate() const {
        if (!(GeoPoint{min_lat, min_lon}.valid() && GeoPoint{max_lat, max_lon}.valid()))
            throw ConfigError("bounding box corners out of range");
        if (min_lat > max_lat || min_lon > max_lon) throw ConfigError("bounding box corners are inverted");
    }
    bool contains(GeoPoint p) const {
        return p.lat >= min_lat && p.lat <= max_lat && p.lon >= min_lon && p.lon <= max_lon;
    }
    GeoPoint center() const { return {(min_lat + max_lat) / 2, (min_lon + max_lon) / 2}; }

    nlohmann::json to_json() const {
        return {{"min_lat", min_lat}, {"min_lon", min_lon}, {"max_lat", max_lat}, {"max_lon", max_lon}};
    }
    static BoundingBox from_json(const nlohmann::json& j) {
        BoundingBox b{j.at("min_lat").get<double>(), j.at("min_lon").get<double>(), j.at("max_lat").get<double>(),
                      j.at("max_lon").get<double>()};
        b.validate();
        return b;
    }
};

struct CircleQuery {
    std::int64_t min_time = 0;
    std::int64_t max_time = 0;
    double radius = 0.0;  // meters
    double lat = 0.0;
    double lon = 0.0;

    void validate() const {
        if (!(min_time < max_time)) throw ConfigError("circle query needs min_time < max_time");
        if (!(radius > 0.0 && radius <= kMaxSearchRadiusMeters)) throw ConfigError("radius must lie in (0, 5000] m");
        if (!GeoPoint{lat, lon}.valid()) throw ConfigError("circle center out of range");
    }

    /// Accepts [time, time, radius, lat, lon] with the two times in either order.
    static CircleQuery from_tuple(std::span<const double> v) {
        if (v.size() != 5) throw ParseError("circle query tuple needs 5 values");
        auto t0 = static_cast<std::int64_t>(v[0]);
        auto t1 = static_cast<std::int64_t>(v[1]);
        CircleQuery q{std::min(t0, t1), std::max(t0, t1), v[2], v[3], v[4]};
        q.validate();
        return q;
    }

    nlohmann::json to_json() const {
        return {{"min_time", min_time}, {"max_time", max_time}, {"radius", radius}, {"lat", lat}, {"lon", lon}};
    }
    static CircleQuery from_json(const nlohmann::json& j) {
        if (j.is_array()) return from_tuple(j.get<std::vector<double>>());
        auto t0 = j.at("min_time").get<std::int64_t>();
        auto t1 = j.at("max_time").get<std::int64_t>();
        CircleQuery q{std::min(t0, t1), std::max(t0, t1), j.at("radius").get<double>(), j.at("lat").get<double>(),
                      j.at("lon").get<double>()};
        q.validate();
        return q;
    }
};

struct CoveragePlan {
    BoundingBox region;
    double radius = 0.0;
    std::vector<CircleQuery> circles;

    std::size_t estimated_requests() const { return circles.size(); }

    nlohmann::json to_json() const {
        auto arr = nlohmann::json::array();
        for (const auto& c : circles) arr.push_back(c.to_json());
        return {{"region", region.to_json()},
                {"radius", radius},
                {"circle_count", circles.size()},
                {"estimated_requests", estimated_requests()},
                {"circles", arr}};
    }
};

/// Hexagonal lattice of circle centers covering the region: column spacing
/// radius*sqrt(3), row pitch radius*1.5, alternate rows offset by half a column.
/// Longitude spacing uses the widest meters-per-degree found in the rows' reach,
/// so every point of the region lies within `radius` of some center.
inline CoveragePlan plan_cover(const BoundingBox& region, double radius, std::int64_t min_time, std::int64_t max_time) {
    region.validate();
    CircleQuery probe{std::min(min_time, max_time), std::max(min_time, max_time), radius, region.min_lat,
                      region.min_lon};
    probe.validate();
    if (region.max_lat - region.min_lat >= 5.0) throw ConfigError("region spans 5 degrees of latitude or more");

    CoveragePlan plan;
    plan.region = region;
    plan.radius = radius;
    auto circle_at = [&](double lat, double lon) {
        plan.circles.push_back(CircleQuery{probe.min_time, probe.max_time, radius, lat, lon});
    };
    if (region.min_lat == region.max_lat && region.min_lon == region.max_lon) {
        circle_at(region.min_lat, region.min_lon);
        return plan;
    }

    // Small safety margin for the flat-lattice approximation of the sphere.
    const double r = radius * 0.995;
    const double pitch_deg = 1.5 * r / kMetersPerDegree;
    const double reach_deg = r / kMetersPerDegree;
    double max_cos = 0.0;
    {
        double lo = std::clamp(region.min_lat - reach_deg, -90.0, 90.0);
        double hi = std::clamp(region.max_lat + reach_deg, -90.0, 90.0);
        max_cos = (lo <= 0.0 && hi >= 0.0) ? 1.0 : std::max(std::cos(to_radians(lo)), std::cos(to_radians(hi)));
    }
    const double col_deg = std::sqrt(3.0) * r / (kMetersPerDegree * max_cos);

    const auto rows = static_cast<std::int64_t>(std::ceil((region.max_lat - region.min_lat) / pitch_deg));
    const auto cols = static_cast<std::int64_t>(std::ceil((region.max_lon - region.min_lon) / col_deg));
    for (std::int64_t i = 0; i <= rows; ++i) {
        const double lat = std::min(90.0, region.min_lat + static_cast<double>(i) * pitch_deg);
        const double offset = (i % 2 == 1) ? 0.5 * col_deg : 0.0;
        // One extra column on the left of offset rows keeps the west edge covered.
        for (std::int64_t j = (i % 2 == 1) ? -1 : 0; j <= cols; ++j) {
            double lon = region.min_lon + offset + static_cast<double>(j) * col_deg;
            if (lon > 180.0) lon -= 360.0;
            if (lon < -180.0) lon += 360.0;
            circle_at(lat, lon);
        }
    }
    return plan;
}

struct DedupResult {
    std::vector<Post> posts;
    std::uint64_t input = 0;
    std::uint64_t duplicates = 0;

    double overlap_ratio() const { return input == 0 ? 0.0 : static_cast<double>(duplicates) / static_cast<double>(input); }
};

/// Keep-first by media_id across the results of overlapping circles.
inline DedupResult dedup(std::span<const Post> posts) {
    DedupResult out;
    std::unordered_set<std::string> seen;
    for (const auto& p : posts) {
        ++out.input;
        if (seen.insert(p.media_id).second)
            out.posts.push_back(p);
        else
            ++out.duplicates;
    }
    return out;
}

enum class VenueCategory { residential, club, restaurant, other };

inline constexpr std::array<VenueCategory, 4> kVenueCategories = {VenueCategory::residential, VenueCategory::club,
                                                                 VenueCategory::restaurant, VenueCategory::other};

inline std::string_view to_string(VenueCategory c) {
    switch (c) {
        case VenueCategory::residential: return "residential";
        case VenueCategory::club: return "club";
        case VenueCategory::restaurant: return "restaurant";
        default: return "other";
    }
}

inline VenueCategory parse_venue(std::string_view s) {
    for (auto c : kVenueCategories)
        if (to_string(c) == s) return c;
    throw ParseError("unknown venue category: \"" + std::string(s) + "\"");
}

struct Cluster {
    std::vector<std::string> members;  // media_ids, sorted
    GeoPoint centroid;
    std::optional<VenueCategory> venue_category;

    nlohmann::json to_json() const {
        return {{"members", members},
                {"size", members.size()},
                {"centroid", {{"lat", centroid.lat}, {"lon", centroid.lon}}},
                {"venue_category",
                 venue_category ? nlohmann::json(to_string(*venue_category)) : nlohmann::json()}};
    }
};

struct GeoTagged {
    std::string media_id;
    GeoPoint point;
};

/// Density clustering with haversine neighborhoods (a point is its own
/// neighbor). Clusters are connected components of core points; a border point
/// joins the cluster of its core neighbor with the smallest media_id. Noise is
/// dropped. Output is ordered by each cluster's smallest member id.
inline std::vector<Cluster> cluster_hotspots(std::span<const GeoTagged> input, double eps_meters,
                                             std::size_t min_points) {
    if (!(eps_meters > 0.0)) throw ConfigError("eps must be positive");
    if (min_points == 0) throw ConfigError("min_points must be positive");

    std::vector<GeoTagged> pts(input.begin(), input.end());
    std::sort(pts.begin(), pts.end(), [](const GeoTagged& a, const GeoTagged& b) { return a.media_id < b.media_id; });
    const std::size_t n = pts.size();
    if (n == 0) return {};

    // Grid over lat/lon whose cells are at least eps wide at every latitude in the data.
    double max_abs_lat = 0.0;
    for (const auto& p : pts) max_abs_lat = std::max(max_abs_lat, std::abs(p.point.lat));
    const double cell_lat = eps_meters / kMetersPerDegree;
    const double min_cos = std::cos(to_radians(std::min(max_abs_lat + cell_lat, 90.0)));
    const bool use_grid = min_cos > 0.01;
    const double cell_lon = use_grid ? cell_lat / min_cos : 360.0;

    auto key = [&](std::int64_t a, std::int64_t b) { return (static_cast<std::uint64_t>(a) << 32) ^ static_cast<std::uint32_t>(b); };
    auto cell_of = [&](GeoPoint p) {
        return std::pair{static_cast<std::int64_t>(std::floor(p.lat / cell_lat)),
                         static_cast<std::int64_t>(std::floor(p.lon / cell_lon))};
    };
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid;
    for (std::size_t i = 0; i < n; ++i) {
        auto [a, b] = cell_of(pts[i].point);
        grid[key(a, b)].push_back(i);
    }

    std::vector<std::vector<std::size_t>> neighbors(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!use_grid) {
            for (std::size_t j = 0; j < n; ++j)
                if (haversine(pts[i].point, pts[j].point) <= eps_meters) neighbors[i].push_back(j);
            continue;
        }
        auto [a, b] = cell_of(pts[i].point);
        for (std::int64_t da = -1; da <= 1; ++da)
            for (std::int64_t db = -1; db <= 1; ++db) {
                auto it = grid.find(key(a + da, b + db));
                if (it == grid.end()) continue;
                for (auto j : it->second)
                    if (haversine(pts[i].point, pts[j].point) <= eps_meters) neighbors[i].push_back(j);
            }
        std::sort(neighbors[i].begin(), neighbors[i].end());
    }

    std::vector<bool> core(n);
    for (std::size_t i = 0; i < n; ++i) core[i] = neighbors[i].size() >= min_points;

    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::vector<std::size_t> label(n, kNone);
    std::size_t clusters = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!core[i] || label[i] != kNone) continue;
        std::vector<std::size_t> stack{i};
        label[i] = clusters;
        while (!stack.empty()) {
            auto u = stack.back();
            stack.pop_back();
            for (auto v : neighbors[u])
                if (core[v] && label[v] == kNone) {
                    label[v] = clusters;
                    stack.push_back(v);
                }
        }
        ++clusters;
    }
    // Border points; neighbor lists are sorted by media_id order.
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) continue;
        for (auto v : neighbors[i])
            if (core[v]) {
                label[i] = label[v];
                break;
            }
    }

    std::vector<Cluster> out(clusters);
    std::vector<std::array<double, 2>> sums(clusters, {0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] == kNone) continue;
        out[label[i]].members.push_back(pts[i].media_id);
        sums[label[i]][0] += pts[i].point.lat;
        sums[label[i]][1] += pts[i].point.lon;
    }
    for (std::size_t c = 0; c < clusters; ++c) {
        auto k = static_cast<double>(out[c].members.size());
        out[c].centroid = {sums[c][0] / k, sums[c][1] / k};
    }
    // Clusters are discovered in order of their smallest core id, but a border
    // point can carry a smaller id; order by the smallest member.
    std::sort(out.begin(), out.end(), [](const Cluster& a, const Cluster& b) { return a.members.front() < b.members.front(); });
    return out;
}

class Geocoder {
public:
    virtual ~Geocoder() = default;
    virtual std::optional<VenueCategory> lookup(GeoPoint p) const = 0;
};

/// Rules {lat, lon, radius, category}; the first rule whose disk contains the
/// point wins.
class StubGeocoder final : public Geocoder {
public:
    struct Rule {
        GeoPoint center;
        double radius;
        VenueCategory category;
    };

    void add(Rule rule) { rules_.push_back(rule); }

    static StubGeocoder from_jsonl(std::istream& in) {
        StubGeocoder g;
        std::string line;
        std::size_t number = 0;
        while (std::getline(in, line)) {
            ++number;
            if (trim(line).empty()) continue;
            try {
                auto j = nlohmann::json::parse(line);
                g.add({{j.at("lat").get<double>(), j.at("lon").get<double>()},
                       j.at("radius").get<double>(),
                       parse_venue(j.at("category").get<std::string>())});
            } catch (const std::exception& e) {
                throw ParseError("geocoder fixture line " + std::to_string(number) + ": " + e.what());
            }
        }
        return g;
    }

    std::optional<VenueCategory> lookup(GeoPoint p) const override {
        for (const auto& r : rules_)
            if (haversine(r.center, p) <= r.radius) return r.category;
        return std::nullopt;
    }

private:
    std::vector<Rule> rules_;
};

struct VenueReport {
    std::map<VenueCategory, std::uint64_t> counts;
    std::uint64_t clusters = 0;
    std::uint64_t misses = 0;

    double share(VenueCategory c) const {
        auto it = counts.find(c);
        return clusters == 0 || it == counts.end() ? 0.0
                                                   : static_cast<double>(it->second) / static_cast<double>(clusters);
    }

    nlohmann::json to_json() const {
        nlohmann::json shares = nlohmann::json::object();
        nlohmann::json cnt = nlohmann::json::object();
        if (clusters > 0)
            for (auto c : kVenueCategories) {
                shares[std::string(to_string(c))] = share(c);
                cnt[std::string(to_string(c))] = counts.contains(c) ? counts.at(c) : 0;
            }
        return {{"clusters", clusters}, {"misses", misses}, {"counts", cnt}, {"shares", shares}};
    }
};

/// Labels each cluster via the geocoder at its centroid; misses become other.
inline VenueReport categorize_venues(std::span<Cluster> clusters, const Geocoder& geocoder) {
    VenueReport r;
    for (auto& c : clusters) {
        auto found = geocoder.lookup(c.centroid);
        if (!found) ++r.misses;
        c.venue_category = found.value_or(VenueCategory::other);
        ++r.counts[*c.venue_category];
        ++r.clusters;
    }
    return r;
}

/// GeoJSON FeatureCollection with one Point feature per cluster centroid.
inline nlohmann::json clusters_geojson(std::span<const Cluster> clusters) {
    auto features = nlohmann::json::array();
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        const auto& c = clusters[i];
        features.push_back(
            {{"type", "Feature"},
             {"geometry", {{"type", "Point"}, {"coordinates", {c.centroid.lon, c.centroid.lat}}}},
             {"properties",
              {{"cluster", i},
               {"size", c.members.size()},
               {"venue_category", c.venue_category ? nlohmann::json(to_string(*c.venue_category)) : nlohmann::json()}}}});
    }
    return {{"type", "FeatureCollection"}, {"features", features}};
}

}  // namespace tagmine
