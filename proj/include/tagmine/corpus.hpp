#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "tagmine/errors.hpp"
#include "tagmine/text.hpp"

namespace tagmine {

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;

    bool valid() const { return lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0; }
    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct Post {
    std::string media_id;
    std::string user_id;
    std::string username;
    std::int64_t created_at = 0;  // Unix seconds, GMT
    std::vector<std::string> hashtags;
    std::string caption;
    std::optional<GeoPoint> geo;
    std::optional<std::string> media_ref;

    friend bool operator==(const Post&, const Post&) = default;
};

enum class Cohort { unlabeled, drug, nondrug };
enum class Role { unknown, user, dealer, page };

inline std::string_view to_string(Cohort c) {
    switch (c) {
        case Cohort::drug: return "drug";
        case Cohort::nondrug: return "nondrug";
        default: return "unlabeled";
    }
}

inline Cohort parse_cohort(std::string_view s) {
    if (s == "drug") return Cohort::drug;
    if (s == "nondrug") return Cohort::nondrug;
    if (s == "unlabeled" || s.empty()) return Cohort::unlabeled;
    throw ParseError("unknown cohort: " + std::string(s));
}

inline std::string_view to_string(Role r) {
    switch (r) {
        case Role::user: return "user";
        case Role::dealer: return "dealer";
        case Role::page: return "page";
        default: return "unknown";
    }
}

inline Role parse_role(std::string_view s) {
    if (s == "user") return Role::user;
    if (s == "dealer") return Role::dealer;
    if (s == "page") return Role::page;
    if (s == "unknown" || s.empty()) return Role::unknown;
    throw ParseError("unknown role: " + std::string(s));
}

struct UserRecord {
    std::string user_id;
    std::string username;
    std::vector<std::string> posts;  // media_ids
    Cohort cohort = Cohort::unlabeled;
    Role role = Role::unknown;

    friend bool operator==(const UserRecord&, const UserRecord&) = default;
};

/// follower -> followed
struct FollowEdge {
    std::string follower;
    std::string followed;

    friend bool operator==(const FollowEdge&, const FollowEdge&) = default;
};

/// Posts keyed by media_id, in insertion order. Duplicate ids are refused.
class Corpus {
public:
    bool add(Post post) {
        auto [it, inserted] = index_.emplace(post.media_id, posts_.size());
        if (!inserted) return false;
        posts_.push_back(std::move(post));
        return true;
    }

    std::span<const Post> posts() const { return posts_; }
    std::size_t size() const { return posts_.size(); }
    bool empty() const { return posts_.empty(); }

    const Post* find(std::string_view media_id) const {
        auto it = index_.find(std::string(media_id));
        return it == index_.end() ? nullptr : &posts_[it->second];
    }

    friend bool operator==(const Corpus& a, const Corpus& b) { return a.posts_ == b.posts_; }

private:
    std::vector<Post> posts_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct IngestReport {
    std::uint64_t read = 0;
    std::uint64_t kept = 0;
    std::uint64_t dup_dropped = 0;
    std::uint64_t malformed = 0;

    nlohmann::json to_json() const {
        return {{"read", read}, {"kept", kept}, {"dup_dropped", dup_dropped}, {"malformed", malformed}};
    }
};

struct IngestResult {
    Corpus corpus;
    IngestReport report;
};

// ---------------------------------------------------------------------------
// JSON mapping

inline nlohmann::json to_json(const Post& p) {
    nlohmann::json j = {{"media_id", p.media_id},   {"user_id", p.user_id}, {"username", p.username},
                        {"created_at", p.created_at}, {"hashtags", p.hashtags}, {"caption", p.caption}};
    if (p.geo) j["geo"] = {{"lat", p.geo->lat}, {"lon", p.geo->lon}};
    if (p.media_ref) j["media_ref"] = *p.media_ref;
    return j;
}

/// Parses and validates one post object. Hashtags are normalized.
inline Post post_from_json(const nlohmann::json& j) {
    try {
        Post p;
        p.media_id = j.at("media_id").get<std::string>();
        p.user_id = j.at("user_id").get<std::string>();
        p.username = j.value("username", std::string{});
        p.created_at = j.at("created_at").get<std::int64_t>();
        for (const auto& tag : j.at("hashtags")) p.hashtags.push_back(normalize_hashtag(tag.get<std::string>()));
        p.caption = j.value("caption", std::string{});
        if (j.contains("geo") && !j.at("geo").is_null())
            p.geo = GeoPoint{j.at("geo").at("lat").get<double>(), j.at("geo").at("lon").get<double>()};
        if (j.contains("media_ref") && !j.at("media_ref").is_null())
            p.media_ref = j.at("media_ref").get<std::string>();

        if (p.media_id.empty()) throw ParseError("empty media_id");
        if (p.user_id.empty()) throw ParseError("empty user_id");
        if (p.created_at <= 0) throw ParseError("created_at must be positive");
        if (p.geo && !p.geo->valid()) throw ParseError("geo out of range");
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(e.what());
    } catch (const InvalidHashtag& e) {
        throw ParseError(e.what());
    }
}

inline nlohmann::json to_json(const UserRecord& u) {
    return {{"user_id", u.user_id},
            {"username", u.username},
            {"posts", u.posts},
            {"cohort", to_string(u.cohort)},
            {"role", to_string(u.role)}};
}

// ---------------------------------------------------------------------------
// Ingestion

/// Reads JSON Lines. Duplicate media_ids keep the first occurrence; malformed
/// lines are counted and skipped. Blank lines are ignored.
inline IngestResult ingest(std::istream& in) {
    IngestResult result;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++result.report.read;
        Post post;
        try {
            post = post_from_json(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception&) {
            ++result.report.malformed;
            continue;
        } catch (const ParseError&) {
            ++result.report.malformed;
            continue;
        }
        if (result.corpus.add(std::move(post)))
            ++result.report.kept;
        else
            ++result.report.dup_dropped;
    }
    return result;
}

inline void write_corpus(std::ostream& out, std::span<const Post> posts) {
    for (const auto& p : posts) out << to_json(p).dump() << '\n';
}

inline void write_corpus(std::ostream& out, const Corpus& corpus) { write_corpus(out, corpus.posts()); }

}  // namespace tagmine
