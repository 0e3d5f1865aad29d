#pragma once

// Per-user age and gender from face observations, and cohort distributions.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "tagmine/corpus.hpp"
#include "tagmine/errors.hpp"
#include "tagmine/temporal.hpp"

namespace tagmine {

enum class Gender { female, male, undetermined };

inline std::string_view to_string(Gender g) {
    switch (g) {
        case Gender::female: return "female";
        case Gender::male: return "male";
        default: return "undetermined";
    }
}

inline Gender parse_gender(std::string_view s) {
    if (s == "female" || s == "f") return Gender::female;
    if (s == "male" || s == "m") return Gender::male;
    throw ParseError("unknown gender: \"" + std::string(s) + "\"");
}

struct FaceRect {
    std::int64_t x = 0;
    std::int64_t y = 0;
    std::int64_t width = 0;
    std::int64_t height = 0;

    std::int64_t area() const { return width * height; }
    friend bool operator==(const FaceRect&, const FaceRect&) = default;
};

struct FaceObservation {
    std::string media_id;
    FaceRect rect;
    double age_estimate = 0.0;
    Gender gender = Gender::female;
    double provider_sigma = 5.0;

    friend bool operator==(const FaceObservation&, const FaceObservation&) = default;
};

enum class AgeBracket { under15, from15to20, from20to30, from30to40, over40 };

inline constexpr std::array<AgeBracket, 5> kAgeBrackets = {AgeBracket::under15, AgeBracket::from15to20,
                                                          AgeBracket::from20to30, AgeBracket::from30to40,
                                                          AgeBracket::over40};

inline std::string_view to_string(AgeBracket b) {
    switch (b) {
        case AgeBracket::under15: return "<15";
        case AgeBracket::from15to20: return "15-20";
        case AgeBracket::from20to30: return "20-30";
        case AgeBracket::from30to40: return "30-40";
        default: return ">40";
    }
}

inline AgeBracket parse_bracket(std::string_view s) {
    for (auto b : kAgeBrackets)
        if (to_string(b) == s) return b;
    throw ParseError("unknown age bracket: \"" + std::string(s) + "\"");
}

/// Brackets are left-closed: 20.0 falls in 20-30.
inline AgeBracket bracket_of(double age) {
    if (age < 15.0) return AgeBracket::under15;
    if (age < 20.0) return AgeBracket::from15to20;
    if (age < 30.0) return AgeBracket::from20to30;
    if (age < 40.0) return AgeBracket::from30to40;
    return AgeBracket::over40;
}

struct UserDemographics {
    std::string user_id;
    std::size_t n_faces = 0;
    double mean_age = 0.0;
    double age_stderr = 0.0;
    Gender gender = Gender::undetermined;
    AgeBracket bracket = AgeBracket::under15;

    nlohmann::json to_json() const {
        return {{"user_id", user_id},         {"n_faces", n_faces},          {"mean_age", mean_age},
                {"age_stderr", age_stderr},   {"gender", to_string(gender)}, {"bracket", to_string(bracket)}};
    }
};

class FaceAttributeProvider {
public:
    virtual ~FaceAttributeProvider() = default;
    /// Zero or more faces for a media reference. Must be deterministic.
    virtual std::vector<FaceObservation> detect(std::string_view media_ref) const = 0;
    virtual double sigma() const = 0;
};

/// Fixture-backed provider. Fixture lines:
///   {"media_ref": "...", "faces": [{"rect": [x, y, w, h], "age": 27.5, "gender": "female"}]}
class StubFaceProvider final : public FaceAttributeProvider {
public:
    explicit StubFaceProvider(double sigma = 5.0) : sigma_(sigma) {
        if (!(sigma > 0.0)) throw ConfigError("provider sigma must be positive");
    }

    static StubFaceProvider from_jsonl(std::istream& in, double sigma = 5.0) {
        StubFaceProvider p(sigma);
        std::string line;
        std::size_t number = 0;
        while (std::getline(in, line)) {
            ++number;
            if (trim(line).empty()) continue;
            try {
                auto j = nlohmann::json::parse(line);
                std::vector<FaceObservation> faces;
                for (const auto& f : j.at("faces")) {
                    FaceObservation o;
                    auto r = f.at("rect").get<std::vector<std::int64_t>>();
                    if (r.size() != 4) throw ParseError("rect needs 4 numbers");
                    o.rect = {r[0], r[1], r[2], r[3]};
                    o.age_estimate = f.at("age").get<double>();
                    o.gender = parse_gender(f.at("gender").get<std::string>());
                    faces.push_back(o);
                }
                p.add(j.at("media_ref").get<std::string>(), std::move(faces));
            } catch (const std::exception& e) {
                throw ParseError("face fixture line " + std::to_string(number) + ": " + e.what());
            }
        }
        return p;
    }

    void add(std::string media_ref, std::vector<FaceObservation> faces) {
        for (auto& f : faces) {
            if (f.rect.width <= 0 || f.rect.height <= 0) throw ParseError("face rect must have positive size");
            if (f.age_estimate < 0.0) throw ParseError("face age must be nonnegative");
            f.provider_sigma = sigma_;
        }
        fixtures_[std::move(media_ref)] = std::move(faces);
    }

    std::vector<FaceObservation> detect(std::string_view media_ref) const override {
        auto it = fixtures_.find(std::string(media_ref));
        if (it == fixtures_.end()) return {};
        auto faces = it->second;
        for (auto& f : faces) f.media_id = std::string(media_ref);
        return faces;
    }

    double sigma() const override { return sigma_; }

private:
    double sigma_;
    std::unordered_map<std::string, std::vector<FaceObservation>> fixtures_;
};

class NoFaceError : public Error {
public:
    using Error::Error;
};

/// The largest face is taken as the photographer's. Ties: leftmost, then topmost.
inline const FaceObservation& primary_face(std::span<const FaceObservation> faces) {
    if (faces.empty()) throw NoFaceError("no face detected");
    return *std::min_element(faces.begin(), faces.end(), [](const FaceObservation& a, const FaceObservation& b) {
        if (a.rect.area() != b.rect.area()) return a.rect.area() > b.rect.area();
        if (a.rect.x != b.rect.x) return a.rect.x < b.rect.x;
        return a.rect.y < b.rect.y;
    });
}

/// Mean of primary-face ages over every face-bearing post; nullopt when no
/// post yields a face.
inline std::optional<UserDemographics> aggregate_user(std::string_view user_id, std::span<const Post> selfie_posts,
                                                      const FaceAttributeProvider& provider) {
    std::vector<double> ages;
    int female = 0;
    int male = 0;
    for (const auto& post : selfie_posts) {
        if (!post.media_ref) continue;
        auto faces = provider.detect(*post.media_ref);
        if (faces.empty()) continue;
        const auto& face = primary_face(faces);
        ages.push_back(face.age_estimate);
        (face.gender == Gender::female ? female : male) += 1;
    }
    if (ages.empty()) return std::nullopt;

    // Sorted summation keeps the mean independent of post order.
    std::sort(ages.begin(), ages.end());
    double sum = 0.0;
    for (double a : ages) sum += a;

    UserDemographics d;
    d.user_id = std::string(user_id);
    d.n_faces = ages.size();
    d.mean_age = sum / static_cast<double>(ages.size());
    d.age_stderr = provider.sigma() / std::sqrt(static_cast<double>(ages.size()));
    d.gender = female > male ? Gender::female : male > female ? Gender::male : Gender::undetermined;
    d.bracket = bracket_of(d.mean_age);
    return d;
}

struct CohortReport {
    std::uint64_t users = 0;
    std::uint64_t excluded_no_faces = 0;
    std::map<Gender, std::uint64_t> gender_counts{
        {Gender::female, 0}, {Gender::male, 0}, {Gender::undetermined, 0}};
    std::map<int, std::uint64_t> age_years;  // floor(mean_age) -> users
    std::map<AgeBracket, std::uint64_t> bracket_counts;
    std::map<AgeBracket, std::array<std::uint64_t, 24>> bracket_hours;
    std::array<std::uint64_t, 24> hours{};  // same posts, unstacked

    CohortReport() {
        for (auto b : kAgeBrackets) {
            bracket_counts[b] = 0;
            bracket_hours[b] = {};
        }
    }

    double bracket_share(AgeBracket b) const {
        return users == 0 ? 0.0 : static_cast<double>(bracket_counts.at(b)) / static_cast<double>(users);
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["users"] = users;
        j["excluded_no_faces"] = excluded_no_faces;
        j["gender"] = {{"female", gender_counts.at(Gender::female)},
                       {"male", gender_counts.at(Gender::male)},
                       {"undetermined", gender_counts.at(Gender::undetermined)}};
        j["age_years"] = nlohmann::json::object();
        for (const auto& [age, n] : age_years) j["age_years"][std::to_string(age)] = n;
        j["brackets"] = nlohmann::json::object();
        j["bracket_hours"] = nlohmann::json::object();
        for (auto b : kAgeBrackets) {
            j["brackets"][std::string(to_string(b))] = bracket_counts.at(b);
            j["bracket_hours"][std::string(to_string(b))] = bracket_hours.at(b);
        }
        j["hours"] = hours;
        return j;
    }
};

/// Gender and age tallies plus the bracket-stacked hour-of-day distribution
/// of the cohort's drug posts. Posts by users outside `users` are ignored.
/// Users with undetermined gender are tallied apart from female and male.
inline CohortReport cohort_report(std::span<const UserDemographics> users, std::span<const Post* const> drug_posts,
                                  std::uint64_t excluded_no_faces = 0) {
    CohortReport r;
    r.excluded_no_faces = excluded_no_faces;
    std::unordered_map<std::string, AgeBracket> bracket_by_user;
    for (const auto& u : users) {
        ++r.users;
        ++r.gender_counts[u.gender];
        ++r.age_years[static_cast<int>(std::floor(u.mean_age))];
        ++r.bracket_counts[u.bracket];
        bracket_by_user[u.user_id] = u.bracket;
    }
    for (const Post* p : drug_posts) {
        auto it = bracket_by_user.find(p->user_id);
        if (it == bracket_by_user.end()) continue;
        auto h = static_cast<std::size_t>(hour_of_day(p->created_at));
        ++r.bracket_hours[it->second][h];
        ++r.hours[h];
    }
    return r;
}

}  // namespace tagmine
