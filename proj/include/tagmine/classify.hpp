#pragma once

// Hashtag decision rules: drug-post detection, class attribution, candidate
// users, the selfie filter and the non-drug cohort.

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tagmine/corpus.hpp"
#include "tagmine/lexicon.hpp"

namespace tagmine {

struct ClassificationConfig {
    int min_drug_tags = 2;
    int min_selfie_posts = 2;
    std::string nondrug_probe_tag = "instapic";

    void validate() const {
        if (min_drug_tags < 1) throw ConfigError("min_drug_tags must be >= 1");
        if (min_selfie_posts < 1) throw ConfigError("min_selfie_posts must be >= 1");
        if (!is_valid_term_text(nondrug_probe_tag)) throw ConfigError("nondrug_probe_tag is not a valid hashtag");
    }

    nlohmann::json to_json() const {
        return {{"min_drug_tags", min_drug_tags},
                {"min_selfie_posts", min_selfie_posts},
                {"nondrug_probe_tag", nondrug_probe_tag}};
    }

    static ClassificationConfig from_json(const nlohmann::json& j) {
        ClassificationConfig c;
        c.min_drug_tags = j.value("min_drug_tags", c.min_drug_tags);
        c.min_selfie_posts = j.value("min_selfie_posts", c.min_selfie_posts);
        c.nondrug_probe_tag = normalize_hashtag(j.value("nondrug_probe_tag", c.nondrug_probe_tag));
        c.validate();
        return c;
    }
};

/// Subset of the three drug classes.
class ClassSet {
public:
    void insert(Category c) {
        if (c != Category::general) bits_ |= bit(c);
    }
    bool contains(Category c) const { return c != Category::general && (bits_ & bit(c)); }
    bool empty() const { return bits_ == 0; }
    std::size_t size() const { return static_cast<std::size_t>(__builtin_popcount(bits_)); }

    std::vector<Category> list() const {
        std::vector<Category> out;
        for (auto c : kDrugClasses)
            if (contains(c)) out.push_back(c);
        return out;
    }
    nlohmann::json to_json() const {
        auto arr = nlohmann::json::array();
        for (auto c : list()) arr.push_back(to_string(c));
        return arr;
    }
    friend bool operator==(const ClassSet&, const ClassSet&) = default;

private:
    static unsigned bit(Category c) { return 1u << static_cast<unsigned>(c); }
    unsigned bits_ = 0;
};

struct DrugVerdict {
    bool positive = false;
    std::vector<const Term*> matched;
};

inline DrugVerdict is_drug_post(const Post& post, const Lexicon& lexicon, const ClassificationConfig& config = {}) {
    DrugVerdict v;
    v.matched = match_terms(post.hashtags, lexicon);
    v.positive = static_cast<int>(v.matched.size()) >= config.min_drug_tags;
    return v;
}

struct ClassAttribution {
    std::string media_id;
    ClassSet classes;
    std::vector<std::string> matched_terms;
    bool drug_positive = false;
    bool unattributed = false;  // drug-positive but no categorized term matched

    nlohmann::json to_json() const {
        return {{"media_id", media_id}, {"matched_terms", matched_terms}, {"classes", classes.to_json()}};
    }
};

/// Classes are the non-general categories among matched terms. Posts below the
/// drug threshold carry no classes.
inline ClassAttribution attribute_classes(const Post& post, const Lexicon& lexicon,
                                          const ClassificationConfig& config = {}) {
    ClassAttribution a;
    a.media_id = post.media_id;
    auto verdict = is_drug_post(post, lexicon, config);
    for (const Term* t : verdict.matched) a.matched_terms.push_back(t->text);
    a.drug_positive = verdict.positive;
    if (verdict.positive) {
        for (const Term* t : verdict.matched) a.classes.insert(t->category);
        a.unattributed = a.classes.empty();
    }
    return a;
}

inline bool is_selfie_post(const Post& post, const Lexicon& lexicon) {
    return std::any_of(post.hashtags.begin(), post.hashtags.end(),
                       [&](const std::string& t) { return lexicon.is_selfie_tag(t); });
}

namespace detail {

/// user_id -> indices of that user's posts, in corpus order.
inline std::map<std::string, std::vector<std::size_t>> posts_by_user(const Corpus& corpus) {
    std::map<std::string, std::vector<std::size_t>> out;
    auto posts = corpus.posts();
    for (std::size_t i = 0; i < posts.size(); ++i) out[posts[i].user_id].push_back(i);
    return out;
}

inline UserRecord make_user(const Corpus& corpus, const std::string& user_id, const std::vector<std::size_t>& idx,
                            Cohort cohort) {
    UserRecord u;
    u.user_id = user_id;
    u.username = corpus.posts()[idx.front()].username;
    for (auto i : idx) u.posts.push_back(corpus.posts()[i].media_id);
    u.cohort = cohort;
    return u;
}

}  // namespace detail

/// One record per user owning at least one drug-positive post, sorted by user_id.
inline std::vector<UserRecord> extract_candidate_users(const Corpus& corpus, const Lexicon& lexicon,
                                                       const ClassificationConfig& config = {}) {
    std::vector<UserRecord> out;
    for (const auto& [user_id, idx] : detail::posts_by_user(corpus)) {
        bool any = std::any_of(idx.begin(), idx.end(), [&](std::size_t i) {
            return is_drug_post(corpus.posts()[i], lexicon, config).positive;
        });
        if (any) out.push_back(detail::make_user(corpus, user_id, idx, Cohort::drug));
    }
    return out;
}

/// Keeps users with at least min_selfie_posts posts carrying a selfie tag.
inline std::vector<UserRecord> selfie_filter(std::span<const UserRecord> users, const Corpus& corpus,
                                             const Lexicon& lexicon, const ClassificationConfig& config = {}) {
    std::vector<UserRecord> out;
    for (const auto& u : users) {
        int selfies = 0;
        for (const auto& id : u.posts)
            if (const Post* p = corpus.find(id); p && is_selfie_post(*p, lexicon)) ++selfies;
        if (selfies >= config.min_selfie_posts) out.push_back(u);
    }
    return out;
}

/// Users who posted the probe tag and whose whole history matches no active
/// term at all. One match disqualifies, unlike the drug threshold.
inline std::vector<UserRecord> build_nondrug_cohort(const Corpus& corpus, const Lexicon& lexicon,
                                                    const ClassificationConfig& config = {}) {
    std::vector<UserRecord> out;
    for (const auto& [user_id, idx] : detail::posts_by_user(corpus)) {
        bool probed = false;
        bool clean = true;
        for (auto i : idx) {
            const Post& p = corpus.posts()[i];
            if (std::find(p.hashtags.begin(), p.hashtags.end(), config.nondrug_probe_tag) != p.hashtags.end())
                probed = true;
            if (!match_terms(p.hashtags, lexicon).empty()) {
                clean = false;
                break;
            }
        }
        if (probed && clean) out.push_back(detail::make_user(corpus, user_id, idx, Cohort::nondrug));
    }
    return out;
}

/// Per-post classification of a whole corpus, aligned with corpus.posts().
struct ClassifiedCorpus {
    std::vector<ClassAttribution> posts;
    std::uint64_t drug_posts = 0;
    std::uint64_t unattributed = 0;

    std::vector<const Post*> drug_positive(const Corpus& corpus) const {
        std::vector<const Post*> out;
        for (std::size_t i = 0; i < posts.size(); ++i)
            if (posts[i].drug_positive) out.push_back(&corpus.posts()[i]);
        return out;
    }
};

inline ClassifiedCorpus classify_corpus(const Corpus& corpus, const Lexicon& lexicon,
                                        const ClassificationConfig& config = {}) {
    ClassifiedCorpus out;
    out.posts.reserve(corpus.size());
    for (const auto& p : corpus.posts()) {
        out.posts.push_back(attribute_classes(p, lexicon, config));
        if (out.posts.back().drug_positive) ++out.drug_posts;
        if (out.posts.back().unattributed) ++out.unattributed;
    }
    return out;
}

}  // namespace tagmine
