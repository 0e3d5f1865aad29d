#pragma once

// Versioned dictionary of drug-related hashtags and its curation lifecycle.
//
// A Lexicon is an immutable value. Proposals and curation batches produce new
// values and append to an event history, so any version can be rebuilt by
// replaying that history over the version-1 seed.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tagmine/errors.hpp"
#include "tagmine/itemsets.hpp"
#include "tagmine/seed_data.hpp"
#include "tagmine/text.hpp"

namespace tagmine {

enum class Category { weed, syrup, pills, general };
enum class TermStatus { seed, pending, accepted, rejected, banned };
enum class Verdict { accept, reject, ban };

inline constexpr Category kDrugClasses[] = {Category::weed, Category::syrup, Category::pills};

inline std::string_view to_string(Category c) {
    switch (c) {
        case Category::weed: return "weed";
        case Category::syrup: return "syrup";
        case Category::pills: return "pills";
        default: return "general";
    }
}

inline Category parse_category(std::string_view s) {
    if (s == "weed") return Category::weed;
    if (s == "syrup") return Category::syrup;
    if (s == "pills") return Category::pills;
    if (s == "general") return Category::general;
    throw ParseError("unknown category: \"" + std::string(s) + "\"");
}

inline std::string_view to_string(TermStatus s) {
    switch (s) {
        case TermStatus::seed: return "seed";
        case TermStatus::pending: return "pending";
        case TermStatus::accepted: return "accepted";
        case TermStatus::rejected: return "rejected";
        default: return "banned";
    }
}

inline TermStatus parse_status(std::string_view s) {
    if (s == "seed") return TermStatus::seed;
    if (s == "pending") return TermStatus::pending;
    if (s == "accepted") return TermStatus::accepted;
    if (s == "rejected") return TermStatus::rejected;
    if (s == "banned") return TermStatus::banned;
    throw ParseError("unknown term status: \"" + std::string(s) + "\"");
}

inline std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::accept: return "accept";
        case Verdict::reject: return "reject";
        default: return "ban";
    }
}

inline Verdict parse_verdict(std::string_view s) {
    if (s == "accept") return Verdict::accept;
    if (s == "reject") return Verdict::reject;
    if (s == "ban") return Verdict::ban;
    throw ParseError("unknown verdict: \"" + std::string(s) + "\"");
}

struct Term {
    std::string text;
    Category category = Category::general;
    TermStatus status = TermStatus::seed;
    std::optional<double> support_at_proposal;
    int version_added = 1;

    /// Only seed and accepted terms take part in matching.
    bool active() const { return status == TermStatus::seed || status == TermStatus::accepted; }
    friend bool operator==(const Term&, const Term&) = default;
};

struct CurationDecision {
    std::string term_text;
    Verdict verdict = Verdict::reject;
    std::optional<Category> category;  // required for accept, forbidden otherwise
    std::int64_t decided_at = 0;
    std::string actor;

    friend bool operator==(const CurationDecision&, const CurationDecision&) = default;
};

struct ProposalEvent {
    Term term;
    std::string run_id;
    friend bool operator==(const ProposalEvent&, const ProposalEvent&) = default;
};

struct DecisionEvent {
    int batch_version = 0;  // lexicon version the batch produced
    CurationDecision decision;
    friend bool operator==(const DecisionEvent&, const DecisionEvent&) = default;
};

using LexiconEvent = std::variant<ProposalEvent, DecisionEvent>;

inline const std::set<std::string, std::less<>>& default_selfie_tags() {
    static const std::set<std::string, std::less<>> tags{"selfie", "weedselfie", "selfportrait", "selfy"};
    return tags;
}

class Lexicon;
Lexicon load_seed(std::string_view seed_document, std::string_view category_overlay);
Lexicon add_pending(const Lexicon& lexicon, std::span<const Term> candidates, std::string_view run_id);
Lexicon apply_decisions(std::span<const CurationDecision> decisions, const Lexicon& lexicon);

class Lexicon {
public:
    using TermMap = std::map<std::string, Term, std::less<>>;

    int version() const { return version_; }
    const TermMap& terms() const { return terms_; }
    std::span<const LexiconEvent> history() const { return history_; }

    const Term* find(std::string_view text) const {
        auto it = terms_.find(text);
        return it == terms_.end() ? nullptr : &it->second;
    }

    const std::set<std::string, std::less<>>& selfie_tags() const { return default_selfie_tags(); }
    bool is_selfie_tag(std::string_view tag) const { return selfie_tags().contains(tag); }

    std::size_t count(TermStatus status) const {
        return static_cast<std::size_t>(std::count_if(
            terms_.begin(), terms_.end(), [&](const auto& kv) { return kv.second.status == status; }));
    }

    std::vector<const Term*> with_status(TermStatus status) const {
        std::vector<const Term*> out;
        for (const auto& [text, term] : terms_)
            if (term.status == status) out.push_back(&term);
        return out;
    }

    /// Digest over version, terms, statuses and categories.
    std::string fingerprint() const {
        Fnv1a h;
        h.field(std::to_string(version_));
        for (const auto& [text, t] : terms_) {
            h.field(text).field(to_string(t.category)).field(to_string(t.status));
        }
        return h.hex();
    }

    friend bool operator==(const Lexicon&, const Lexicon&) = default;

private:
    int version_ = 1;
    TermMap terms_;
    std::vector<LexiconEvent> history_;

    friend Lexicon load_seed(std::string_view, std::string_view);
    friend Lexicon add_pending(const Lexicon&, std::span<const Term>, std::string_view);
    friend Lexicon apply_decisions(std::span<const CurationDecision>, const Lexicon&);
};

namespace detail {

template <typename Fn>
void for_each_content_line(std::string_view doc, Fn&& fn) {
    std::size_t number = 0;
    for (auto raw : split(doc, '\n')) {
        ++number;
        auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        fn(number, line);
    }
}

}  // namespace detail

/// Parses the seed dictionary (one term per line, '#' comment lines) and an
/// optional "term<TAB>category" overlay. Every seed term starts as general.
inline Lexicon load_seed(std::string_view seed_document, std::string_view category_overlay = {}) {
    Lexicon lex;
    detail::for_each_content_line(seed_document, [&](std::size_t number, std::string_view line) {
        std::string text = fold_text(line);
        if (!is_valid_term_text(text))
            throw ParseError("seed dictionary line " + std::to_string(number) + ": malformed term \"" +
                             std::string(line) + "\"");
        lex.terms_.try_emplace(text, Term{text, Category::general, TermStatus::seed, std::nullopt, 1});
    });
    if (lex.terms_.empty()) throw ParseError("seed dictionary is empty");

    detail::for_each_content_line(category_overlay, [&](std::size_t number, std::string_view line) {
        auto fields = split(line, '\t');
        auto where = "category overlay line " + std::to_string(number);
        if (fields.size() != 2) throw ParseError(where + ": expected term<TAB>category");
        std::string text = fold_text(trim(fields[0]));
        auto it = lex.terms_.find(text);
        if (it == lex.terms_.end()) throw ParseError(where + ": \"" + text + "\" is not a seed term");
        try {
            it->second.category = parse_category(trim(fields[1]));
        } catch (const ParseError& e) {
            throw ParseError(where + ": " + e.what());
        }
    });
    return lex;
}

/// The shipped seed dictionary with its category overlay.
inline Lexicon shipped_lexicon() { return load_seed(seed_data::dictionary, seed_data::category_overlay); }

/// Active terms equal (after case folding) to any supplied hashtag, sorted by text.
inline std::vector<const Term*> match_terms(std::span<const std::string> hashtags, const Lexicon& lexicon) {
    std::vector<const Term*> out;
    for (const auto& raw : hashtags) {
        std::string_view tag = raw;
        while (!tag.empty() && tag.front() == '#') tag.remove_prefix(1);
        const Term* term = lexicon.find(tag);
        if (!term) term = lexicon.find(fold_text(tag));
        if (term && term->active()) out.push_back(term);
    }
    std::sort(out.begin(), out.end(), [](const Term* a, const Term* b) { return a->text < b->text; });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Hashtags from itemsets at or above min_support that the lexicon does not
/// know under any status. Each becomes a pending term carrying the highest
/// support among the itemsets containing it. Sorted by support desc, text asc.
inline std::vector<Term> propose_candidates(std::span<const ItemSet> itemsets, double min_support,
                                            const Lexicon& lexicon) {
    if (!(min_support > 0.0 && min_support <= 1.0)) throw ConfigError("min_support must lie in (0, 1]");
    std::map<std::string, double> best;
    for (const auto& set : itemsets) {
        const double support = set.support();
        if (support < min_support) continue;
        for (const auto& item : set.items) {
            if (lexicon.find(item) || !is_valid_term_text(item)) continue;
            auto [it, inserted] = best.emplace(item, support);
            if (!inserted) it->second = std::max(it->second, support);
        }
    }
    std::vector<Term> out;
    for (const auto& [text, support] : best)
        out.push_back(Term{text, Category::general, TermStatus::pending, support, lexicon.version()});
    std::stable_sort(out.begin(), out.end(),
                     [](const Term& a, const Term& b) { return *a.support_at_proposal > *b.support_at_proposal; });
    return out;
}

/// Queues candidates as pending terms. Texts already present are skipped.
/// The version does not change.
inline Lexicon add_pending(const Lexicon& lexicon, std::span<const Term> candidates, std::string_view run_id = {}) {
    Lexicon next = lexicon;
    for (const auto& c : candidates) {
        if (next.terms_.contains(c.text)) continue;
        if (!is_valid_term_text(c.text)) throw CurationError("invalid candidate text \"" + c.text + "\"");
        Term t = c;
        t.status = TermStatus::pending;
        t.category = Category::general;
        next.terms_.emplace(t.text, t);
        next.history_.push_back(ProposalEvent{std::move(t), std::string(run_id)});
    }
    return next;
}

/// Applies a curation batch atomically: either every decision is valid and
/// the version advances by one, or CurationError is thrown and nothing changes.
inline Lexicon apply_decisions(std::span<const CurationDecision> decisions, const Lexicon& lexicon) {
    if (decisions.empty()) return lexicon;
    Lexicon next = lexicon;
    const int batch = lexicon.version_ + 1;
    for (const auto& d : decisions) {
        auto it = next.terms_.find(d.term_text);
        if (it == next.terms_.end()) throw CurationError("unknown term \"" + d.term_text + "\"");
        Term& term = it->second;
        if (term.status != TermStatus::pending)
            throw CurationError("term \"" + d.term_text + "\" is " + std::string(to_string(term.status)) +
                                ", not pending");
        switch (d.verdict) {
            case Verdict::accept:
                if (!d.category) throw CurationError("accepting \"" + d.term_text + "\" requires a category");
                term.status = TermStatus::accepted;
                term.category = *d.category;
                break;
            case Verdict::reject:
            case Verdict::ban:
                if (d.category)
                    throw CurationError(std::string(to_string(d.verdict)) + " of \"" + d.term_text +
                                        "\" may not carry a category");
                term.status = d.verdict == Verdict::reject ? TermStatus::rejected : TermStatus::banned;
                break;
        }
        next.history_.push_back(DecisionEvent{batch, d});
    }
    next.version_ = batch;
    return next;
}

/// Rebuilds a lexicon from a base (normally the version-1 seed) and an event
/// history. Consecutive decision events with the same batch form one batch.
inline Lexicon replay(const Lexicon& base, std::span<const LexiconEvent> events) {
    Lexicon lex = base;
    std::vector<CurationDecision> batch;
    int batch_version = 0;
    auto flush = [&] {
        if (batch.empty()) return;
        if (batch_version != lex.version() + 1)
            throw IntegrityError("decision log batch " + std::to_string(batch_version) + " does not follow version " +
                                 std::to_string(lex.version()));
        lex = apply_decisions(batch, lex);
        batch.clear();
    };
    for (const auto& ev : events) {
        if (const auto* p = std::get_if<ProposalEvent>(&ev)) {
            flush();
            Term t = p->term;
            lex = add_pending(lex, std::span<const Term>(&t, 1), p->run_id);
        } else {
            const auto& d = std::get<DecisionEvent>(ev);
            if (!batch.empty() && d.batch_version != batch_version) flush();
            batch_version = d.batch_version;
            batch.push_back(d.decision);
        }
    }
    flush();
    return lex;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json to_json(const Term& t) {
    nlohmann::json j = {{"text", t.text},
                        {"category", to_string(t.category)},
                        {"status", to_string(t.status)},
                        {"version_added", t.version_added}};
    j["support_at_proposal"] = t.support_at_proposal ? nlohmann::json(*t.support_at_proposal) : nlohmann::json();
    return j;
}

/// One line of the append-only lexicon history.
inline nlohmann::json to_json(const LexiconEvent& ev) {
    if (const auto* p = std::get_if<ProposalEvent>(&ev)) {
        return {{"kind", "proposal"},
                {"term", p->term.text},
                {"support", p->term.support_at_proposal ? nlohmann::json(*p->term.support_at_proposal)
                                                        : nlohmann::json()},
                {"version", p->term.version_added},
                {"run_id", p->run_id}};
    }
    const auto& d = std::get<DecisionEvent>(ev);
    return {{"kind", "decision"},
            {"batch", d.batch_version},
            {"term", d.decision.term_text},
            {"verdict", to_string(d.decision.verdict)},
            {"category", d.decision.category ? nlohmann::json(to_string(*d.decision.category)) : nlohmann::json()},
            {"timestamp", d.decision.decided_at},
            {"actor", d.decision.actor}};
}

inline LexiconEvent event_from_json(const nlohmann::json& j) {
    try {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "proposal") {
            Term t;
            t.text = j.at("term").get<std::string>();
            t.status = TermStatus::pending;
            if (!j.at("support").is_null()) t.support_at_proposal = j.at("support").get<double>();
            t.version_added = j.at("version").get<int>();
            return ProposalEvent{std::move(t), j.value("run_id", std::string{})};
        }
        if (kind == "decision") {
            CurationDecision d;
            d.term_text = j.at("term").get<std::string>();
            d.verdict = parse_verdict(j.at("verdict").get<std::string>());
            if (j.contains("category") && !j.at("category").is_null())
                d.category = parse_category(j.at("category").get<std::string>());
            d.decided_at = j.at("timestamp").get<std::int64_t>();
            d.actor = j.value("actor", std::string{});
            return DecisionEvent{j.at("batch").get<int>(), std::move(d)};
        }
        throw ParseError("unknown lexicon event kind \"" + kind + "\"");
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("lexicon event: ") + e.what());
    }
}

}  // namespace tagmine
