#pragma once

// Level-wise Apriori over dictionary-compressed, bitset-encoded transactions,
// an exhaustive enumerator used as a test oracle, and association rules.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tagmine/corpus.hpp"
#include "tagmine/errors.hpp"
#include "tagmine/text.hpp"

namespace tagmine {

struct Transaction {
    std::string id;
    std::vector<std::string> items;  // sorted, unique
};

inline Transaction make_transaction(std::string id, std::vector<std::string> items) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    return Transaction{std::move(id), std::move(items)};
}

/// Render a fraction with three decimals, e.g. 0.129.
inline std::string fraction_display(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", value);
    return buf;
}

/// A frequent itemset. Counts are authoritative; support() is derived.
struct ItemSet {
    std::vector<std::string> items;  // sorted, nonempty
    std::uint64_t count = 0;
    std::uint64_t total = 0;

    double support() const { return static_cast<double>(count) / static_cast<double>(total); }
    bool contains(std::string_view item) const {
        return std::binary_search(items.begin(), items.end(), item);
    }
    friend bool operator==(const ItemSet&, const ItemSet&) = default;
};

struct AssociationRule {
    std::vector<std::string> antecedent;
    std::vector<std::string> consequent;
    std::uint64_t union_count = 0;
    std::uint64_t antecedent_count = 0;
    std::uint64_t total = 0;

    double confidence() const {
        return static_cast<double>(union_count) / static_cast<double>(antecedent_count);
    }
    double support() const { return static_cast<double>(union_count) / static_cast<double>(total); }
    friend bool operator==(const AssociationRule&, const AssociationRule&) = default;
};

namespace detail {

inline void check_min_support(double min_support) {
    if (!(min_support > 0.0 && min_support <= 1.0))
        throw ConfigError("min_support must lie in (0, 1]");
}

// Smallest count c >= 1 with c / total >= min_support, evaluated with the same
// double division used when reporting support.
inline std::uint64_t min_count_for(double min_support, std::uint64_t total) {
    const double n = static_cast<double>(total);
    auto ok = [&](std::uint64_t c) { return static_cast<double>(c) / n >= min_support; };
    auto c = static_cast<std::uint64_t>(std::max(0.0, std::floor(min_support * n)));
    while (c > 0 && ok(c - 1)) --c;
    while (!ok(c)) ++c;
    return std::max<std::uint64_t>(c, 1);
}

inline void sort_itemsets(std::vector<ItemSet>& sets) {
    std::sort(sets.begin(), sets.end(), [](const ItemSet& a, const ItemSet& b) {
        if (a.count != b.count) return a.count > b.count;
        if (a.items.size() != b.items.size()) return a.items.size() < b.items.size();
        return a.items < b.items;
    });
}

using Bits = std::vector<std::uint64_t>;

inline std::uint64_t and_popcount(const Bits& a, const Bits& b, Bits* out) {
    std::uint64_t n = 0;
    if (out) out->resize(a.size());
    for (std::size_t w = 0; w < a.size(); ++w) {
        std::uint64_t v = a[w] & b[w];
        if (out) (*out)[w] = v;
        n += static_cast<std::uint64_t>(std::popcount(v));
    }
    return n;
}

struct LevelEntry {
    std::vector<std::uint32_t> items;
    std::uint64_t count;
    Bits bits;
};

}  // namespace detail

/// Frequent itemsets with support >= min_support and size <= max_k.
/// Output is sorted by support desc, size asc, then items lexicographically.
inline std::vector<ItemSet> apriori(std::span<const Transaction> transactions, double min_support,
                                    std::optional<std::size_t> max_k = std::nullopt) {
    detail::check_min_support(min_support);
    if (transactions.empty() || (max_k && *max_k == 0)) return {};

    const std::uint64_t total = transactions.size();
    const std::uint64_t min_count = detail::min_count_for(min_support, total);

    // Dictionary: ids follow lexicographic order of item names, so id-vector
    // order equals name-vector order.
    std::vector<std::string> names;
    for (const auto& t : transactions) names.insert(names.end(), t.items.begin(), t.items.end());
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());

    const std::size_t words = (transactions.size() + 63) / 64;
    std::vector<detail::Bits> item_bits(names.size(), detail::Bits(words, 0));
    for (std::size_t row = 0; row < transactions.size(); ++row) {
        for (const auto& item : transactions[row].items) {
            auto id = static_cast<std::size_t>(
                std::lower_bound(names.begin(), names.end(), item) - names.begin());
            item_bits[id][row / 64] |= std::uint64_t{1} << (row % 64);
        }
    }

    std::vector<ItemSet> result;
    auto emit = [&](const detail::LevelEntry& e) {
        ItemSet s;
        s.items.reserve(e.items.size());
        for (auto id : e.items) s.items.push_back(names[id]);
        s.count = e.count;
        s.total = total;
        result.push_back(std::move(s));
    };

    std::vector<detail::LevelEntry> level;
    for (std::uint32_t id = 0; id < names.size(); ++id) {
        std::uint64_t c = 0;
        for (auto w : item_bits[id]) c += static_cast<std::uint64_t>(std::popcount(w));
        if (c >= min_count) level.push_back({{id}, c, std::move(item_bits[id])});
    }
    for (const auto& e : level) emit(e);

    for (std::size_t k = 2; !level.empty() && (!max_k || k <= *max_k); ++k) {
        std::vector<detail::LevelEntry> next;
        auto frequent = [&](const std::vector<std::uint32_t>& items) {
            auto it = std::lower_bound(level.begin(), level.end(), items,
                                       [](const detail::LevelEntry& e, const std::vector<std::uint32_t>& v) {
                                           return e.items < v;
                                       });
            return it != level.end() && it->items == items;
        };
        std::vector<std::uint32_t> candidate(k);
        std::vector<std::uint32_t> subset(k - 1);
        for (std::size_t i = 0; i < level.size(); ++i) {
            const auto& a = level[i];
            for (std::size_t j = i + 1; j < level.size(); ++j) {
                const auto& b = level[j];
                if (!std::equal(a.items.begin(), a.items.end() - 1, b.items.begin())) break;
                std::copy(a.items.begin(), a.items.end(), candidate.begin());
                candidate[k - 1] = b.items.back();

                // Dropping either of the last two items yields a or b; check the rest.
                bool all_frequent = true;
                for (std::size_t drop = 0; drop + 2 < k && all_frequent; ++drop) {
                    std::size_t w = 0;
                    for (std::size_t p = 0; p < k; ++p)
                        if (p != drop) subset[w++] = candidate[p];
                    all_frequent = frequent(subset);
                }
                if (!all_frequent) continue;

                detail::Bits bits;
                std::uint64_t c = detail::and_popcount(a.bits, b.bits, &bits);
                if (c >= min_count) next.push_back({candidate, c, std::move(bits)});
            }
        }
        for (const auto& e : next) emit(e);
        level = std::move(next);
    }

    detail::sort_itemsets(result);
    return result;
}

/// Exhaustive oracle: enumerates every nonempty subset of the item universe.
/// Counts come from a scan that credits each transaction to all of its subsets.
inline std::vector<ItemSet> brute_force_itemsets(std::span<const Transaction> transactions, double min_support,
                                                 std::size_t max_universe = 20) {
    detail::check_min_support(min_support);
    if (max_universe > 20) throw ConfigError("max_universe may not exceed 20");
    if (transactions.empty()) throw ConfigError("brute force needs at least one transaction");

    std::vector<std::string> names;
    for (const auto& t : transactions) names.insert(names.end(), t.items.begin(), t.items.end());
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    if (names.size() > max_universe)
        throw ConfigError("item universe of " + std::to_string(names.size()) + " exceeds " +
                          std::to_string(max_universe));

    const std::size_t universe = names.size();
    std::vector<std::uint32_t> counts(std::size_t{1} << universe, 0);
    for (const auto& t : transactions) {
        std::uint32_t mask = 0;
        for (const auto& item : t.items)
            mask |= 1u << (std::lower_bound(names.begin(), names.end(), item) - names.begin());
        for (std::uint32_t sub = mask; sub != 0; sub = (sub - 1) & mask) ++counts[sub];
    }

    const double n = static_cast<double>(transactions.size());
    std::vector<ItemSet> result;
    for (std::uint32_t mask = 1; mask < counts.size(); ++mask) {
        if (counts[mask] == 0 || static_cast<double>(counts[mask]) / n < min_support) continue;
        ItemSet s;
        for (std::size_t b = 0; b < universe; ++b)
            if (mask & (1u << b)) s.items.push_back(names[b]);
        s.count = counts[mask];
        s.total = transactions.size();
        result.push_back(std::move(s));
    }
    detail::sort_itemsets(result);
    return result;
}

/// All rules A => S\A over frequent sets S with confidence >= min_confidence.
/// The input must be closed under subsets, as Apriori output is.
inline std::vector<AssociationRule> rules(std::span<const ItemSet> itemsets, double min_confidence) {
    if (!(min_confidence > 0.0 && min_confidence <= 1.0))
        throw ConfigError("min_confidence must lie in (0, 1]");
    std::map<std::vector<std::string>, std::uint64_t> counts;
    for (const auto& s : itemsets) counts.emplace(s.items, s.count);

    std::vector<AssociationRule> out;
    for (const auto& s : itemsets) {
        const std::size_t k = s.items.size();
        if (k < 2) continue;
        if (k > 30) throw ConfigError("itemset too large for rule enumeration");
        const std::uint32_t full = (1u << k) - 1;
        for (std::uint32_t mask = 1; mask < full; ++mask) {
            AssociationRule r;
            for (std::size_t b = 0; b < k; ++b)
                (mask & (1u << b) ? r.antecedent : r.consequent).push_back(s.items[b]);
            auto it = counts.find(r.antecedent);
            if (it == counts.end())
                throw IntegrityError("itemsets are not subset-closed: missing antecedent of size " +
                                     std::to_string(r.antecedent.size()));
            r.union_count = s.count;
            r.antecedent_count = it->second;
            r.total = s.total;
            if (r.confidence() >= min_confidence) out.push_back(std::move(r));
        }
    }

    std::sort(out.begin(), out.end(), [](const AssociationRule& a, const AssociationRule& b) {
        // Exact confidence comparison by cross-multiplication.
        auto lhs = static_cast<unsigned __int128>(a.union_count) * b.antecedent_count;
        auto rhs = static_cast<unsigned __int128>(b.union_count) * a.antecedent_count;
        if (lhs != rhs) return lhs > rhs;
        if (a.union_count != b.union_count) return a.union_count > b.union_count;
        if (a.antecedent != b.antecedent) return a.antecedent < b.antecedent;
        return a.consequent < b.consequent;
    });
    return out;
}

/// One transaction per user: the accounts that user follows. Users following
/// nobody yield empty transactions, which still count toward the total.
inline std::vector<Transaction> followed_accounts_transactions(std::span<const std::string> user_ids,
                                                               std::span<const FollowEdge> edges) {
    std::map<std::string, std::vector<std::string>> follows;
    for (const auto& id : user_ids) follows[id];
    for (const auto& e : edges) {
        auto it = follows.find(e.follower);
        if (it != follows.end()) it->second.push_back(e.followed);
    }
    std::vector<Transaction> out;
    out.reserve(user_ids.size());
    for (const auto& id : user_ids) out.push_back(make_transaction(id, follows[id]));
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

/// CSV: one transaction per row, items separated by commas.
inline std::vector<Transaction> read_transactions_csv(std::istream& in) {
    std::vector<Transaction> out;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        std::vector<std::string> items;
        for (auto part : split(line, ',')) {
            auto item = trim(part);
            if (!item.empty()) items.emplace_back(item);
        }
        out.push_back(make_transaction("row-" + std::to_string(row), std::move(items)));
    }
    return out;
}

/// JSONL: {"id": ..., "items": [...]} per line.
inline std::vector<Transaction> read_transactions_jsonl(std::istream& in) {
    std::vector<Transaction> out;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        try {
            auto doc = nlohmann::json::parse(line);
            std::string id = doc.contains("id") ? doc.at("id").get<std::string>() : "row-" + std::to_string(row);
            out.push_back(make_transaction(std::move(id), doc.at("items").get<std::vector<std::string>>()));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("transactions line " + std::to_string(row) + ": " + e.what());
        }
    }
    return out;
}

inline nlohmann::json to_json(const ItemSet& s) {
    return {{"items", s.items},
            {"count", s.count},
            {"total", s.total},
            {"support", s.support()},
            {"support_fraction", std::to_string(s.count) + "/" + std::to_string(s.total)},
            {"support_display", fraction_display(s.support())}};
}

inline nlohmann::json to_json(const AssociationRule& r) {
    return {{"antecedent", r.antecedent},
            {"consequent", r.consequent},
            {"union_count", r.union_count},
            {"antecedent_count", r.antecedent_count},
            {"total", r.total},
            {"confidence", r.confidence()},
            {"confidence_fraction", std::to_string(r.union_count) + "/" + std::to_string(r.antecedent_count)},
            {"support", r.support()},
            {"confidence_display", fraction_display(r.confidence())}};
}

}  // namespace tagmine
