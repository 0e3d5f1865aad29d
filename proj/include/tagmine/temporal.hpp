#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tagmine/classify.hpp"
#include "tagmine/corpus.hpp"
#include "tagmine/errors.hpp"
#include "tagmine/lexicon.hpp"

namespace tagmine {

enum class TimeMode { hour, weekday };

inline std::string_view to_string(TimeMode m) { return m == TimeMode::hour ? "hour" : "weekday"; }

inline std::size_t bin_count(TimeMode m) { return m == TimeMode::hour ? 24 : 7; }

inline int hour_of_day(std::int64_t unix_seconds) {
    auto s = unix_seconds % 86400;
    if (s < 0) s += 86400;
    return static_cast<int>(s / 3600);
}

/// Monday = 0. 1970-01-01 was a Thursday.
inline int day_of_week(std::int64_t unix_seconds) {
    auto days = unix_seconds / 86400;
    if (unix_seconds % 86400 < 0) --days;
    auto w = (days + 3) % 7;
    if (w < 0) w += 7;
    return static_cast<int>(w);
}

inline int time_bin(std::int64_t unix_seconds, TimeMode mode) {
    return mode == TimeMode::hour ? hour_of_day(unix_seconds) : day_of_week(unix_seconds);
}

struct TimeHistogram {
    TimeMode mode = TimeMode::hour;
    std::vector<std::uint64_t> bins = std::vector<std::uint64_t>(24, 0);
    std::optional<Category> class_filter;
    std::uint64_t total = 0;

    explicit TimeHistogram(TimeMode m = TimeMode::hour) : mode(m), bins(bin_count(m), 0) {}

    void add(std::int64_t unix_seconds) {
        ++bins[static_cast<std::size_t>(time_bin(unix_seconds, mode))];
        ++total;
    }

    nlohmann::json to_json() const {
        return {{"mode", to_string(mode)},
                {"bins", bins},
                {"class", class_filter ? nlohmann::json(to_string(*class_filter)) : nlohmann::json("all")},
                {"total", total}};
    }
};

inline TimeHistogram histogram_of_times(std::span<const std::int64_t> timestamps, TimeMode mode) {
    TimeHistogram h(mode);
    for (auto t : timestamps) h.add(t);
    return h;
}

/// Bins drug-positive posts by GMT hour or weekday. With a class filter only
/// posts attributed to that class count; multi-class posts count once per class.
template <typename PostRange>
TimeHistogram histogram(const PostRange& posts, TimeMode mode, std::optional<Category> class_filter,
                        const Lexicon& lexicon, const ClassificationConfig& config = {}) {
    TimeHistogram h(mode);
    h.class_filter = class_filter;
    for (const auto& item : posts) {
        const Post& post = [&]() -> const Post& {
            if constexpr (std::is_pointer_v<std::decay_t<decltype(item)>>)
                return *item;
            else
                return item;
        }();
        if (class_filter && !attribute_classes(post, lexicon, config).classes.contains(*class_filter)) continue;
        h.add(post.created_at);
    }
    return h;
}

/// Circular local maxima whose topographic prominence exceeds
/// min_prominence * total. Plateaus count once, at their smallest bin index.
/// Sorted by height desc, then index asc.
inline std::vector<int> detect_peaks(const TimeHistogram& hist, double min_prominence = 0.02) {
    const auto& h = hist.bins;
    const std::size_t n = h.size();
    if (hist.total == 0 || n == 0) return {};

    std::size_t start = 0;
    while (start < n && h[start] == h[(start + n - 1) % n]) ++start;
    if (start == n) return {};  // flat

    struct Run {
        std::size_t first;  // smallest bin index covered
        std::uint64_t value;
    };
    std::vector<Run> runs;
    for (std::size_t i = 0; i < n;) {
        std::size_t pos = (start + i) % n;
        Run r{pos, h[pos]};
        std::size_t len = 1;
        while (i + len < n && h[(start + i + len) % n] == r.value) {
            r.first = std::min(r.first, (start + i + len) % n);
            ++len;
        }
        runs.push_back(r);
        i += len;
    }

    const std::size_t m = runs.size();
    const double threshold = min_prominence * static_cast<double>(hist.total);
    std::vector<Run> peaks;
    for (std::size_t r = 0; r < m; ++r) {
        const auto v = runs[r].value;
        if (!(v > runs[(r + m - 1) % m].value && v > runs[(r + 1) % m].value)) continue;
        auto side_min = [&](bool left) {
            std::uint64_t lowest = v;
            for (std::size_t k = 1; k < m; ++k) {
                const auto& other = runs[left ? (r + m - k) % m : (r + k) % m];
                if (other.value > v) break;
                lowest = std::min(lowest, other.value);
            }
            return lowest;
        };
        const auto base = std::max(side_min(true), side_min(false));
        if (static_cast<double>(v - base) > threshold) peaks.push_back(runs[r]);
    }
    std::sort(peaks.begin(), peaks.end(), [](const Run& a, const Run& b) {
        return a.value != b.value ? a.value > b.value : a.first < b.first;
    });
    std::vector<int> out;
    for (const auto& p : peaks) out.push_back(static_cast<int>(p.first));
    return out;
}

/// 24 hourly weights summing to one.
struct BaselineProfile {
    std::array<double, 24> weights{};

    static BaselineProfile uniform() {
        BaselineProfile b;
        b.weights.fill(1.0 / 24.0);
        return b;
    }

    static BaselineProfile from_weights(std::span<const double> w) {
        if (w.size() != 24) throw ConfigError("baseline profile needs 24 weights");
        BaselineProfile b;
        double sum = 0.0;
        for (std::size_t i = 0; i < 24; ++i) {
            if (!(w[i] >= 0.0)) throw ConfigError("baseline weights must be nonnegative");
            b.weights[i] = w[i];
            sum += w[i];
        }
        if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("baseline weights must sum to 1");
        return b;
    }

    static BaselineProfile from_json(const nlohmann::json& j) {
        try {
            return from_weights(j.get<std::vector<double>>());
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("baseline profile: ") + e.what());
        }
    }
};

/// Total-variation distance between two distributions of equal length.
inline double total_variation(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw ConfigError("distributions differ in length");
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
    return 0.5 * sum;
}

inline std::vector<double> normalized(const TimeHistogram& hist) {
    std::vector<double> p(hist.bins.size(), 0.0);
    if (hist.total == 0) return p;
    for (std::size_t i = 0; i < p.size(); ++i)
        p[i] = static_cast<double>(hist.bins[i]) / static_cast<double>(hist.total);
    return p;
}

/// TV distance in [0, 1] between the normalized hour histogram and the baseline.
inline double divergence_from_baseline(const TimeHistogram& hist, const BaselineProfile& baseline) {
    if (hist.mode != TimeMode::hour) throw ConfigError("divergence needs an hour-of-day histogram");
    if (hist.total == 0) throw ConfigError("divergence of an empty histogram is undefined");
    return std::clamp(total_variation(normalized(hist), baseline.weights), 0.0, 1.0);
}

}  // namespace tagmine
