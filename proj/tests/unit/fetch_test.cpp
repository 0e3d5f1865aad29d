#include <gtest/gtest.h>

#include <fstream>

#include "helpers.hpp"
#include "tagmine/fetch.hpp"

using namespace tagmine;
using namespace std::chrono_literals;
using testing_util::post;

namespace {

std::vector<std::vector<Post>> pages(int n, int per_page) {
    std::vector<std::vector<Post>> out;
    int id = 0;
    for (int p = 0; p < n; ++p) {
        out.emplace_back();
        for (int k = 0; k < per_page; ++k, ++id) out.back().push_back(post("m" + std::to_string(id), "u", {"kush"}));
    }
    return out;
}

/// Throws SourceError for the first `failures` calls.
class FlakyAdapter final : public SourceAdapter {
public:
    FlakyAdapter(SourceAdapter& inner, int failures) : inner_(inner), failures_(failures) {}
    SourcePage fetch(const std::optional<std::string>& cursor) override {
        if (failures_-- > 0) throw SourceError("transient");
        return inner_.fetch(cursor);
    }

private:
    SourceAdapter& inner_;
    int failures_;
};

class LoopingAdapter final : public SourceAdapter {
public:
    SourcePage fetch(const std::optional<std::string>&) override { return {{}, std::string("same")}; }
};

/// Largest number of requests inside any half-open one-hour window.
std::size_t max_per_rolling_hour(const std::vector<Clock::time_point>& times) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        std::size_t n = 0;
        for (std::size_t j = i; j < times.size() && times[j] < times[i] + 1h; ++j) ++n;
        best = std::max(best, n);
    }
    return best;
}

}  // namespace

TEST(FetchAll, DrainsPagesInOrder) {
    VectorSourceAdapter adapter(pages(3, 2));
    SimulatedClock clock;
    std::vector<std::string> ids;
    auto r = fetch_all(adapter, 100, clock, [&](Post&& p) { ids.push_back(p.media_id); });
    EXPECT_EQ(ids, (std::vector<std::string>{"m0", "m1", "m2", "m3", "m4", "m5"}));
    EXPECT_EQ(r.pages, 3u);
    EXPECT_EQ(r.requests, 3u);
}

TEST(FetchAll, BudgetOfTwoNeedsThreeHourWindows) {
    VectorSourceAdapter adapter(pages(5, 1));
    SimulatedClock clock;
    std::size_t n = 0;
    auto r = fetch_all(adapter, 2, clock, [&](Post&&) { ++n; });
    EXPECT_EQ(n, 5u);
    ASSERT_EQ(r.request_times.size(), 5u);
    // Requests 1-2 in hour 0, 3-4 in hour 1, 5 in hour 2.
    EXPECT_GE(r.request_times.back() - r.request_times.front(), 2h);
    EXPECT_LE(max_per_rolling_hour(r.request_times), 2u);
}

TEST(FetchAll, RetriesThenSucceeds) {
    VectorSourceAdapter inner(pages(2, 1));
    FlakyAdapter adapter(inner, 2);
    SimulatedClock clock;
    std::size_t n = 0;
    auto r = fetch_all(adapter, 100, clock, [&](Post&&) { ++n; });
    EXPECT_EQ(n, 2u);
    EXPECT_EQ(r.retries, 2u);
    EXPECT_EQ(r.requests, 4u);
    // Backoff 1 s then 2 s before the successful attempt.
    EXPECT_EQ(r.request_times[2] - r.request_times[0], 3s);
}

TEST(FetchAll, RetryCapSurfacesError) {
    VectorSourceAdapter inner(pages(1, 1));
    FlakyAdapter adapter(inner, 100);
    SimulatedClock clock;
    RetryPolicy policy;
    policy.max_retries = 3;
    EXPECT_THROW(fetch_all(adapter, 100, clock, [](Post&&) {}, policy), SourceError);
}

TEST(FetchAll, RepeatedCursorIsIntegrityError) {
    LoopingAdapter adapter;
    SimulatedClock clock;
    EXPECT_THROW(fetch_all(adapter, 100, clock, [](Post&&) {}), IntegrityError);
}

TEST(FetchAll, BadBudget) {
    VectorSourceAdapter adapter(pages(1, 1));
    SimulatedClock clock;
    EXPECT_THROW(fetch_all(adapter, 0, clock, [](Post&&) {}), ConfigError);
}

// Property: for assorted budgets, page counts and failure patterns, no rolling
// hour ever exceeds the budget, and retries count against it.
TEST(FetchAll, NeverExceedsBudgetInAnyRollingHour) {
    for (int budget : {1, 2, 3, 7}) {
        for (int n_pages : {1, 4, 9, 20}) {
            for (int failures : {0, 1, 3}) {
                VectorSourceAdapter inner(pages(n_pages, 1));
                FlakyAdapter adapter(inner, failures);
                SimulatedClock clock;
                clock.advance(123ms);
                auto r = fetch_all(adapter, budget, clock, [](Post&&) {});
                EXPECT_LE(max_per_rolling_hour(r.request_times), static_cast<std::size_t>(budget))
                    << budget << "/" << n_pages << "/" << failures;
                EXPECT_EQ(r.requests, static_cast<std::uint64_t>(n_pages + failures));
            }
        }
    }
}

TEST(JsonlFileAdapter, PagesAFile) {
    auto dir = testing_util::scratch_dir("fetch");
    {
        std::ofstream out(dir / "src.jsonl");
        for (int i = 0; i < 7; ++i) out << to_json(post("m" + std::to_string(i), "u", {"kush"})).dump() << '\n';
        out << "garbage\n";
    }
    JsonlFileAdapter adapter((dir / "src.jsonl").string(), 3);
    SimulatedClock clock;
    std::vector<std::string> ids;
    auto r = fetch_all(adapter, 10, clock, [&](Post&& p) { ids.push_back(p.media_id); });
    EXPECT_EQ(ids.size(), 7u);
    EXPECT_EQ(ids.front(), "m0");
    EXPECT_EQ(ids.back(), "m6");
    EXPECT_EQ(r.pages, 3u);
}
