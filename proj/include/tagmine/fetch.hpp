#pragma once

// Paged fetching behind a source-adapter contract with an hourly request budget.

#include <algorithm>
#include <chrono>
#include <deque>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "tagmine/corpus.hpp"
#include "tagmine/errors.hpp"

namespace tagmine {

struct SourcePage {
    std::vector<Post> posts;
    std::optional<std::string> next_cursor;
};

/// Cursor in, page out. An absent cursor requests the first page; a page with
/// no next_cursor ends the chain. Transient failures throw SourceError.
class SourceAdapter {
public:
    virtual ~SourceAdapter() = default;
    virtual SourcePage fetch(const std::optional<std::string>& cursor) = 0;
};

class Clock {
public:
    using duration = std::chrono::milliseconds;
    using time_point = std::chrono::time_point<std::chrono::steady_clock, duration>;

    virtual ~Clock() = default;
    virtual time_point now() = 0;
    virtual void sleep_until(time_point t) = 0;
};

class SteadyClock final : public Clock {
public:
    time_point now() override { return std::chrono::time_point_cast<duration>(std::chrono::steady_clock::now()); }
    void sleep_until(time_point t) override { std::this_thread::sleep_until(t); }
};

/// Controllable clock for tests: sleeping advances time instantly.
class SimulatedClock final : public Clock {
public:
    time_point now() override { return now_; }
    void sleep_until(time_point t) override { now_ = std::max(now_, t); }
    void advance(duration d) { now_ += d; }

private:
    time_point now_{};
};

/// Token bucket holding `per_hour` tokens. A spent token returns to the bucket
/// exactly one hour after it was spent, so no rolling hour ever sees more than
/// `per_hour` acquisitions.
class HourlyBudget {
public:
    HourlyBudget(int per_hour, Clock& clock) : capacity_(per_hour), clock_(clock) {
        if (per_hour <= 0) throw ConfigError("request budget must be positive");
    }

    void acquire() {
        auto now = clock_.now();
        release_expired(now);
        if (static_cast<int>(spent_.size()) >= capacity_) {
            clock_.sleep_until(spent_.front() + std::chrono::hours(1));
            now = clock_.now();
            release_expired(now);
        }
        spent_.push_back(now);
    }

    int available() {
        release_expired(clock_.now());
        return capacity_ - static_cast<int>(spent_.size());
    }

private:
    void release_expired(Clock::time_point now) {
        while (!spent_.empty() && spent_.front() + std::chrono::hours(1) <= now) spent_.pop_front();
    }

    int capacity_;
    Clock& clock_;
    std::deque<Clock::time_point> spent_;
};

struct RetryPolicy {
    int max_retries = 5;
    Clock::duration base_delay = std::chrono::seconds(1);
    double multiplier = 2.0;
    Clock::duration max_delay = std::chrono::minutes(5);
};

struct FetchReport {
    std::uint64_t pages = 0;
    std::uint64_t posts = 0;
    std::uint64_t requests = 0;
    std::uint64_t retries = 0;
    std::vector<Clock::time_point> request_times;

    nlohmann::json to_json() const {
        return {{"pages", pages}, {"posts", posts}, {"requests", requests}, {"retries", retries}};
    }
};

/// Drains the adapter's cursor chain, passing posts to `sink` in page order.
/// Each attempt, including retries, spends one budget token. SourceError is
/// retried with exponential backoff up to policy.max_retries, then rethrown.
inline FetchReport fetch_all(SourceAdapter& adapter, int budget_per_hour, Clock& clock,
                             const std::function<void(Post&&)>& sink, const RetryPolicy& policy = {}) {
    HourlyBudget budget(budget_per_hour, clock);
    FetchReport report;
    std::optional<std::string> cursor;
    std::set<std::string> seen;
    while (true) {
        SourcePage page;
        for (int attempt = 0;; ++attempt) {
            budget.acquire();
            ++report.requests;
            report.request_times.push_back(clock.now());
            try {
                page = adapter.fetch(cursor);
                break;
            } catch (const SourceError&) {
                if (attempt >= policy.max_retries) throw;
                ++report.retries;
                double scale = 1.0;
                for (int i = 0; i < attempt; ++i) scale *= policy.multiplier;
                auto delay = std::min(policy.max_delay,
                                      Clock::duration(static_cast<Clock::duration::rep>(
                                          static_cast<double>(policy.base_delay.count()) * scale)));
                clock.sleep_until(clock.now() + delay);
            }
        }
        ++report.pages;
        for (auto& post : page.posts) {
            ++report.posts;
            sink(std::move(post));
        }
        if (!page.next_cursor) break;
        if (!seen.insert(*page.next_cursor).second)
            throw IntegrityError("source repeated cursor \"" + *page.next_cursor + "\"");
        cursor = page.next_cursor;
    }
    return report;
}

/// Serves pre-built pages; the cursor is the page index.
class VectorSourceAdapter final : public SourceAdapter {
public:
    explicit VectorSourceAdapter(std::vector<std::vector<Post>> pages) : pages_(std::move(pages)) {}

    SourcePage fetch(const std::optional<std::string>& cursor) override {
        std::size_t index = cursor ? std::stoul(*cursor) : 0;
        SourcePage page;
        if (index < pages_.size()) page.posts = pages_[index];
        if (index + 1 < pages_.size()) page.next_cursor = std::to_string(index + 1);
        return page;
    }

private:
    std::vector<std::vector<Post>> pages_;
};

/// Pages a JSONL corpus file; the cursor is a line offset. Malformed lines are skipped.
class JsonlFileAdapter final : public SourceAdapter {
public:
    JsonlFileAdapter(std::string path, std::size_t page_size) : path_(std::move(path)), page_size_(page_size) {
        if (page_size_ == 0) throw ConfigError("page size must be positive");
    }

    SourcePage fetch(const std::optional<std::string>& cursor) override {
        std::ifstream in(path_);
        if (!in) throw SourceError("cannot open " + path_);
        std::size_t offset = cursor ? std::stoul(*cursor) : 0;
        std::string line;
        for (std::size_t i = 0; i < offset && std::getline(in, line); ++i) {
        }
        SourcePage page;
        std::size_t consumed = 0;
        while (consumed < page_size_ && std::getline(in, line)) {
            ++consumed;
            if (trim(line).empty()) continue;
            try {
                page.posts.push_back(post_from_json(nlohmann::json::parse(line)));
            } catch (const std::exception&) {
            }
        }
        if (consumed == page_size_ && in.peek() != std::char_traits<char>::eof())
            page.next_cursor = std::to_string(offset + consumed);
        return page;
    }

private:
    std::string path_;
    std::size_t page_size_;
};

}  // namespace tagmine
