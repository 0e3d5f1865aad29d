#pragma once

// On-disk layout:
//   lexicon/seed.txt, lexicon/overlay.tsv   base dictionary (version 1)
//   lexicon/events.jsonl                    append-only proposals and decisions
//   requests.jsonl                          request_id -> stored response
//   runs.jsonl                              run ids in execution order
//   runs/<run_id>/                          run.json, bundle.json, reports/<kind>.json,
//                                           candidates.json, clusters.geojson,
//                                           classified.jsonl, itemsets.jsonl,
//                                           temporal_hour.csv, temporal_weekday.csv, config.json

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "tagmine/errors.hpp"
#include "tagmine/lexicon.hpp"
#include "tagmine/pipeline.hpp"
#include "tagmine/seed_data.hpp"

namespace tagmine {

namespace fs = std::filesystem;

/// Writes via a temporary file and rename, so readers never see a torn file.
inline void write_file_atomic(const fs::path& path, std::string_view bytes) {
    fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out.flush()) throw Error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline void append_line(const fs::path& path, std::string_view line) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw Error("cannot append to " + path.string());
    out << line << '\n';
    if (!out.flush()) throw Error("short write to " + path.string());
}

template <typename Fn>
void for_each_jsonl(const fs::path& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) return;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (trim(line).empty()) continue;
        try {
            fn(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw IntegrityError(path.string() + " line " + std::to_string(number) + ": " + e.what());
        }
    }
}

class Store {
public:
    explicit Store(fs::path root) : root_(std::move(root)) {
        fs::create_directories(root_ / "lexicon");
        fs::create_directories(root_ / "runs");
        if (!fs::exists(seed_path())) write_file_atomic(seed_path(), seed_data::dictionary);
        if (!fs::exists(overlay_path())) write_file_atomic(overlay_path(), seed_data::category_overlay);
    }

    const fs::path& root() const { return root_; }

    /// Base dictionary replayed through the event log.
    Lexicon load_lexicon() const {
        auto base = load_seed(read_file_bytes(seed_path()), read_file_bytes(overlay_path()));
        std::vector<LexiconEvent> events;
        for_each_jsonl(events_path(), [&](const nlohmann::json& j) { events.push_back(event_from_json(j)); });
        return replay(base, events);
    }

    /// Appends the events `next` holds beyond `previous`.
    void append_history(const Lexicon& previous, const Lexicon& next) {
        auto before = previous.history().size();
        auto all = next.history();
        if (all.size() < before) throw IntegrityError("lexicon history shrank");
        for (std::size_t i = before; i < all.size(); ++i) append_line(events_path(), to_json(all[i]).dump());
    }

    void save_run(const RunResult& r, const RunConfig& config) {
        const auto dir = run_dir(r.run.run_id);
        fs::create_directories(dir / "reports");
        for (const auto& [kind, report] : r.bundle.reports)
            write_file_atomic(dir / "reports" / (kind + ".json"), report.dump(2) + "\n");
        write_file_atomic(dir / "bundle.json", r.bundle.bytes());
        auto cards = nlohmann::json::array();
        for (const auto& c : r.candidates) cards.push_back(c.to_json());
        write_file_atomic(dir / "candidates.json", cards.dump(2) + "\n");
        auto geo = r.geojson;
        geo["run_id"] = r.run.run_id;
        geo["lexicon_version"] = r.run.lexicon_version_used;
        write_file_atomic(dir / "clusters.geojson", geo.dump(2) + "\n");
        std::string classified;
        for (const auto& a : r.classified) classified += a.to_json().dump() + "\n";
        write_file_atomic(dir / "classified.jsonl", classified);
        std::string itemsets;
        for (const auto& s : r.itemsets) itemsets += to_json(s).dump() + "\n";
        write_file_atomic(dir / "itemsets.jsonl", itemsets);
        if (r.bundle.reports.contains("temporal")) {
            const auto& t = r.bundle.reports.at("temporal");
            write_file_atomic(dir / "temporal_hour.csv", temporal_csv(t, "hour"));
            write_file_atomic(dir / "temporal_weekday.csv", temporal_csv(t, "weekday"));
        }
        write_file_atomic(dir / "config.json", config.to_json().dump(2) + "\n");
        // run.json last: its presence marks the run as persisted.
        write_file_atomic(dir / "run.json", r.run.to_json().dump(2) + "\n");
        append_line(root_ / "runs.jsonl", nlohmann::json{{"run_id", r.run.run_id}}.dump());
    }

    /// Run ids in first-execution order.
    std::vector<std::string> run_ids() const {
        std::vector<std::string> out;
        std::set<std::string> seen;
        for_each_jsonl(root_ / "runs.jsonl", [&](const nlohmann::json& j) {
            auto id = j.at("run_id").get<std::string>();
            if (seen.insert(id).second && fs::exists(run_dir(id) / "run.json")) out.push_back(id);
        });
        return out;
    }

    std::optional<Run> load_run(std::string_view run_id) const {
        auto j = read_json(run_dir(run_id) / "run.json");
        if (!j) return std::nullopt;
        return Run::from_json(*j);
    }

    std::optional<nlohmann::json> load_report(std::string_view run_id, std::string_view kind) const {
        if (!is_report_kind(kind)) return std::nullopt;
        return read_json(run_dir(run_id) / "reports" / (std::string(kind) + ".json"));
    }

    std::optional<nlohmann::json> load_geojson(std::string_view run_id) const {
        return read_json(run_dir(run_id) / "clusters.geojson");
    }

    std::optional<nlohmann::json> load_candidates(std::string_view run_id) const {
        return read_json(run_dir(run_id) / "candidates.json");
    }

    std::optional<std::string> load_bundle_bytes(std::string_view run_id) const {
        auto p = run_dir(run_id) / "bundle.json";
        if (!fs::exists(p)) return std::nullopt;
        return read_file_bytes(p);
    }

    /// Every stored request: {request_id, status, body}.
    std::vector<nlohmann::json> load_requests() const {
        std::vector<nlohmann::json> out;
        for_each_jsonl(root_ / "requests.jsonl", [&](const nlohmann::json& j) { out.push_back(j); });
        return out;
    }

    void remember_request(std::string_view request_id, int status, const nlohmann::json& body) {
        append_line(root_ / "requests.jsonl",
                    nlohmann::json{{"request_id", request_id}, {"status", status}, {"body", body}}.dump());
    }

private:
    fs::path root_;

    fs::path seed_path() const { return root_ / "lexicon" / "seed.txt"; }
    fs::path overlay_path() const { return root_ / "lexicon" / "overlay.tsv"; }
    fs::path events_path() const { return root_ / "lexicon" / "events.jsonl"; }

    fs::path run_dir(std::string_view run_id) const {
        // Run ids come from clients; keep them inside runs/.
        for (char c : run_id)
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) return root_ / "runs" / "_invalid_";
        if (run_id.empty()) return root_ / "runs" / "_invalid_";
        return root_ / "runs" / std::string(run_id);
    }

    static std::optional<nlohmann::json> read_json(const fs::path& p) {
        if (!fs::exists(p)) return std::nullopt;
        try {
            return nlohmann::json::parse(read_file_bytes(p));
        } catch (const nlohmann::json::exception& e) {
            throw IntegrityError(p.string() + ": " + e.what());
        }
    }
};

}  // namespace tagmine
