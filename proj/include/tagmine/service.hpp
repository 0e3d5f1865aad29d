#pragma once

// Pipeline service: curation queue, serialized runs, report reads, and the
// HTTP binding used by the console and the CLI.

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "tagmine/errors.hpp"
#include "tagmine/lexicon.hpp"
#include "tagmine/pipeline.hpp"
#include "tagmine/store.hpp"

namespace tagmine {

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

/// Transport-free service core. Reads work from immutable lexicon snapshots;
/// decisions and runs are each single-writer.
class PipelineService {
public:
    explicit PipelineService(fs::path store_root) : store_(std::move(store_root)) {
        lexicon_ = std::make_shared<const Lexicon>(store_.load_lexicon());
        for (const auto& r : store_.load_requests())
            requests_[r.at("request_id").get<std::string>()] = {r.at("status").get<int>(), r.at("body")};
        auto ids = store_.run_ids();
        if (!ids.empty()) latest_run_ = ids.back();
    }

    std::shared_ptr<const Lexicon> lexicon() const {
        std::shared_lock lock(state_);
        return lexicon_;
    }

    Store& store() { return store_; }

    struct Snapshot {
        std::shared_ptr<const Lexicon> lex;
        std::optional<std::string> latest_run;
    };

    Snapshot snapshot() const {
        std::shared_lock lock(state_);
        return {lexicon_, latest_run_};
    }

    ApiResponse list_lexicon(std::optional<std::string_view> status) const {
        auto snap = snapshot();
        const auto& lex = snap.lex;
        std::optional<TermStatus> filter;
        try {
            if (status && !status->empty()) filter = parse_status(*status);
        } catch (const Error& e) {
            return error(400, e.what(), snap);
        }
        auto terms = nlohmann::json::array();
        for (const auto& [text, t] : lex->terms())
            if (!filter || t.status == *filter) terms.push_back(to_json(t));
        return {200, provenance({{"terms", terms}}, snap)};
    }

    /// Pending terms, support desc then text, each with its proposal context.
    ApiResponse candidates() const {
        auto snap = snapshot();
        const auto& lex = snap.lex;
        std::map<std::string, std::string> proposed_in;
        for (const auto& ev : lex->history())
            if (const auto* p = std::get_if<ProposalEvent>(&ev)) proposed_in[p->term.text] = p->run_id;
        auto pending = lex->with_status(TermStatus::pending);
        std::stable_sort(pending.begin(), pending.end(), [](const Term* a, const Term* b) {
            return a->support_at_proposal.value_or(0.0) > b->support_at_proposal.value_or(0.0);
        });
        std::map<std::string, nlohmann::json> card_cache;
        auto cards = nlohmann::json::array();
        for (const Term* t : pending) {
            const auto run_id = proposed_in[t->text];
            if (!card_cache.contains(run_id)) card_cache[run_id] = store_.load_candidates(run_id).value_or(nlohmann::json::array());
            nlohmann::json card{{"term", t->text},
                                {"support_at_proposal", t->support_at_proposal.value_or(0.0)},
                                {"co_occurring", nlohmann::json::array()},
                                {"samples", nlohmann::json::array()},
                                {"run_id", run_id}};
            for (const auto& c : card_cache[run_id])
                if (c.at("term") == t->text) {
                    card["co_occurring"] = c.at("co_occurring");
                    card["samples"] = c.at("samples");
                }
            cards.push_back(card);
        }
        return {200, provenance({{"candidates", cards}}, snap)};
    }

    /// Applies one decision as its own batch. A request_id already seen returns
    /// the stored response without touching the lexicon.
    ApiResponse decide(std::string_view raw_term, const nlohmann::json& body) {
        std::unique_lock lock(state_);
        const Lexicon& lex = *lexicon_;
        const Snapshot snap{lexicon_, latest_run_};
        std::string request_id;
        try {
            request_id = body.value("request_id", std::string{});
        } catch (const nlohmann::json::exception&) {
            return error(400, "request_id must be a string", snap);
        }
        if (request_id.empty()) return error(400, "request_id is required", snap);
        if (auto it = requests_.find("decision:" + request_id); it != requests_.end()) return it->second;

        CurationDecision d;
        try {
            d.term_text = normalize_hashtag(raw_term);
            d.verdict = parse_verdict(body.at("verdict").get<std::string>());
            if (body.contains("category") && !body.at("category").is_null())
                d.category = parse_category(body.at("category").get<std::string>());
            d.actor = body.value("actor", std::string("console"));
            if (body.contains("lexicon_version") && !body.at("lexicon_version").is_null() &&
                body.at("lexicon_version").get<int>() != lex.version())
                return error(409, "stale lexicon version", snap);
        } catch (const nlohmann::json::exception& e) {
            return error(400, std::string("bad decision body: ") + e.what(), snap);
        } catch (const Error& e) {
            return error(400, e.what(), snap);
        }
        d.decided_at = std::chrono::duration_cast<std::chrono::seconds>(
                           std::chrono::system_clock::now().time_since_epoch())
                           .count();
        Lexicon next;
        try {
            next = apply_decisions(std::span<const CurationDecision>(&d, 1), lex);
        } catch (const CurationError& e) {
            const bool known = lex.find(d.term_text) != nullptr;
            return error(known && lex.find(d.term_text)->status != TermStatus::pending ? 409 : known ? 400 : 404,
                         e.what(), snap);
        }
        store_.append_history(lex, next);
        lexicon_ = std::make_shared<const Lexicon>(std::move(next));
        std::string run_id;
        for (const auto& ev : lexicon_->history())
            if (const auto* p = std::get_if<ProposalEvent>(&ev); p && p->term.text == d.term_text) run_id = p->run_id;
        nlohmann::json out{{"term", to_json(*lexicon_->find(d.term_text))},
                           {"request_id", request_id},
                           {"lexicon_version", lexicon_->version()},
                           {"run_id", run_id.empty() ? nlohmann::json() : nlohmann::json(run_id)}};
        ApiResponse resp{200, out};
        remember("decision:" + request_id, resp);
        return resp;
    }

    /// Executes a run synchronously against the lexicon snapshot current at
    /// its start; proposals are queued afterwards.
    ApiResponse trigger_run(const nlohmann::json& body) {
        std::string request_id;
        std::string corpus_ref;
        nlohmann::json config_json = nlohmann::json::object();
        {
            auto snap = snapshot();
            try {
                request_id = body.at("request_id").get<std::string>();
                corpus_ref = body.at("corpus_ref").get<std::string>();
                if (body.contains("config") && !body.at("config").is_null()) config_json = body.at("config");
            } catch (const nlohmann::json::exception& e) {
                return error(400, std::string("bad run body: ") + e.what(), snap);
            }
            if (request_id.empty()) return error(400, "request_id is required", snap);
        }
        std::lock_guard run_lock(run_mutex_);
        {
            std::shared_lock lock(state_);
            if (auto it = requests_.find("run:" + request_id); it != requests_.end()) return it->second;
        }
        auto snap = snapshot();
        RunConfig config;
        RunInputs inputs;
        try {
            config = RunConfig::from_json(config_json);
            fs::path corpus = resolve(corpus_ref);
            inputs = RunInputs::load(corpus, config, corpus.parent_path());
        } catch (const Error& e) {
            return error(400, e.what(), snap);
        }
        auto result = execute_run(inputs, *snap.lex, config, corpus_ref);
        store_.save_run(result, config);

        std::unique_lock lock(state_);
        std::vector<Term> proposals;
        for (const auto& c : result.candidates) proposals.push_back(c.term);
        auto next = add_pending(*lexicon_, proposals, result.run.run_id);
        store_.append_history(*lexicon_, next);
        lexicon_ = std::make_shared<const Lexicon>(std::move(next));
        latest_run_ = result.run.run_id;
        nlohmann::json out{{"run", result.run.to_json()},
                           {"run_id", result.run.run_id},
                           {"lexicon_version", result.run.lexicon_version_used},
                           {"drug_posts", result.drug_posts},
                           {"candidates", proposals.size()},
                           {"request_id", request_id}};
        ApiResponse resp{result.run.status() == "completed" ? 201 : 500, out};
        if (resp.status == 201) remember("run:" + request_id, resp);
        return resp;
    }

    ApiResponse get_run(std::string_view run_id) const {
        auto run = store_.load_run(run_id);
        if (!run) return error(404, "unknown run", snapshot());
        return {200, {{"run", run->to_json()}, {"run_id", run->run_id}, {"lexicon_version", run->lexicon_version_used}}};
    }

    ApiResponse list_runs() const {
        auto snap = snapshot();
        auto arr = nlohmann::json::array();
        for (const auto& id : store_.run_ids())
            if (auto r = store_.load_run(id)) arr.push_back(r->to_json());
        return {200, provenance({{"runs", arr}}, snap)};
    }

    ApiResponse get_report(std::string_view run_id, std::string_view kind) const {
        if (!is_report_kind(kind)) return error(404, "unknown report kind", snapshot());
        auto r = store_.load_report(run_id, kind);
        if (!r) return error(404, "unknown run", snapshot());
        return {200, *r};
    }

    ApiResponse get_geojson(std::string_view run_id) const {
        auto g = store_.load_geojson(run_id);
        if (!g) return error(404, "unknown run", snapshot());
        return {200, *g};
    }

    std::optional<std::string> latest_run() const {
        std::shared_lock lock(state_);
        return latest_run_;
    }

private:
    Store store_;
    mutable std::shared_mutex state_;
    std::mutex run_mutex_;
    std::shared_ptr<const Lexicon> lexicon_;
    std::map<std::string, ApiResponse> requests_;
    std::optional<std::string> latest_run_;

    static nlohmann::json provenance(nlohmann::json body, const Snapshot& snap) {
        body["lexicon_version"] = snap.lex->version();
        body["run_id"] = snap.latest_run ? nlohmann::json(*snap.latest_run) : nlohmann::json();
        return body;
    }

    static ApiResponse error(int status, std::string message, const Snapshot& snap) {
        return {status, provenance({{"error", std::move(message)}}, snap)};
    }

    void remember(const std::string& key, const ApiResponse& resp) {
        requests_[key] = resp;
        store_.remember_request(key, resp.status, resp.body);
    }

    fs::path resolve(const std::string& ref) const {
        fs::path p(ref);
        if (p.is_relative() && fs::exists(store_.root() / p)) return store_.root() / p;
        if (!fs::exists(p)) throw ConfigError("corpus not found: " + ref);
        return p;
    }
};

/// HTTP binding. The console's static bundle is served under /console when
/// `console_dir` exists.
class HttpService {
public:
    HttpService(PipelineService& core, std::optional<fs::path> console_dir = std::nullopt) : core_(core) {
        using httplib::Request;
        using httplib::Response;
        auto send = [](Response& res, const ApiResponse& r) {
            res.status = r.status;
            res.set_content(r.body.dump(), "application/json");
        };
        auto parse_body = [](const Request& req) -> std::optional<nlohmann::json> {
            try {
                return req.body.empty() ? nlohmann::json::object() : nlohmann::json::parse(req.body);
            } catch (const nlohmann::json::exception&) {
                return std::nullopt;
            }
        };
        auto bad_json = [this](Response& res) {
            auto snap = core_.snapshot();
            res.status = 400;
            res.set_content(nlohmann::json{{"error", "body is not JSON"},
                                           {"lexicon_version", snap.lex->version()},
                                           {"run_id", snap.latest_run ? nlohmann::json(*snap.latest_run) : nlohmann::json()}}
                                .dump(),
                            "application/json");
        };

        server_.Get("/api/lexicon", [=, this](const Request& req, Response& res) {
            std::optional<std::string> status;
            if (req.has_param("status")) status = req.get_param_value("status");
            send(res, core_.list_lexicon(status));
        });
        server_.Get("/api/candidates", [=, this](const Request&, Response& res) { send(res, core_.candidates()); });
        server_.Post(R"(/api/candidates/([^/]+)/decision)", [=, this](const Request& req, Response& res) {
            auto body = parse_body(req);
            if (!body) return bad_json(res);
            send(res, core_.decide(httplib::detail::decode_url(req.matches[1], false), *body));
        });
        server_.Post("/api/runs", [=, this](const Request& req, Response& res) {
            auto body = parse_body(req);
            if (!body) return bad_json(res);
            send(res, core_.trigger_run(*body));
        });
        server_.Get("/api/runs", [=, this](const Request&, Response& res) { send(res, core_.list_runs()); });
        server_.Get(R"(/api/runs/([^/]+))", [=, this](const Request& req, Response& res) {
            send(res, core_.get_run(std::string(req.matches[1])));
        });
        server_.Get(R"(/api/reports/([^/]+)/([^/]+))", [=, this](const Request& req, Response& res) {
            send(res, core_.get_report(std::string(req.matches[1]), std::string(req.matches[2])));
        });
        server_.Get(R"(/api/geo/([^/]+)/clusters\.geojson)", [=, this](const Request& req, Response& res) {
            auto r = core_.get_geojson(std::string(req.matches[1]));
            res.status = r.status;
            res.set_content(r.body.dump(), r.status == 200 ? "application/geo+json" : "application/json");
        });
        if (console_dir && fs::is_directory(*console_dir)) {
            server_.set_mount_point("/console", console_dir->string());
        } else {
            server_.Get("/console", [](const Request&, Response& res) {
                res.set_content("<!doctype html><title>tagmine</title><p>Console bundle not installed.</p>",
                                "text/html");
            });
        }
    }

    /// Binds; port 0 picks an ephemeral port. Throws ConfigError on failure.
    int bind(const std::string& host, int port) {
        int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
        if (bound < 0) throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
        return bound;
    }

    /// Blocks until stop().
    void listen() { server_.listen_after_bind(); }

    void start_background() {
        thread_ = std::thread([this] { listen(); });
        server_.wait_until_ready();
    }

    void stop() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    ~HttpService() { stop(); }

private:
    PipelineService& core_;
    httplib::Server server_;
    std::thread thread_;
};

}  // namespace tagmine
