// tagmine command line: synth, ingest, fetch, run, report, serve, lexicon, plan.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tagmine/fetch.hpp"
#include "tagmine/geospatial.hpp"
#include "tagmine/pipeline.hpp"
#include "tagmine/service.hpp"
#include "tagmine/store.hpp"
#include "tagmine/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tagmine;

namespace {

json read_json_file(const std::string& path) {
    try {
        return json::parse(read_file_bytes(path));
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

template <typename Fn>
void write_with(const fs::path& path, Fn&& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    fn(out);
}

int print(const ApiResponse& r) {
    std::cout << r.body.dump(2) << '\n';
    return r.status < 300 ? 0 : 1;
}

HttpService* g_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hashtag drug-use pattern mining"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic corpus");
    std::string spec_path;
    std::uint64_t seed = 1;
    std::string out_dir = "synthetic";
    synth->add_option("--spec", spec_path, "Generator spec (JSON); defaults apply when omitted");
    synth->add_option("--seed", seed, "RNG seed");
    synth->add_option("--out", out_dir, "Output directory");

    // ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "Validate and de-duplicate a JSONL corpus");
    std::string ingest_in;
    std::string ingest_out;
    ingest_cmd->add_option("input", ingest_in, "Corpus JSONL")->required();
    ingest_cmd->add_option("--out", ingest_out, "Write the de-duplicated corpus here");

    // fetch
    auto* fetch_cmd = app.add_subcommand("fetch", "Page through a JSONL source under an hourly request budget");
    std::string fetch_src;
    std::string fetch_out;
    int budget = 5000;
    std::size_t page_size = 100;
    fetch_cmd->add_option("source", fetch_src, "Source JSONL")->required();
    fetch_cmd->add_option("--out", fetch_out, "Output JSONL")->required();
    fetch_cmd->add_option("--budget", budget, "Requests per rolling hour");
    fetch_cmd->add_option("--page-size", page_size, "Posts per page");

    // run
    auto* run_cmd = app.add_subcommand("run", "Execute one mining round and persist it in the store");
    std::string store_dir = "store";
    std::string corpus_ref;
    std::string config_path;
    std::string request_id;
    run_cmd->add_option("--store", store_dir, "Store directory");
    run_cmd->add_option("--corpus", corpus_ref, "Corpus JSONL")->required();
    run_cmd->add_option("--config", config_path, "Run config (JSON); relative paths inside resolve against the corpus directory");
    run_cmd->add_option("--request-id", request_id, "Idempotency key (default: derived from inputs)");

    // report
    auto* report_cmd = app.add_subcommand("report", "Print a stored report");
    std::string kind;
    std::string run_id;
    bool csv = false;
    report_cmd->add_option("kind", kind, "popularity|temporal|demographics|interests|network|geo|geojson")->required();
    report_cmd->add_option("--store", store_dir, "Store directory");
    report_cmd->add_option("--run", run_id, "Run id (default: latest)");
    report_cmd->add_flag("--csv", csv, "Temporal report as CSV");

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API");
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string console_dir;
    serve_cmd->add_option("--store", store_dir, "Store directory");
    serve_cmd->add_option("--host", host, "Bind address");
    serve_cmd->add_option("--port", port, "Port (0 = ephemeral)");
    serve_cmd->add_option("--console", console_dir, "Static console bundle directory");

    // lexicon
    auto* lex_cmd = app.add_subcommand("lexicon", "Inspect or curate the lexicon");
    lex_cmd->require_subcommand(1);
    auto* lex_list = lex_cmd->add_subcommand("list", "List terms");
    std::string status;
    lex_list->add_option("--store", store_dir, "Store directory");
    lex_list->add_option("--status", status, "seed|pending|accepted|rejected|banned");
    auto* lex_decide = lex_cmd->add_subcommand("decide", "Decide a pending term");
    std::string term;
    std::string verdict;
    std::string category;
    int expect_version = 0;
    lex_decide->add_option("--store", store_dir, "Store directory");
    lex_decide->add_option("term", term, "Pending term")->required();
    lex_decide->add_option("verdict", verdict, "accept|reject|ban")->required();
    lex_decide->add_option("--category", category, "weed|syrup|pills|general (accept only)");
    lex_decide->add_option("--request-id", request_id, "Idempotency key");
    lex_decide->add_option("--lexicon-version", expect_version, "Reject if the lexicon moved past this version");

    // plan
    auto* plan_cmd = app.add_subcommand("plan", "Circle-cover plan for a bounding box");
    std::vector<double> region;
    double radius = 5000;
    std::int64_t t_from = 0;
    std::int64_t t_to = 0;
    plan_cmd->add_option("--region", region, "min_lat min_lon max_lat max_lon")->expected(4)->required();
    plan_cmd->add_option("--radius", radius, "Radius in meters (max 5000)");
    plan_cmd->add_option("--from", t_from, "Window start (unix seconds)")->required();
    plan_cmd->add_option("--to", t_to, "Window end (unix seconds)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            GeneratorSpec spec = spec_path.empty() ? GeneratorSpec{} : GeneratorSpec::from_json(read_json_file(spec_path));
            auto corpus = generate_synthetic(spec, seed);
            fs::create_directories(out_dir);
            const fs::path dir(out_dir);
            write_with(dir / "corpus.jsonl", [&](std::ostream& o) { corpus.write_corpus(o); });
            write_with(dir / "truth.jsonl", [&](std::ostream& o) { corpus.write_truth(o); });
            write_with(dir / "faces.jsonl", [&](std::ostream& o) { corpus.write_faces(o); });
            if (spec.network) {
                write_with(dir / "follows.csv", [&](std::ostream& o) { corpus.write_follows(o); });
                write_with(dir / "nodes.jsonl", [&](std::ostream& o) { corpus.write_nodes(o); });
            }
            write_text(dir / "spec.json", spec.to_json().dump(2) + "\n");
            std::uint64_t drug = 0;
            for (const auto& t : corpus.truth) drug += t.is_drug;
            std::cout << json{{"posts", corpus.truth.size()},
                              {"emitted", corpus.emitted.size()},
                              {"drug_posts", drug},
                              {"duplicates", corpus.planted_duplicates},
                              {"seed", seed},
                              {"out", out_dir}}
                             .dump(2)
                      << '\n';
            return 0;
        }
        if (*ingest_cmd) {
            std::ifstream in(ingest_in);
            if (!in) throw ConfigError("cannot read " + ingest_in);
            auto r = ingest(in);
            if (!ingest_out.empty()) write_with(ingest_out, [&](std::ostream& o) { write_corpus(o, r.corpus); });
            std::cout << r.report.to_json().dump(2) << '\n';
            return 0;
        }
        if (*fetch_cmd) {
            JsonlFileAdapter adapter(fetch_src, page_size);
            SteadyClock clock;
            std::ofstream out(fetch_out, std::ios::binary);
            if (!out) throw Error("cannot write " + fetch_out);
            auto report = fetch_all(adapter, budget, clock, [&](Post&& p) { out << to_json(p).dump() << '\n'; });
            std::cout << report.to_json().dump(2) << '\n';
            return 0;
        }
        if (*run_cmd) {
            PipelineService service(store_dir);
            json body{{"corpus_ref", fs::absolute(corpus_ref).string()}};
            json config = config_path.empty() ? json::object() : read_json_file(config_path);
            // Config paths are relative to the config file when given on the command line.
            if (!config_path.empty())
                for (const char* key : {"faces", "geocoder", "follows", "nodes"})
                    if (config.contains(key) && config.at(key).is_string() && fs::path(config.at(key).get<std::string>()).is_relative())
                        config[key] = (fs::absolute(config_path).parent_path() / config.at(key).get<std::string>()).string();
            body["config"] = config;
            if (request_id.empty()) {
                Fnv1a h;
                h.field(read_file_bytes(corpus_ref)).field(config.dump()).field(std::to_string(service.lexicon()->version()));
                request_id = "cli-" + h.hex();
            }
            body["request_id"] = request_id;
            return print(service.trigger_run(body));
        }
        if (*report_cmd) {
            PipelineService service(store_dir);
            if (run_id.empty()) {
                auto latest = service.latest_run();
                if (!latest) throw ConfigError("store has no runs");
                run_id = *latest;
            }
            if (kind == "geojson") return print(service.get_geojson(run_id));
            auto r = service.get_report(run_id, kind);
            if (csv && r.status == 200 && kind == "temporal") {
                std::cout << temporal_csv(r.body, "hour");
                return 0;
            }
            return print(r);
        }
        if (*serve_cmd) {
            PipelineService service(store_dir);
            HttpService http(service, console_dir.empty() ? std::nullopt : std::optional<fs::path>(console_dir));
            int bound = http.bind(host, port);
            std::cerr << "listening on " << host << ':' << bound << '\n';
            g_server = &http;
            std::signal(SIGINT, [](int) {
                if (g_server) g_server->stop();
            });
            http.listen();
            return 0;
        }
        if (*lex_list) {
            PipelineService service(store_dir);
            return print(service.list_lexicon(status.empty() ? std::nullopt : std::optional<std::string_view>(status)));
        }
        if (*lex_decide) {
            PipelineService service(store_dir);
            json body{{"verdict", verdict}, {"actor", "cli"}};
            if (!category.empty()) body["category"] = category;
            if (expect_version > 0) body["lexicon_version"] = expect_version;
            if (request_id.empty()) request_id = "cli-" + term + "-" + std::to_string(service.lexicon()->version());
            body["request_id"] = request_id;
            return print(service.decide(term, body));
        }
        if (*plan_cmd) {
            BoundingBox box{region[0], region[1], region[2], region[3]};
            std::cout << plan_cover(box, radius, t_from, t_to).to_json().dump(2) << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
