#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "nosqlfuzz/json_conv.hpp"
#include "nosqlfuzz/pairgen.hpp"
#include "nosqlfuzz/search.hpp"

#ifndef NOSQLFUZZ_SCENARIO_DIR
#define NOSQLFUZZ_SCENARIO_DIR ""
#endif

namespace {

using nosqlfuzz::ojson;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool file_exists(const std::string& path) {
    std::ifstream in(path);
    return in.good();
}

/// --scenario accepts a file path or a bundled scenario name.
nosqlfuzz::Scenario resolve_scenario(const std::string& arg) {
    if (file_exists(arg)) return nosqlfuzz::load_scenario_file(arg);
    std::string dir = NOSQLFUZZ_SCENARIO_DIR;
    if (const char* env = std::getenv("NOSQLFUZZ_SCENARIO_DIR")) dir = env;
    if (!dir.empty()) {
        std::string candidate = dir + "/" + arg + ".json";
        if (file_exists(candidate)) return nosqlfuzz::load_scenario_file(candidate);
    }
    throw nosqlfuzz::ScenarioError("scenario \"" + arg + "\" not found");
}

std::string format_distance(nosqlfuzz::Distance d) {
    if (!(d < nosqlfuzz::kMaxDistance)) return "MAX";
    if (d == std::floor(d) && std::fabs(d) < 1e15) {
        return std::to_string(static_cast<long long>(d));
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", d);
    return buf;
}

struct FuzzOptions {
    std::string scenario;
    std::size_t budget = 10000;
    std::uint64_t seed = 0;
    std::string out;
    double k = 1.0;
    double p_insertion = 0.5;
    double conform_probability = 0.9;
    bool no_nosql = false;
    bool no_insertion = false;
    bool dump_db = false;
    std::size_t repeat = 1;
};

ojson run_one(const nosqlfuzz::Scenario& scenario, const FuzzOptions& opt, std::uint64_t seed) {
    nosqlfuzz::SearchConfig cfg;
    cfg.seed = seed;
    cfg.budget = opt.budget;
    cfg.p_insertion = opt.p_insertion;
    cfg.use_nosql_heuristic = !opt.no_nosql;
    cfg.allow_insertion = !opt.no_insertion;
    cfg.synthesis.conform_probability = opt.conform_probability;
    cfg.distance.k = opt.k;

    auto t0 = std::chrono::steady_clock::now();
    nosqlfuzz::SuiteResult res = nosqlfuzz::fuzz(scenario, cfg);
    auto t1 = std::chrono::steady_clock::now();

    ojson report;
    report["scenario"] = scenario.name;
    report["config"] = ojson{{"seed", seed},
                             {"budget", opt.budget},
                             {"k", opt.k},
                             {"p_insertion", opt.p_insertion},
                             {"conform_probability", opt.conform_probability},
                             {"nosql_heuristic", !opt.no_nosql},
                             {"insertion", !opt.no_insertion}};
    report["targets"] = res.targets;
    report["covered"] = res.covered;
    report["coverage"] = res.targets.empty()
                             ? 0.0
                             : static_cast<double>(res.covered.size()) /
                                   static_cast<double>(res.targets.size());
    ojson first = ojson::object();
    for (const std::string& t : res.targets) {
        auto it = res.first_cover.find(t);
        if (it == res.first_cover.end()) {
            first[t] = nullptr;
        } else {
            first[t] = it->second;
        }
    }
    report["first_cover"] = first;
    report["evaluations"] = res.evaluations;
    ojson suite = ojson::array();
    for (const nosqlfuzz::TestCase& tc : res.suite) suite.push_back(nosqlfuzz::testcase_to_json(tc));
    report["suite"] = suite;

    if (opt.dump_db) {
        ojson dumps = ojson::array();
        for (std::size_t i = 0; i < res.suite.size(); ++i) {
            nosqlfuzz::DatabaseState state(seed);
            nosqlfuzz::SchemaRegistry registry;
            nosqlfuzz::ExecConfig ec;
            ec.distance = cfg.distance;
            ec.use_nosql_heuristic = cfg.use_nosql_heuristic;
            nosqlfuzz::execute(scenario, res.suite[i], state, registry, ec);
            ojson colls = ojson::object();
            for (const auto& [key, docs] : state.collections()) {
                ojson arr = ojson::array();
                for (const nosqlfuzz::Document& d : docs) arr.push_back(nosqlfuzz::to_json(d));
                colls[key.first + "." + key.second] = arr;
            }
            dumps.push_back(ojson{{"test", i}, {"collections", colls}});
        }
        report["database"] = dumps;
    }

    report["duration_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    return report;
}

int cmd_fuzz(const FuzzOptions& opt) {
    nosqlfuzz::Scenario scenario;
    try {
        scenario = resolve_scenario(opt.scenario);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    ojson payload;
    if (opt.repeat == 1) {
        payload = run_one(scenario, opt, opt.seed);
    } else {
        payload = ojson::array();
        for (std::size_t i = 0; i < opt.repeat; ++i) {
            payload.push_back(run_one(scenario, opt, opt.seed + i));
        }
    }

    std::string text = payload.dump(2);
    text.push_back('\n');
    if (opt.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(opt.out, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot write " << opt.out << "\n";
            return 2;
        }
        out << text;
    }
    return 0;
}

int cmd_distance(const std::string& filter_path, const std::string& doc_path, double k) {
    try {
        nosqlfuzz::Filter f = nosqlfuzz::parse_filter(read_file(filter_path));
        nosqlfuzz::Document d = nosqlfuzz::parse_document(read_file(doc_path));
        nosqlfuzz::DistanceConfig cfg;
        cfg.k = k;
        std::cout << format_distance(nosqlfuzz::hd_filter(d, f, cfg)) << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_oracle(std::size_t trials, std::uint64_t seed, double k) {
    nosqlfuzz::DistanceConfig cfg;
    cfg.k = k;
    nosqlfuzz::EquivalenceResult res = nosqlfuzz::run_equivalence_trials(trials, seed, cfg);
    std::cout << "trials=" << res.trials << " matched=" << res.matched
              << " violations=" << res.violations << "\n";
    if (res.violations == 0) return 0;
    if (res.first) {
        const auto& v = *res.first;
        std::cout << "counterexample at trial " << v.trial << ":\n"
                  << "  doc    " << nosqlfuzz::render_document(v.doc) << "\n"
                  << "  filter " << nosqlfuzz::render_filter(v.filter) << "\n"
                  << "  matches=" << (v.matched ? "true" : "false")
                  << " hd=" << format_distance(v.hd) << "\n";
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"search-based fuzzer over MongoDB-style query filters"};
    app.require_subcommand(1);

    FuzzOptions fopt;
    CLI::App* fz = app.add_subcommand("fuzz", "run the evolutionary search on a scenario");
    fz->add_option("--scenario", fopt.scenario, "scenario file path or bundled name")->required();
    fz->add_option("--budget", fopt.budget, "fitness evaluation budget");
    fz->add_option("--seed", fopt.seed, "random seed");
    fz->add_option("--out", fopt.out, "report file (default stdout)");
    fz->add_option("--k", fopt.k, "branch distance constant K");
    fz->add_option("--p-insertion", fopt.p_insertion, "insertion-action mutation probability");
    fz->add_option("--conform-probability", fopt.conform_probability,
                   "per-field schema conformance probability for synthesized documents");
    fz->add_flag("--no-nosql-heuristic", fopt.no_nosql,
                 "disable find-distance heuristics (ablation)");
    fz->add_flag("--no-insertion", fopt.no_insertion, "disable insertion actions (ablation)");
    fz->add_flag("--dump-db", fopt.dump_db, "include per-test database contents in the report");
    fz->add_option("--repeat", fopt.repeat, "run N consecutive seeds, emit a report array")
        ->check(CLI::PositiveNumber);

    std::string filter_path;
    std::string doc_path;
    double dist_k = 1.0;
    CLI::App* dc = app.add_subcommand("distance", "print the filter distance for one document");
    dc->add_option("--filter", filter_path, "filter JSON file")->required();
    dc->add_option("--doc", doc_path, "document JSON file")->required();
    dc->add_option("--k", dist_k, "branch distance constant K");

    std::size_t trials = 100000;
    std::uint64_t oracle_seed = 1;
    double oracle_k = 1.0;
    CLI::App* oc = app.add_subcommand("oracle", "cross-check distance zero against the matcher");
    oc->add_option("--trials", trials, "number of random document/filter pairs");
    oc->add_option("--seed", oracle_seed, "random seed");
    oc->add_option("--k", oracle_k, "branch distance constant K");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (*fz) return cmd_fuzz(fopt);
    if (*dc) return cmd_distance(filter_path, doc_path, dist_k);
    return cmd_oracle(trials, oracle_seed, oracle_k);
}
