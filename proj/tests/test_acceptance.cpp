// Acceptance gate: exercises the shipped binary and the library against the
// fixed success criteria. One verdict line per criterion; exits with the
// number of failed criteria. Usage: nosqlfuzz_acceptance <cli> <scenario-dir>
#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "nosqlfuzz/json_conv.hpp"
#include "nosqlfuzz/search.hpp"

using namespace nosqlfuzz;
using ojson = nlohmann::ordered_json;

namespace {

std::string g_cli;
std::string g_dir;
std::string g_tmp;
int g_failures = 0;

void verdict(int n, const std::string& label, bool ok, const std::string& detail) {
    std::cout << "criterion " << n << ": " << label << ": " << (ok ? "PASS" : "FAIL");
    if (!ok && !detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n" << std::flush;
    if (!ok) ++g_failures;
}

struct CmdResult {
    int status = -1;
    std::string out;
};

CmdResult run_cmd(const std::string& cmd) {
    CmdResult res;
    FILE* pipe = popen((cmd + " 2>/dev/null").c_str(), "r");
    if (!pipe) return res;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) res.out.append(buf, n);
    int rc = pclose(pipe);
    if (WIFEXITED(rc)) res.status = WEXITSTATUS(rc);
    return res;
}

std::string write_tmp(const std::string& name, const std::string& text) {
    std::string path = g_tmp + "/" + name;
    std::ofstream out(path, std::ios::binary);
    out << text;
    return path;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Seeds 1..30, fixed budget; counts runs covering the emptiness true branch.
int covered_seeds(const Scenario& s, std::size_t budget, bool heuristic, bool insertion) {
    int n = 0;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        SearchConfig cfg;
        cfg.seed = seed;
        cfg.budget = budget;
        cfg.use_nosql_heuristic = heuristic;
        cfg.allow_insertion = insertion;
        SuiteResult r = fuzz(s, cfg);
        if (std::binary_search(r.covered.begin(), r.covered.end(),
                               std::string("GET.branch1.true"))) {
            ++n;
        }
    }
    return n;
}

const FindStep* first_find(const std::vector<Step>& steps) {
    for (const Step& st : steps) {
        if (const auto* f = std::get_if<FindStep>(&st.node)) return f;
        if (const auto* b = std::get_if<BranchStep>(&st.node)) {
            if (const FindStep* r = first_find(b->then_steps)) return r;
            if (const FindStep* r = first_find(b->else_steps)) return r;
        }
    }
    return nullptr;
}

ojson fill_placeholders(const ojson& t, const ojson& literal) {
    if (t.is_object()) {
        if (t.size() == 1 && t.begin().key() == "$var") return literal;
        ojson out = ojson::object();
        for (auto it = t.begin(); it != t.end(); ++it) {
            out[it.key()] = fill_placeholders(it.value(), literal);
        }
        return out;
    }
    if (t.is_array()) {
        ojson out = ojson::array();
        for (const auto& e : t) out.push_back(fill_placeholders(e, literal));
        return out;
    }
    return t;
}

void check_worked_example() {
    std::string detail;
    bool ok = true;
    std::string doc = write_tmp("doc.json", R"({"x": 42, "y": "b", "z": 1.0})");
    std::string f_eq = write_tmp("f_eq.json", R"({"x": {"$eq": 17}})");
    std::string f_and = write_tmp("f_and.json",
                                  R"({"$and": [{"x": {"$eq": 17}}, {"y": {"$eq": "c"}}]})");
    std::string f_hit = write_tmp("f_hit.json", R"({"x": {"$eq": 42}})");
    std::string f_bad = write_tmp("f_bad.json", R"({"x": {"$regex": "a"}})");

    CmdResult r = run_cmd(g_cli + " distance --filter '" + f_eq + "' --doc '" + doc + "'");
    if (r.status != 0 || r.out != "25\n") {
        ok = false;
        detail = "single equality printed \"" + r.out + "\"";
    }
    r = run_cmd(g_cli + " distance --filter '" + f_and + "' --doc '" + doc + "'");
    double got = r.out.empty() ? -1.0 : std::strtod(r.out.c_str(), nullptr);
    double want = 25.0 / 26.0 + 0.5;
    if (r.status != 0 || std::fabs(got - want) > 1e-9) {
        ok = false;
        detail = "conjunction printed \"" + r.out + "\"";
    }
    r = run_cmd(g_cli + " distance --filter '" + f_hit + "' --doc '" + doc + "'");
    if (r.status != 0 || r.out != "0\n") {
        ok = false;
        detail = "matching pair printed \"" + r.out + "\"";
    }
    r = run_cmd(g_cli + " distance --filter '" + f_bad + "' --doc '" + doc + "'");
    if (r.status != 2) {
        ok = false;
        detail = "unknown operator exited " + std::to_string(r.status);
    }
    verdict(1, "worked-example distances from the command line", ok, detail);
}

void check_oracle() {
    CmdResult r = run_cmd(g_cli + " oracle --trials 100000 --seed 1");
    bool ok = r.status == 0 && r.out.find("violations=0") != std::string::npos;
    verdict(2, "matcher/distance equivalence oracle, 100000 trials", ok,
            "exit " + std::to_string(r.status) + ", output \"" + r.out + "\"");
}

void check_motivating() {
    Scenario s = load_scenario_file(g_dir + "/motivating.json");
    int guided = covered_seeds(s, 50000, true, true);
    int ablated = covered_seeds(s, 50000, false, false);
    bool ok = guided >= 27 && ablated <= 1;
    verdict(3, "motivating scenario, guided vs ablated search", ok,
            "guided " + std::to_string(guided) + "/30, ablated " + std::to_string(ablated) +
                "/30");
}

void check_readonly() {
    Scenario s = load_scenario_file(g_dir + "/readonly.json");
    int with_insertion = covered_seeds(s, 50000, true, true);
    int without = covered_seeds(s, 50000, true, false);
    bool ok = with_insertion >= 27 && without == 0;
    verdict(4, "read-only scenario, insertion on vs off", ok,
            "insertion " + std::to_string(with_insertion) + "/30, without " +
                std::to_string(without) + "/30");
}

Individual tie_ind(double h, int k, std::vector<Distance> ds) {
    Individual ind;
    ind.evaluated = true;
    ind.score["g"] = TargetScore{h, 0};
    ind.kcount["g"] = k;
    ind.dset["g"] = std::move(ds);
    return ind;
}

void check_tie_rules() {
    bool ok = true;
    std::string detail;
    Individual k1 = tie_ind(0.5, 1, {});
    Individual k3 = tie_ind(0.5, 3, {});
    if (compare_for_target(k3, k1, "g") != 1 || compare_for_target(k1, k3, "g") != -1) {
        ok = false;
        detail = "larger command count did not win on equal score";
    }
    Individual near = tie_ind(0.5, 2, {3.0});   // mean normalized 0.75
    Individual far = tie_ind(0.5, 2, {7.0});    // mean normalized 0.875
    if (compare_for_target(near, far, "g") != 1 || compare_for_target(far, near, "g") != -1) {
        ok = false;
        detail = "lower mean normalized distance did not win on equal score and count";
    }
    Individual strong = tie_ind(1.0, 0, {});
    Individual weak = tie_ind(0.4, 9, {0.001});
    if (compare_for_target(strong, weak, "g") != 1 || compare_for_target(weak, strong, "g") != -1) {
        ok = false;
        detail = "secondaries leaked into an unequal-score comparison";
    }
    verdict(5, "tie-breaking by command count then mean distance", ok, detail);
}

struct OpRow {
    const char* op;
    bool has_var;
    ojson literal;
    Document doc;
    double expect;
};

void check_per_operator() {
    const std::vector<OpRow> rows = {
        {"eq", true, 42, Document{{"v", Value(17)}}, 25.0},
        {"ne", false, {}, Document{{"v", Value(42)}}, 1.0},
        {"gt", true, 100, Document{{"v", Value(100)}}, 1.0},
        {"gte", true, 100, Document{{"v", Value(42)}}, 59.0},
        {"lt", true, 10, Document{{"v", Value(10)}}, 1.0},
        {"lte", true, 10, Document{{"v", Value(42)}}, 33.0},
        {"in", true, 25, Document{{"v", Value(33)}}, 8.0},
        {"nin", false, {}, Document{{"v", Value(42)}}, 1.0},
        {"mod", false, {}, Document{{"v", Value(42)}}, 2.0},
        {"exists_true", false, {}, Document{{"w", Value(5)}}, 1.0},
        {"exists_false", false, {}, Document{{"v", Value(42)}}, 1.0},
        {"size", false, {},
         Document{{"v", Value(Array{Value(1), Value(2), Value(3), Value(4), Value(5)})}}, 3.0},
        {"type", false, {}, Document{{"v", Value(42)}}, 1.0},
        {"all", false, {}, Document{{"v", Value(Array{Value(1), Value(5)})}}, 0.5},
        {"not", false, {}, Document{{"v", Value(42)}}, 59.0},
    };

    bool ok = true;
    std::string detail;
    DistanceConfig dcfg;
    for (const OpRow& row : rows) {
        Scenario s = load_scenario_file(g_dir + "/op_" + row.op + ".json");

        const FindStep* find = first_find(s.endpoints.at(0).body);
        if (!find) {
            ok = false;
            detail = std::string(row.op) + ": no query step found";
            break;
        }
        ojson filled = row.has_var ? fill_placeholders(find->filter_template, row.literal)
                                   : find->filter_template;
        Filter f = filter_from_json(filled);
        if (matches(row.doc, f)) {
            ok = false;
            detail = std::string(row.op) + ": fixture document unexpectedly matches";
            break;
        }
        double d = collection_distance({row.doc}, f, dcfg);
        if (std::fabs(d - row.expect) > 1e-9) {
            ok = false;
            detail = std::string(row.op) + ": distance " + std::to_string(d) + " vs " +
                     std::to_string(row.expect);
            break;
        }

        int seeds = covered_seeds(s, 20000, true, true);
        if (seeds < 27) {
            ok = false;
            detail = std::string(row.op) + ": covered in " + std::to_string(seeds) + "/30 seeds";
            break;
        }
    }
    verdict(6, "per-operator distances and guided coverage", ok, detail);
}

void check_determinism() {
    std::string out_a = g_tmp + "/run_a.json";
    std::string out_b = g_tmp + "/run_b.json";
    std::string base = g_cli + " fuzz --scenario '" + g_dir +
                       "/motivating.json' --budget 20000 --seed 7 --out '";
    CmdResult ra = run_cmd(base + out_a + "'");
    CmdResult rb = run_cmd(base + out_b + "'");

    auto strip_duration = [](const std::string& text) {
        std::istringstream in(text);
        std::ostringstream kept;
        std::string line;
        while (std::getline(in, line)) {
            if (line.find("\"duration_ms\"") != std::string::npos) continue;
            kept << line << "\n";
        }
        return kept.str();
    };
    std::string a = read_file(out_a);
    std::string b = read_file(out_b);
    bool ok = ra.status == 0 && rb.status == 0 && !a.empty() &&
              strip_duration(a) == strip_duration(b);
    verdict(7, "identical seeds give byte-identical reports", ok,
            "exit " + std::to_string(ra.status) + "/" + std::to_string(rb.status));
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: nosqlfuzz_acceptance <cli-binary> <scenario-dir>\n";
        return 64;
    }
    g_cli = argv[1];
    g_dir = argv[2];
    char tmpl[] = "/tmp/nosqlfuzz-accept-XXXXXX";
    if (!mkdtemp(tmpl)) {
        std::cerr << "cannot create temp dir\n";
        return 64;
    }
    g_tmp = tmpl;

    try {
        check_worked_example();
        check_oracle();
        check_motivating();
        check_readonly();
        check_tie_rules();
        check_per_operator();
        check_determinism();
    } catch (const std::exception& e) {
        std::cerr << "aborted: " << e.what() << "\n";
        return 65;
    }

    if (g_failures == 0) {
        std::cout << "all criteria satisfied\n";
    } else {
        std::cout << g_failures << " criteria failed\n";
    }
    return g_failures;
}
