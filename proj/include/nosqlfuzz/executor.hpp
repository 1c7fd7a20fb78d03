#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "nosqlfuzz/scenario.hpp"
#include "nosqlfuzz/schema.hpp"
#include "nosqlfuzz/store.hpp"

namespace nosqlfuzz {

struct MongoInsertion {
    std::string db;
    std::string coll;
    Document doc;
};

struct EndpointCall {
    std::string endpoint;
    std::vector<Value> args;
};

/// Initialization inserts always run before the endpoint calls; action
/// indices number insertions first, calls after.
struct TestCase {
    std::vector<MongoInsertion> insertions;
    std::vector<EndpointCall> calls;
    std::size_t action_count() const { return insertions.size() + calls.size(); }
};

nlohmann::ordered_json testcase_to_json(const TestCase& tc);
TestCase testcase_from_json(const nlohmann::ordered_json& j);

struct TargetScore {
    double h = 0.0;
    int action = -1;  // action index achieving h; -1 when unreached
};

struct ExecutionResult {
    std::set<std::string> covered;
    std::map<std::string, TargetScore> best;  // one entry per listed target
    NoSqlDistanceReport report;
    // Collection distance of each empty-returning find over the contents it
    // actually saw, keyed by record ordinal. Unlike the report, which is a
    // post-run pass over the final state, these feed the search gradient.
    std::map<std::size_t, Distance> exec_distances;
    std::vector<int> responses;  // status per endpoint call
};

struct ExecConfig {
    DistanceConfig distance;
    bool use_nosql_heuristic = true;
};

/// Runs the test case against a fresh state. Covered targets score 1;
/// a reached-but-uncovered branch side scores 0.99*(1 - nu(rho)), where
/// rho for an emptiness branch is the collection distance the find saw
/// when it executed (capped at k so data-backed attempts never rank
/// below the no-data baseline) and k when no distance is available.
ExecutionResult execute(const Scenario& s, const TestCase& tc, DatabaseState& state,
                        SchemaRegistry& registry, const ExecConfig& cfg);

}  // namespace nosqlfuzz
