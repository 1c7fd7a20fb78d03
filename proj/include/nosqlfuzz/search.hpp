#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nosqlfuzz/executor.hpp"
#include "nosqlfuzz/rng.hpp"
#include "nosqlfuzz/scenario.hpp"
#include "nosqlfuzz/schema.hpp"

namespace nosqlfuzz {

struct SearchConfig {
    std::uint64_t seed = 0;
    std::size_t budget = 10000;  // fitness evaluations
    std::size_t population_per_target = 10;
    double p_random = 0.5;       // sampling probability, annealed linearly
    double focus_fraction = 0.5; // fraction of budget at which p_random hits 0
    double p_insertion = 0.5;    // chance a mutation prepends an insertion
    std::size_t max_actions = 10;
    bool use_nosql_heuristic = true;
    bool allow_insertion = true;
    SynthesisConfig synthesis;
    DistanceConfig distance;
};

struct UnevaluatedIndividual : std::logic_error {
    UnevaluatedIndividual() : std::logic_error("individual has not been evaluated") {}
};

/// Evaluated genotype. Per target: primary score, the command count of the
/// best action and that action's raw find distances (the secondary data).
struct Individual {
    TestCase tc;
    bool evaluated = false;
    std::map<std::string, TargetScore> score;
    std::set<std::string> covered;
    std::map<std::string, int> kcount;
    std::map<std::string, std::vector<Distance>> dset;
    std::vector<std::pair<std::string, std::string>> empty_finds;  // (db, coll)
};

/// Three-way preorder for one target: higher h wins; on equal h the larger
/// command count k wins; on equal k the lower mean of nu-normalized
/// distances wins (an empty set averages to 1). The distance rule is
/// skipped when the NoSQL secondary objective is disabled. Returns -1 when
/// a ranks below b, 0 on a full tie, 1 when a ranks above.
int compare_for_target(const Individual& a, const Individual& b, const std::string& target,
                       bool use_nosql_heuristic = true);

struct SuiteResult {
    std::vector<std::string> targets;            // listed order
    std::vector<std::string> covered;            // sorted
    std::map<std::string, std::size_t> first_cover;  // 1-based evaluation ordinal
    std::vector<TestCase> suite;                 // deduplicated covering tests
    std::size_t evaluations = 0;
};

/// MIO-style many-objective search: per-target populations fed by a
/// sample-or-mutate loop, archive keeping one best test per covered target.
class Fuzzer {
  public:
    Fuzzer(Scenario scenario, const SearchConfig& cfg);

    SuiteResult run();

    // Building blocks, exposed so tests can drive them directly.
    Individual evaluate(const TestCase& tc);
    TestCase sample_random();
    TestCase mutate(const Individual& parent);

    const std::vector<std::string>& targets() const { return targets_; }
    SchemaRegistry& registry() { return registry_; }

  private:
    void incorporate(Individual ind);
    const Individual* select_parent(std::string* target_out);
    Value random_param(ParamKind kind);
    void apply_mutation(TestCase& tc);

    Scenario scenario_;
    SearchConfig cfg_;
    Rng rng_;
    DatabaseState state_;
    SchemaRegistry registry_;
    std::vector<std::string> targets_;
    std::set<std::string> covered_;
    std::map<std::string, Individual> archive_;
    std::map<std::string, std::vector<Individual>> populations_;
    std::map<std::string, std::size_t> first_cover_;
    std::size_t evaluations_ = 0;
    std::size_t cursor_ = 0;
};

/// One full search run. The suite re-executes from scratch to exactly the
/// covered set.
SuiteResult fuzz(const Scenario& scenario, const SearchConfig& cfg);

}  // namespace nosqlfuzz
