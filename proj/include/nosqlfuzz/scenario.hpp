#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nosqlfuzz/distance.hpp"
#include "nosqlfuzz/value.hpp"

namespace nosqlfuzz {

struct ScenarioError : std::runtime_error {
    explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

enum class ParamKind { Int, Char, Double, Str };

struct Param {
    std::string name;
    ParamKind kind;
};

/// Transform operand: either a variable reference (spelled as a bare
/// string in scenario JSON) or a numeric/char/string literal.
struct Arg {
    bool is_var = false;
    std::string var;
    Value literal = Value(Null{});
};

struct Step;

struct LetStep {
    std::string var;
    std::string op;  // add sub mul div char_shift const
    std::vector<Arg> args;
};

struct InsertStep {
    std::string db;
    std::string coll;
    nlohmann::ordered_json doc_template;
};

struct FindStep {
    std::string db;
    std::string coll;
    nlohmann::ordered_json filter_template;
    std::string into;
};

struct Predicate {
    enum class Kind { NonEmpty, Cmp };
    Kind kind = Kind::NonEmpty;
    std::string var;       // NonEmpty: the find-result variable
    RelOp op = RelOp::Eq;  // Cmp
    Arg lhs;
    Arg rhs;
};

struct BranchStep {
    Predicate pred;
    int ordinal = 0;  // 1-based per endpoint
    std::vector<Step> then_steps;
    std::vector<Step> else_steps;
};

struct RespondStep {
    int status = 200;
};

struct Step {
    std::variant<LetStep, InsertStep, FindStep, BranchStep, RespondStep> node;
};

struct Endpoint {
    std::string name;
    std::vector<Param> params;
    std::vector<Step> body;
    int branch_count = 0;
    std::vector<int> statuses;   // distinct respond codes, ascending
    bool can_fail = false;       // a 500 target exists
};

struct Scenario {
    std::string name;
    // "db.coll" split into the pair key; value is field -> type name.
    std::map<std::pair<std::string, std::string>, std::map<std::string, std::string>> schemas;
    std::vector<Endpoint> endpoints;
};

Scenario load_scenario(const std::string& text);
Scenario load_scenario_file(const std::string& path);

/// Branch targets ("GET.branch1.true") in body order, then status targets
/// ("GET.200") ascending, per endpoint in file order.
std::vector<std::string> list_targets(const Scenario& s);

const Endpoint* find_endpoint(const Scenario& s, const std::string& name);

}  // namespace nosqlfuzz
