#include "nosqlfuzz/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "nosqlfuzz/json_conv.hpp"

namespace nosqlfuzz {

using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw ScenarioError(what); }

ParamKind param_kind(const std::string& name) {
    if (name == "int") return ParamKind::Int;
    if (name == "char") return ParamKind::Char;
    if (name == "double") return ParamKind::Double;
    if (name == "string") return ParamKind::Str;
    bad("unknown param kind \"" + name + "\"");
}

// Static kinds tracked during validation; Docs is a find result.
enum class VarKind { Int, Char, Double, Str, Docs };

VarKind to_var_kind(ParamKind k) {
    switch (k) {
        case ParamKind::Int: return VarKind::Int;
        case ParamKind::Char: return VarKind::Char;
        case ParamKind::Double: return VarKind::Double;
        default: return VarKind::Str;
    }
}

bool numeric_kind(VarKind k) { return k == VarKind::Int || k == VarKind::Double; }

struct Scope {
    const Scenario* scenario = nullptr;
    std::string endpoint;
    std::map<std::string, VarKind> vars;
};

Arg parse_arg(const ojson& j, const char* where) {
    Arg a;
    if (j.is_string()) {
        a.is_var = true;
        a.var = j.get<std::string>();
        return a;
    }
    if (j.is_number() || j.is_boolean() || j.is_null()) {
        a.literal = value_from_json(j);
        return a;
    }
    bad(std::string(where) + ": argument must be a variable name or a literal");
}

VarKind arg_kind(const Arg& a, const Scope& scope, const char* where) {
    if (a.is_var) {
        auto it = scope.vars.find(a.var);
        if (it == scope.vars.end()) {
            bad(scope.endpoint + ": " + where + " references undefined variable \"" + a.var + "\"");
        }
        return it->second;
    }
    switch (a.literal.kind()) {
        case ValueKind::Int32:
        case ValueKind::Int64: return VarKind::Int;
        case ValueKind::Double: return VarKind::Double;
        default: bad(scope.endpoint + ": " + where + " literal must be numeric");
    }
}

void define_var(Scope& scope, const std::string& name, VarKind kind) {
    if (name.empty()) bad(scope.endpoint + ": empty variable name");
    if (!scope.vars.emplace(name, kind).second) {
        bad(scope.endpoint + ": variable \"" + name + "\" defined twice");
    }
}

// Substitutes every {"$var": name} with a placeholder value of the
// variable's kind, so templates are fully parse-checked at load time.
ojson dummy_substitute(const ojson& t, const Scope& scope, const char* where) {
    if (t.is_object()) {
        if (t.size() == 1 && t.items().begin().key() == "$var") {
            const ojson& ref = *t.begin();
            if (!ref.is_string()) bad(scope.endpoint + ": $var takes a variable name");
            auto it = scope.vars.find(ref.get<std::string>());
            if (it == scope.vars.end()) {
                bad(scope.endpoint + ": " + where + " references undefined variable \"" +
                    ref.get<std::string>() + "\"");
            }
            switch (it->second) {
                case VarKind::Int: return 0;
                case VarKind::Char: return "a";
                case VarKind::Double: return 0.0;
                case VarKind::Str: return "";
                default:
                    bad(scope.endpoint + ": find results cannot be spliced into " +
                        std::string(where));
            }
        }
        ojson out = ojson::object();
        for (const auto& [key, val] : t.items()) out[key] = dummy_substitute(val, scope, where);
        return out;
    }
    if (t.is_array()) {
        ojson out = ojson::array();
        for (const auto& e : t) out.push_back(dummy_substitute(e, scope, where));
        return out;
    }
    return t;
}

std::pair<std::string, std::string> split_collection_key(const std::string& key) {
    std::size_t dot = key.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 >= key.size()) {
        bad("collection key must look like \"db.collection\": \"" + key + "\"");
    }
    return {key.substr(0, dot), key.substr(dot + 1)};
}

std::vector<Step> parse_steps(const ojson& j, Scope& scope, Scenario& scenario, Endpoint& ep);

Step parse_step(const ojson& j, Scope& scope, Scenario& scenario, Endpoint& ep) {
    if (!j.is_object()) bad(scope.endpoint + ": step must be an object");
    if (j.contains("let")) {
        LetStep s;
        s.var = j.at("let").get<std::string>();
        if (!j.contains("op")) bad(scope.endpoint + ": let step needs an op");
        s.op = j.at("op").get<std::string>();
        for (const auto& a : j.value("args", ojson::array())) {
            s.args.push_back(parse_arg(a, "let"));
        }
        if (s.op == "const") {
            if (s.args.size() != 1) bad(scope.endpoint + ": const takes one argument");
            // const literals are never variable references
            if (s.args[0].is_var) {
                s.args[0].literal = Value(s.args[0].var);
                s.args[0].is_var = false;
            }
            VarKind k;
            switch (s.args[0].literal.kind()) {
                case ValueKind::Int32:
                case ValueKind::Int64: k = VarKind::Int; break;
                case ValueKind::Double: k = VarKind::Double; break;
                case ValueKind::Text:
                    k = utf8_codepoints(s.args[0].literal.as_text()).size() == 1 ? VarKind::Char
                                                                                 : VarKind::Str;
                    break;
                default: bad(scope.endpoint + ": const literal must be numeric or text");
            }
            define_var(scope, s.var, k);
            return Step{std::move(s)};
        }
        if (s.op == "char_shift") {
            if (s.args.size() != 2) bad(scope.endpoint + ": char_shift takes two arguments");
            if (arg_kind(s.args[0], scope, "char_shift") != VarKind::Char) {
                bad(scope.endpoint + ": char_shift needs a char first argument");
            }
            if (s.args[1].is_var && arg_kind(s.args[1], scope, "char_shift") != VarKind::Int) {
                bad(scope.endpoint + ": char_shift needs an int shift");
            }
            define_var(scope, s.var, VarKind::Char);
            return Step{std::move(s)};
        }
        if (s.op == "add" || s.op == "sub" || s.op == "mul" || s.op == "div") {
            if (s.args.size() != 2) bad(scope.endpoint + ": " + s.op + " takes two arguments");
            VarKind a = arg_kind(s.args[0], scope, s.op.c_str());
            VarKind b = arg_kind(s.args[1], scope, s.op.c_str());
            if (!numeric_kind(a) || !numeric_kind(b)) {
                bad(scope.endpoint + ": " + s.op + " needs numeric arguments");
            }
            define_var(scope, s.var,
                       (a == VarKind::Int && b == VarKind::Int) ? VarKind::Int : VarKind::Double);
            return Step{std::move(s)};
        }
        bad(scope.endpoint + ": unknown transform op \"" + s.op + "\"");
    }
    if (j.contains("insert")) {
        const ojson& spec = j.at("insert");
        InsertStep s;
        s.db = spec.at("db").get<std::string>();
        s.coll = spec.at("collection").get<std::string>();
        s.doc_template = spec.at("document");
        ojson probe = dummy_substitute(s.doc_template, scope, "insert document");
        document_from_json(probe);  // parse check
        if (s.doc_template.is_object() && s.doc_template.contains("_id")) ep.can_fail = true;
        return Step{std::move(s)};
    }
    if (j.contains("find")) {
        const ojson& spec = j.at("find");
        FindStep s;
        s.db = spec.at("db").get<std::string>();
        s.coll = spec.at("collection").get<std::string>();
        s.filter_template = spec.at("filter");
        s.into = spec.at("into").get<std::string>();
        ojson probe = dummy_substitute(s.filter_template, scope, "find filter");
        filter_from_json(probe);  // parse check, rejects unknown operators
        define_var(scope, s.into, VarKind::Docs);
        if (scenario.schemas.count({s.db, s.coll})) ep.can_fail = true;
        return Step{std::move(s)};
    }
    if (j.contains("branch")) {
        const ojson& spec = j.at("branch");
        BranchStep s;
        const ojson& cond = spec.at("if");
        if (!cond.is_object() || cond.size() != 1) {
            bad(scope.endpoint + ": branch condition must have exactly one key");
        }
        const std::string& kind = cond.items().begin().key();
        if (kind == "nonempty") {
            s.pred.kind = Predicate::Kind::NonEmpty;
            s.pred.var = cond.at("nonempty").get<std::string>();
            auto it = scope.vars.find(s.pred.var);
            if (it == scope.vars.end() || it->second != VarKind::Docs) {
                bad(scope.endpoint + ": nonempty needs a find result variable");
            }
        } else if (kind == "gt" || kind == "gte" || kind == "lt" || kind == "lte" ||
                   kind == "eq" || kind == "ne") {
            s.pred.kind = Predicate::Kind::Cmp;
            s.pred.op = kind == "gt"    ? RelOp::Gt
                        : kind == "gte" ? RelOp::Gte
                        : kind == "lt"  ? RelOp::Lt
                        : kind == "lte" ? RelOp::Lte
                        : kind == "eq"  ? RelOp::Eq
                                        : RelOp::Ne;
            const ojson& ops = *cond.begin();
            if (!ops.is_array() || ops.size() != 2) {
                bad(scope.endpoint + ": comparison takes [lhs, rhs]");
            }
            s.pred.lhs = parse_arg(ops[0], "branch");
            s.pred.rhs = parse_arg(ops[1], "branch");
            for (const Arg* a : {&s.pred.lhs, &s.pred.rhs}) {
                VarKind k = arg_kind(*a, scope, "branch");
                if (k != VarKind::Int && k != VarKind::Double && k != VarKind::Char) {
                    bad(scope.endpoint + ": branch comparison needs numeric or char operands");
                }
            }
        } else {
            bad(scope.endpoint + ": unknown branch condition \"" + kind + "\"");
        }
        s.ordinal = ++ep.branch_count;
        // Arms see the outer variables; names they define stay arm-local.
        Scope then_scope = scope;
        s.then_steps = parse_steps(spec.at("then"), then_scope, scenario, ep);
        Scope else_scope = scope;
        s.else_steps = parse_steps(spec.at("else"), else_scope, scenario, ep);
        return Step{std::move(s)};
    }
    if (j.contains("respond")) {
        RespondStep s;
        if (!j.at("respond").is_number_integer() && !j.at("respond").is_number_unsigned()) {
            bad(scope.endpoint + ": respond takes an integer status");
        }
        s.status = j.at("respond").get<int>();
        if (s.status < 100 || s.status > 599) {
            bad(scope.endpoint + ": respond status out of range");
        }
        if (std::find(ep.statuses.begin(), ep.statuses.end(), s.status) == ep.statuses.end()) {
            ep.statuses.push_back(s.status);
        }
        return Step{std::move(s)};
    }
    bad(scope.endpoint + ": unrecognized step " + j.dump());
}

std::vector<Step> parse_steps(const ojson& j, Scope& scope, Scenario& scenario, Endpoint& ep) {
    if (!j.is_array()) bad(scope.endpoint + ": step list must be an array");
    std::vector<Step> steps;
    for (const auto& e : j) steps.push_back(parse_step(e, scope, scenario, ep));
    return steps;
}

// Every control path must end in a respond so status targets are total.
bool always_responds(const std::vector<Step>& steps) {
    for (const Step& s : steps) {
        if (std::holds_alternative<RespondStep>(s.node)) return true;
        if (const auto* b = std::get_if<BranchStep>(&s.node)) {
            if (always_responds(b->then_steps) && always_responds(b->else_steps)) return true;
        }
    }
    return false;
}

}  // namespace

Scenario load_scenario(const std::string& text) {
    ojson j = ojson::parse(text, nullptr, false);
    if (j.is_discarded()) bad("scenario is not valid JSON");
    if (!j.is_object()) bad("scenario must be a JSON object");
    Scenario s;
    s.name = j.value("name", "");
    if (s.name.empty()) bad("scenario needs a name");
    const ojson collections = j.value("collections", ojson::object());
    for (const auto& [key, fields] : collections.items()) {
        auto [db, coll] = split_collection_key(key);
        std::map<std::string, std::string> schema;
        if (!fields.is_object()) bad("collection schema must be an object");
        for (const auto& [fname, ftype] : fields.items()) {
            if (!ftype.is_string() || !is_canonical_type_name(ftype.get<std::string>())) {
                bad("collection \"" + key + "\" field \"" + fname + "\" has an unknown type");
            }
            schema.emplace(fname, ftype.get<std::string>());
        }
        s.schemas[{db, coll}] = std::move(schema);
    }
    if (!j.contains("endpoints") || !j.at("endpoints").is_array() || j.at("endpoints").empty()) {
        bad("scenario needs a non-empty endpoints array");
    }
    std::set<std::string> names;
    for (const auto& ej : j.at("endpoints")) {
        Endpoint ep;
        ep.name = ej.value("name", "");
        if (ep.name.empty()) bad("endpoint needs a name");
        if (!names.insert(ep.name).second) bad("duplicate endpoint name \"" + ep.name + "\"");
        Scope scope;
        scope.scenario = &s;
        scope.endpoint = ep.name;
        for (const auto& pj : ej.value("params", ojson::array())) {
            Param p{pj.at("name").get<std::string>(), param_kind(pj.at("kind").get<std::string>())};
            define_var(scope, p.name, to_var_kind(p.kind));
            ep.params.push_back(std::move(p));
        }
        if (!ej.contains("body")) bad(ep.name + ": endpoint needs a body");
        ep.body = parse_steps(ej.at("body"), scope, s, ep);
        if (ep.body.empty()) bad(ep.name + ": endpoint body is empty");
        if (!always_responds(ep.body)) bad(ep.name + ": some path never responds");
        if (ep.can_fail &&
            std::find(ep.statuses.begin(), ep.statuses.end(), 500) == ep.statuses.end()) {
            ep.statuses.push_back(500);
        }
        std::sort(ep.statuses.begin(), ep.statuses.end());
        s.endpoints.push_back(std::move(ep));
    }
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_scenario(buf.str());
}

std::vector<std::string> list_targets(const Scenario& s) {
    std::vector<std::string> out;
    for (const Endpoint& ep : s.endpoints) {
        for (int b = 1; b <= ep.branch_count; ++b) {
            out.push_back(ep.name + ".branch" + std::to_string(b) + ".true");
            out.push_back(ep.name + ".branch" + std::to_string(b) + ".false");
        }
        for (int status : ep.statuses) {
            out.push_back(ep.name + "." + std::to_string(status));
        }
    }
    return out;
}

const Endpoint* find_endpoint(const Scenario& s, const std::string& name) {
    for (const Endpoint& ep : s.endpoints) {
        if (ep.name == name) return &ep;
    }
    return nullptr;
}

}  // namespace nosqlfuzz
