#include "nosqlfuzz/executor.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>

#include "nosqlfuzz/json_conv.hpp"

namespace nosqlfuzz {

using ojson = nlohmann::ordered_json;

nlohmann::ordered_json testcase_to_json(const TestCase& tc) {
    ojson actions = ojson::array();
    for (const MongoInsertion& ins : tc.insertions) {
        actions.push_back(ojson{{"insert", ojson{{"db", ins.db},
                                                 {"collection", ins.coll},
                                                 {"document", to_json(ins.doc)}}}});
    }
    for (const EndpointCall& call : tc.calls) {
        ojson args = ojson::array();
        for (const Value& v : call.args) args.push_back(to_json(v));
        actions.push_back(ojson{{"call", ojson{{"endpoint", call.endpoint}, {"args", args}}}});
    }
    return ojson{{"actions", actions}};
}

TestCase testcase_from_json(const nlohmann::ordered_json& j) {
    TestCase tc;
    if (!j.is_object() || !j.contains("actions") || !j.at("actions").is_array()) {
        throw ScenarioError("test case needs an actions array");
    }
    for (const auto& a : j.at("actions")) {
        if (a.contains("insert")) {
            if (!tc.calls.empty()) {
                throw ScenarioError("insertions must precede endpoint calls");
            }
            const ojson& spec = a.at("insert");
            tc.insertions.push_back({spec.at("db").get<std::string>(),
                                     spec.at("collection").get<std::string>(),
                                     document_from_json(spec.at("document"))});
        } else if (a.contains("call")) {
            const ojson& spec = a.at("call");
            EndpointCall call;
            call.endpoint = spec.at("endpoint").get<std::string>();
            for (const auto& arg : spec.at("args")) call.args.push_back(value_from_json(arg));
            tc.calls.push_back(std::move(call));
        } else {
            throw ScenarioError("unrecognized test case action");
        }
    }
    if (tc.calls.empty()) throw ScenarioError("test case needs at least one endpoint call");
    return tc;
}

namespace {

struct FindResult {
    std::vector<Document> docs;
    std::size_t record_ordinal = 0;
};

struct PendingEmptiness {
    std::string target;
    int action;
    std::size_t record_ordinal;
};

struct Tracker {
    std::set<std::string> listed;
    ExecutionResult* result;
    std::vector<PendingEmptiness> pending;

    void cover(const std::string& target, int action) {
        if (!listed.count(target)) return;
        auto& score = result->best[target];
        if (score.h < 1.0) {
            score.h = 1.0;
            score.action = action;
        }
        result->covered.insert(target);
    }

    void gradient(const std::string& target, double h, int action) {
        if (!listed.count(target)) return;
        auto& score = result->best[target];
        if (!result->covered.count(target) && h > score.h) {
            score.h = h;
            score.action = action;
        }
    }
};

struct CallCtx {
    const Scenario& scenario;
    const Endpoint& ep;
    DatabaseState& state;
    SchemaRegistry& registry;
    const ExecConfig& cfg;
    Tracker& tracker;
    int action;
    std::map<std::string, Value> vars;
    std::map<std::string, FindResult> finds;
};

Value resolve_arg(const Arg& a, const CallCtx& ctx) {
    if (!a.is_var) return a.literal;
    return ctx.vars.at(a.var);
}

double as_number(const Value& v) {
    switch (v.kind()) {
        case ValueKind::Int32: return v.as_int32();
        case ValueKind::Int64: return static_cast<double>(v.as_int64());
        case ValueKind::Double: return v.as_double();
        case ValueKind::Text: {
            auto cps = utf8_codepoints(v.as_text());
            return cps.empty() ? -1.0 : static_cast<double>(cps[0]);
        }
        default: throw ScenarioError("operand is not numeric");
    }
}

bool is_int_kind(const Value& v) {
    return v.kind() == ValueKind::Int32 || v.kind() == ValueKind::Int64;
}

std::int64_t as_i64(const Value& v) {
    return v.kind() == ValueKind::Int32 ? v.as_int32() : v.as_int64();
}

Value eval_let(const LetStep& s, const CallCtx& ctx) {
    if (s.op == "const") return s.args[0].literal;
    if (s.op == "char_shift") {
        Value base = resolve_arg(s.args[0], ctx);
        Value shift = resolve_arg(s.args[1], ctx);
        auto cps = utf8_codepoints(base.as_text());
        std::int64_t cp = cps.empty() ? 0 : cps[0];
        cp += as_i64(shift);
        cp = std::clamp<std::int64_t>(cp, 0, 0x10ffff);
        return codepoints_to_utf8({static_cast<std::int32_t>(cp)});
    }
    Value a = resolve_arg(s.args[0], ctx);
    Value b = resolve_arg(s.args[1], ctx);
    if (is_int_kind(a) && is_int_kind(b)) {
        std::int64_t x = as_i64(a);
        std::int64_t y = as_i64(b);
        std::int64_t r = 0;
        if (s.op == "add") r = x + y;
        else if (s.op == "sub") r = x - y;
        else if (s.op == "mul") r = x * y;
        else r = (y == 0 || (x == std::numeric_limits<std::int64_t>::min() && y == -1)) ? 0 : x / y;
        return static_cast<std::int32_t>(static_cast<std::uint32_t>(r));
    }
    double x = as_number(a);
    double y = as_number(b);
    if (s.op == "add") return x + y;
    if (s.op == "sub") return x - y;
    if (s.op == "mul") return x * y;
    return x / y;
}

ojson substitute(const ojson& t, const CallCtx& ctx) {
    if (t.is_object()) {
        if (t.size() == 1 && t.items().begin().key() == "$var") {
            return to_json(ctx.vars.at(t.begin()->get<std::string>()));
        }
        ojson out = ojson::object();
        for (const auto& [key, val] : t.items()) out[key] = substitute(val, ctx);
        return out;
    }
    if (t.is_array()) {
        ojson out = ojson::array();
        for (const auto& e : t) out.push_back(substitute(e, ctx));
        return out;
    }
    return t;
}

std::string branch_target(const std::string& ep, int ordinal, bool side) {
    return ep + ".branch" + std::to_string(ordinal) + (side ? ".true" : ".false");
}

RelOp negate_rel(RelOp op) {
    switch (op) {
        case RelOp::Gt: return RelOp::Lte;
        case RelOp::Gte: return RelOp::Lt;
        case RelOp::Lt: return RelOp::Gte;
        case RelOp::Lte: return RelOp::Gt;
        case RelOp::Eq: return RelOp::Ne;
        default: return RelOp::Eq;
    }
}

Distance rel_distance(RelOp op, double x, double y, const DistanceConfig& cfg) {
    return rho(op, Value(x), Value(y), cfg);
}

// Runs steps until a respond; empty result means fall-through.
std::optional<int> exec_steps(const std::vector<Step>& steps, CallCtx& ctx) {
    for (const Step& step : steps) {
        if (const auto* let = std::get_if<LetStep>(&step.node)) {
            ctx.vars[let->var] = eval_let(*let, ctx);
            continue;
        }
        if (const auto* ins = std::get_if<InsertStep>(&step.node)) {
            Document doc = document_from_json(substitute(ins->doc_template, ctx));
            try {
                ctx.state.insert(ins->db, ins->coll, doc);
            } catch (const DuplicateId&) {
                return 500;
            }
            ctx.registry.observe_documents(ins->db, ins->coll, {doc});
            continue;
        }
        if (const auto* find = std::get_if<FindStep>(&step.node)) {
            Filter f = filter_from_json(substitute(find->filter_template, ctx));
            std::vector<Document> docs = ctx.state.find(find->db, find->coll, f);
            ctx.registry.observe_filter(find->db, find->coll, f);
            std::size_t ordinal = ctx.state.records().size() - 1;
            if (docs.empty()) {
                const std::vector<Document>* contents = ctx.state.collection(find->db, find->coll);
                if (contents && !contents->empty()) {
                    ctx.tracker.result->exec_distances[ordinal] =
                        collection_distance(*contents, f, ctx.cfg.distance);
                }
            }
            // Materialize results against the declared shape; a document
            // the endpoint cannot decode aborts the call.
            if (auto schema = ctx.registry.declared(find->db, find->coll)) {
                for (const Document& d : docs) {
                    if (!conforms(d, *schema)) return 500;
                }
            }
            ctx.finds[find->into] = FindResult{std::move(docs), ordinal};
            continue;
        }
        if (const auto* br = std::get_if<BranchStep>(&step.node)) {
            bool taken;
            if (br->pred.kind == Predicate::Kind::NonEmpty) {
                const FindResult& fr = ctx.finds.at(br->pred.var);
                taken = !fr.docs.empty();
                ctx.tracker.cover(branch_target(ctx.ep.name, br->ordinal, taken), ctx.action);
                // The untaken side's gradient needs the post-run distance
                // pass; park it against the find's record.
                ctx.tracker.pending.push_back(
                    {branch_target(ctx.ep.name, br->ordinal, !taken), ctx.action,
                     fr.record_ordinal});
            } else {
                double x = as_number(resolve_arg(br->pred.lhs, ctx));
                double y = as_number(resolve_arg(br->pred.rhs, ctx));
                Distance d_true = rel_distance(br->pred.op, x, y, ctx.cfg.distance);
                taken = d_true == 0.0;
                ctx.tracker.cover(branch_target(ctx.ep.name, br->ordinal, taken), ctx.action);
                Distance d_other = taken ? rel_distance(negate_rel(br->pred.op), x, y, ctx.cfg.distance)
                                         : d_true;
                ctx.tracker.gradient(branch_target(ctx.ep.name, br->ordinal, !taken),
                                     0.99 * (1.0 - nu(d_other)), ctx.action);
            }
            auto status = exec_steps(taken ? br->then_steps : br->else_steps, ctx);
            if (status) return status;
            continue;
        }
        return std::get<RespondStep>(step.node).status;
    }
    return std::nullopt;
}

}  // namespace

ExecutionResult execute(const Scenario& s, const TestCase& tc, DatabaseState& state,
                        SchemaRegistry& registry, const ExecConfig& cfg) {
    state.reset();
    for (const auto& [key, fields] : s.schemas) registry.declare(key.first, key.second, fields);

    ExecutionResult result;
    Tracker tracker;
    tracker.result = &result;
    for (const std::string& t : list_targets(s)) {
        tracker.listed.insert(t);
        result.best.emplace(t, TargetScore{});
    }

    int action = 0;
    for (const MongoInsertion& ins : tc.insertions) {
        state.set_current_action(action);
        try {
            state.insert(ins.db, ins.coll, ins.doc);
            registry.observe_documents(ins.db, ins.coll, {ins.doc});
        } catch (const DuplicateId&) {
            // colliding initialization insert is a no-op
        }
        ++action;
    }
    for (const EndpointCall& call : tc.calls) {
        state.set_current_action(action);
        const Endpoint* ep = find_endpoint(s, call.endpoint);
        if (!ep) throw ScenarioError("unknown endpoint \"" + call.endpoint + "\"");
        if (call.args.size() != ep->params.size()) {
            throw ScenarioError(ep->name + ": expected " + std::to_string(ep->params.size()) +
                                " arguments");
        }
        CallCtx ctx{s, *ep, state, registry, cfg, tracker, action, {}, {}};
        for (std::size_t i = 0; i < ep->params.size(); ++i) {
            const Param& p = ep->params[i];
            const Value& v = call.args[i];
            bool ok = false;
            switch (p.kind) {
                case ParamKind::Int: ok = v.kind() == ValueKind::Int32; break;
                case ParamKind::Double: ok = v.kind() == ValueKind::Double; break;
                case ParamKind::Char:
                    ok = v.kind() == ValueKind::Text && utf8_codepoints(v.as_text()).size() == 1;
                    break;
                case ParamKind::Str: ok = v.kind() == ValueKind::Text; break;
            }
            if (!ok) {
                throw ScenarioError(ep->name + ": argument \"" + p.name + "\" has the wrong kind");
            }
            ctx.vars[p.name] = v;
        }
        auto status = exec_steps(ep->body, ctx);
        int code = status.value_or(200);
        result.responses.push_back(code);
        tracker.cover(ep->name + "." + std::to_string(code), action);
        ++action;
    }

    result.report = state.recompute_distances(cfg.distance);
    for (const PendingEmptiness& p : tracker.pending) {
        Distance rho_eff = cfg.distance.k;
        if (cfg.use_nosql_heuristic) {
            auto it = result.exec_distances.find(p.record_ordinal);
            if (it != result.exec_distances.end()) {
                rho_eff = std::min(it->second, cfg.distance.k);
            }
        }
        tracker.gradient(p.target, 0.99 * (1.0 - nu(rho_eff)), p.action);
    }
    return result;
}

}  // namespace nosqlfuzz
