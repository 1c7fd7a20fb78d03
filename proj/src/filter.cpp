#include "nosqlfuzz/filter.hpp"

#include <algorithm>
#include <cmath>

#include "nosqlfuzz/json_conv.hpp"

namespace nosqlfuzz {

using ojson = nlohmann::ordered_json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

enum class Order { Less, Equal, Greater, Unordered };

Order compare_values(const Value& a, const Value& b) {
    if (auto nums = num_widen(a, b)) {
        auto [x, y] = *nums;
        if (x < y) return Order::Less;
        if (x > y) return Order::Greater;
        return Order::Equal;
    }
    if (a.kind() == ValueKind::Text && b.kind() == ValueKind::Text) {
        auto xs = utf8_codepoints(a.as_text());
        auto ys = utf8_codepoints(b.as_text());
        if (xs < ys) return Order::Less;
        if (ys < xs) return Order::Greater;
        return Order::Equal;
    }
    return Order::Unordered;
}

}  // namespace

bool absent_verdict(const Condition& c) {
    return std::visit(
        overloaded{
            [](const Ne&) { return true; },
            [](const Nin&) { return true; },
            [](const Exists& e) { return !e.flag; },
            [](const NotCond& n) { return !absent_verdict(*n.inner); },
            [](const auto&) { return false; },
        },
        c.node);
}

std::optional<std::int64_t> truncated_mod(const Value& v, std::int64_t div) {
    std::int64_t a = 0;
    switch (v.kind()) {
        case ValueKind::Int32: a = v.as_int32(); break;
        case ValueKind::Int64: a = v.as_int64(); break;
        case ValueKind::Double: {
            double d = std::trunc(v.as_double());
            if (!(d >= -9223372036854775808.0 && d < 9223372036854775808.0)) return std::nullopt;
            a = static_cast<std::int64_t>(d);
            break;
        }
        default: return std::nullopt;
    }
    if (div == 1 || div == -1) return 0;
    return a % div;
}

Condition make_not(Condition inner) {
    return Condition{NotCond{std::make_shared<const Condition>(std::move(inner))}};
}

bool matches_condition(const Document& d, const FieldPath& p, const Condition& c) {
    if (const auto* n = std::get_if<NotCond>(&c.node)) {
        return !matches_condition(d, p, *n->inner);
    }
    const Value* v = get_path(d, p);
    if (const auto* e = std::get_if<Exists>(&c.node)) {
        return e->flag == (v != nullptr);
    }
    if (!v) return absent_verdict(c);
    return std::visit(
        overloaded{
            [&](const Eq& q) { return *v == q.v; },
            [&](const Ne& q) { return !(*v == q.v); },
            [&](const Gt& q) { return compare_values(*v, q.v) == Order::Greater; },
            [&](const Gte& q) {
                Order o = compare_values(*v, q.v);
                return o == Order::Greater || o == Order::Equal;
            },
            [&](const Lt& q) { return compare_values(*v, q.v) == Order::Less; },
            [&](const Lte& q) {
                Order o = compare_values(*v, q.v);
                return o == Order::Less || o == Order::Equal;
            },
            [&](const In& q) {
                return std::any_of(q.vs.begin(), q.vs.end(), [&](const Value& w) { return *v == w; });
            },
            [&](const Nin& q) {
                return std::none_of(q.vs.begin(), q.vs.end(), [&](const Value& w) { return *v == w; });
            },
            [&](const Mod& q) {
                auto m = truncated_mod(*v, q.div);
                return m.has_value() && *m == q.rem;
            },
            [&](const Exists&) { return false; },  // handled above
            [&](const SizeIs& q) {
                return v->kind() == ValueKind::Array &&
                       static_cast<std::int64_t>(v->as_array().size()) == q.n;
            },
            [&](const TypeIs& q) { return type_name(*v) == q.name; },
            [&](const All& q) {
                if (v->kind() != ValueKind::Array) return false;
                const Array& elems = v->as_array();
                return std::all_of(q.vs.begin(), q.vs.end(), [&](const Value& w) {
                    return std::any_of(elems.begin(), elems.end(),
                                       [&](const Value& e) { return e == w; });
                });
            },
            [&](const NotCond&) { return false; },  // handled above
        },
        c.node);
}

bool matches(const Document& d, const Filter& f) {
    return std::visit(
        overloaded{
            [&](const FieldClause& fc) { return matches_condition(d, fc.path, fc.cond); },
            [&](const AndF& a) {
                return std::all_of(a.clauses.begin(), a.clauses.end(),
                                   [&](const Filter& g) { return matches(d, g); });
            },
            [&](const OrF& o) {
                return std::any_of(o.clauses.begin(), o.clauses.end(),
                                   [&](const Filter& g) { return matches(d, g); });
            },
            [&](const NorF& n) {
                return std::none_of(n.clauses.begin(), n.clauses.end(),
                                    [&](const Filter& g) { return matches(d, g); });
            },
        },
        f.node);
}

Condition negate_condition(const Condition& c) {
    return std::visit(
        overloaded{
            [](const Eq& q) { return Condition{Ne{q.v}}; },
            [](const Ne& q) { return Condition{Eq{q.v}}; },
            [](const Gt& q) { return Condition{Lte{q.v}}; },
            [](const Gte& q) { return Condition{Lt{q.v}}; },
            [](const Lt& q) { return Condition{Gte{q.v}}; },
            [](const Lte& q) { return Condition{Gt{q.v}}; },
            [](const In& q) { return Condition{Nin{q.vs}}; },
            [](const Nin& q) { return Condition{In{q.vs}}; },
            [](const Exists& q) { return Condition{Exists{!q.flag}}; },
            [](const NotCond& n) { return *n.inner; },
            [](const Mod& q) { return make_not(Condition{q}); },
            [](const SizeIs& q) { return make_not(Condition{q}); },
            [](const TypeIs& q) { return make_not(Condition{q}); },
            [](const All& q) { return make_not(Condition{q}); },
        },
        c.node);
}

namespace {

bool values_structural(const std::vector<Value>& a, const std::vector<Value>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!structural_equals(a[i], b[i])) return false;
    }
    return true;
}

}  // namespace

bool structural_equals(const Condition& a, const Condition& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        overloaded{
            [&](const Eq& q) { return structural_equals(q.v, std::get<Eq>(b.node).v); },
            [&](const Ne& q) { return structural_equals(q.v, std::get<Ne>(b.node).v); },
            [&](const Gt& q) { return structural_equals(q.v, std::get<Gt>(b.node).v); },
            [&](const Gte& q) { return structural_equals(q.v, std::get<Gte>(b.node).v); },
            [&](const Lt& q) { return structural_equals(q.v, std::get<Lt>(b.node).v); },
            [&](const Lte& q) { return structural_equals(q.v, std::get<Lte>(b.node).v); },
            [&](const In& q) { return values_structural(q.vs, std::get<In>(b.node).vs); },
            [&](const Nin& q) { return values_structural(q.vs, std::get<Nin>(b.node).vs); },
            [&](const Mod& q) {
                const auto& o = std::get<Mod>(b.node);
                return q.div == o.div && q.rem == o.rem;
            },
            [&](const Exists& q) { return q.flag == std::get<Exists>(b.node).flag; },
            [&](const SizeIs& q) { return q.n == std::get<SizeIs>(b.node).n; },
            [&](const TypeIs& q) { return q.name == std::get<TypeIs>(b.node).name; },
            [&](const All& q) { return values_structural(q.vs, std::get<All>(b.node).vs); },
            [&](const NotCond& q) {
                return structural_equals(*q.inner, *std::get<NotCond>(b.node).inner);
            },
        },
        a.node);
}

bool structural_equals(const Filter& a, const Filter& b) {
    if (a.node.index() != b.node.index()) return false;
    auto lists = [](const std::vector<Filter>& xs, const std::vector<Filter>& ys) {
        if (xs.size() != ys.size()) return false;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!structural_equals(xs[i], ys[i])) return false;
        }
        return true;
    };
    return std::visit(
        overloaded{
            [&](const FieldClause& fc) {
                const auto& o = std::get<FieldClause>(b.node);
                return fc.path == o.path && structural_equals(fc.cond, o.cond);
            },
            [&](const AndF& x) { return lists(x.clauses, std::get<AndF>(b.node).clauses); },
            [&](const OrF& x) { return lists(x.clauses, std::get<OrF>(b.node).clauses); },
            [&](const NorF& x) { return lists(x.clauses, std::get<NorF>(b.node).clauses); },
        },
        a.node);
}

namespace {

[[noreturn]] void malformed(const std::string& what) {
    throw FilterError(FilterErrorKind::MalformedFilter, what);
}

const char* const kConditionOps[] = {"$eq",  "$ne",  "$gt",   "$gte",    "$lt",
                                     "$lte", "$in",  "$nin",  "$mod",    "$exists",
                                     "$size", "$type", "$all", "$not"};

bool is_condition_op(const std::string& key) {
    return std::find(std::begin(kConditionOps), std::end(kConditionOps), key) !=
           std::end(kConditionOps);
}

bool is_value_wrapper(const ojson& j) {
    if (!j.is_object() || j.size() != 1) return false;
    const std::string& key = j.items().begin().key();
    return key == "$oid" || key == "$long";
}

bool is_operator_object(const ojson& j) {
    if (!j.is_object() || j.empty() || is_value_wrapper(j)) return false;
    bool any_op = false;
    for (const auto& [key, val] : j.items()) {
        (void)val;
        if (!key.empty() && key[0] == '$') any_op = true;
    }
    if (!any_op) return false;
    for (const auto& [key, val] : j.items()) {
        (void)val;
        if (key.empty() || key[0] != '$') {
            malformed("cannot mix operators and literal fields under one path");
        }
    }
    return true;
}

std::int64_t integer_operand(const ojson& j, const char* op) {
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_unsigned()) {
        std::uint64_t u = j.get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(INT64_MAX)) malformed(std::string(op) + " operand too large");
        return static_cast<std::int64_t>(u);
    }
    if (j.is_number_float()) return static_cast<std::int64_t>(std::trunc(j.get<double>()));
    malformed(std::string(op) + " operand must be a number");
}

std::vector<Value> value_list(const ojson& j, const char* op) {
    if (!j.is_array()) malformed(std::string(op) + " takes an array");
    std::vector<Value> out;
    out.reserve(j.size());
    for (const auto& e : j) out.push_back(value_from_json(e));
    return out;
}

Condition condition_from_op(const std::string& op, const ojson& operand) {
    if (op == "$eq") return Condition{Eq{value_from_json(operand)}};
    if (op == "$ne") return Condition{Ne{value_from_json(operand)}};
    if (op == "$gt") return Condition{Gt{value_from_json(operand)}};
    if (op == "$gte") return Condition{Gte{value_from_json(operand)}};
    if (op == "$lt") return Condition{Lt{value_from_json(operand)}};
    if (op == "$lte") return Condition{Lte{value_from_json(operand)}};
    if (op == "$in") return Condition{In{value_list(operand, "$in")}};
    if (op == "$nin") return Condition{Nin{value_list(operand, "$nin")}};
    if (op == "$all") return Condition{All{value_list(operand, "$all")}};
    if (op == "$mod") {
        if (!operand.is_array() || operand.size() != 2) malformed("$mod takes [divisor, remainder]");
        std::int64_t div = integer_operand(operand[0], "$mod");
        std::int64_t rem = integer_operand(operand[1], "$mod");
        if (div == 0) malformed("$mod divisor must be nonzero");
        return Condition{Mod{div, rem}};
    }
    if (op == "$exists") {
        if (!operand.is_boolean()) malformed("$exists takes a boolean");
        return Condition{Exists{operand.get<bool>()}};
    }
    if (op == "$size") {
        std::int64_t n = integer_operand(operand, "$size");
        if (n < 0) malformed("$size must be non-negative");
        return Condition{SizeIs{n}};
    }
    if (op == "$type") {
        if (!operand.is_string()) malformed("$type takes a type name string");
        std::string name = operand.get<std::string>();
        if (!is_canonical_type_name(name)) malformed("unknown type name \"" + name + "\"");
        return Condition{TypeIs{std::move(name)}};
    }
    if (op == "$not") {
        if (!operand.is_object() || operand.size() != 1) {
            malformed("$not takes an object with exactly one operator");
        }
        const std::string& inner_op = operand.items().begin().key();
        if (inner_op.empty() || inner_op[0] != '$') malformed("$not operand must be an operator");
        return make_not(condition_from_op(inner_op, *operand.begin()));
    }
    throw FilterError(FilterErrorKind::UnknownOperator, "unsupported operator \"" + op + "\"");
}

FieldPath parse_clause_path(const std::string& key) {
    FieldPath p = FieldPath::parse(key);
    for (const std::string& seg : p.segments()) {
        if (seg.empty()) malformed("empty path segment in \"" + key + "\"");
        if (seg[0] == '$') malformed("path segment cannot start with $: \"" + key + "\"");
    }
    return p;
}

void append_field_clauses(std::vector<Filter>& out, const std::string& key, const ojson& val) {
    FieldPath path = parse_clause_path(key);
    if (is_operator_object(val)) {
        for (const auto& [op, operand] : val.items()) {
            // built before the aggregate so a parse failure cannot strand
            // the path copy half-initialized
            Condition cond = condition_from_op(op, operand);
            out.push_back(Filter{FieldClause{path, std::move(cond)}});
        }
        return;
    }
    Condition cond{Eq{value_from_json(val)}};
    out.push_back(Filter{FieldClause{std::move(path), std::move(cond)}});
}

}  // namespace

Filter filter_from_json(const ojson& j) {
    if (!j.is_object()) malformed("filter must be a JSON object");
    std::vector<Filter> clauses;
    for (const auto& [key, val] : j.items()) {
        if (!key.empty() && key[0] == '$') {
            if (key == "$and" || key == "$or" || key == "$nor") {
                if (!val.is_array()) malformed(key + " takes an array of sub-filters");
                if (val.empty()) {
                    throw FilterError(FilterErrorKind::EmptyClauseList, key + " list is empty");
                }
                std::vector<Filter> subs;
                subs.reserve(val.size());
                for (const auto& e : val) subs.push_back(filter_from_json(e));
                if (key == "$and") clauses.push_back(Filter{AndF{std::move(subs)}});
                else if (key == "$or") clauses.push_back(Filter{OrF{std::move(subs)}});
                else clauses.push_back(Filter{NorF{std::move(subs)}});
            } else if (is_condition_op(key)) {
                malformed(key + " cannot appear at the top level of a filter");
            } else {
                throw FilterError(FilterErrorKind::UnknownOperator,
                                  "unsupported operator \"" + key + "\"");
            }
        } else {
            append_field_clauses(clauses, key, val);
        }
    }
    if (clauses.empty()) {
        throw FilterError(FilterErrorKind::EmptyClauseList, "filter has no clauses");
    }
    if (clauses.size() == 1) return std::move(clauses.front());
    return Filter{AndF{std::move(clauses)}};
}

namespace {

ojson condition_to_json(const Condition& c) {
    return std::visit(
        overloaded{
            [](const Eq& q) { return ojson{{"$eq", to_json(q.v)}}; },
            [](const Ne& q) { return ojson{{"$ne", to_json(q.v)}}; },
            [](const Gt& q) { return ojson{{"$gt", to_json(q.v)}}; },
            [](const Gte& q) { return ojson{{"$gte", to_json(q.v)}}; },
            [](const Lt& q) { return ojson{{"$lt", to_json(q.v)}}; },
            [](const Lte& q) { return ojson{{"$lte", to_json(q.v)}}; },
            [](const In& q) {
                ojson arr = ojson::array();
                for (const Value& v : q.vs) arr.push_back(to_json(v));
                return ojson{{"$in", arr}};
            },
            [](const Nin& q) {
                ojson arr = ojson::array();
                for (const Value& v : q.vs) arr.push_back(to_json(v));
                return ojson{{"$nin", arr}};
            },
            [](const All& q) {
                ojson arr = ojson::array();
                for (const Value& v : q.vs) arr.push_back(to_json(v));
                return ojson{{"$all", arr}};
            },
            [](const Mod& q) { return ojson{{"$mod", ojson::array({q.div, q.rem})}}; },
            [](const Exists& q) { return ojson{{"$exists", q.flag}}; },
            [](const SizeIs& q) { return ojson{{"$size", q.n}}; },
            [](const TypeIs& q) { return ojson{{"$type", q.name}}; },
            [](const NotCond& q) { return ojson{{"$not", condition_to_json(*q.inner)}}; },
        },
        c.node);
}

}  // namespace

ojson filter_to_json(const Filter& f) {
    return std::visit(
        overloaded{
            [](const FieldClause& fc) {
                return ojson{{fc.path.render(), condition_to_json(fc.cond)}};
            },
            [](const AndF& x) {
                ojson arr = ojson::array();
                for (const Filter& g : x.clauses) arr.push_back(filter_to_json(g));
                return ojson{{"$and", arr}};
            },
            [](const OrF& x) {
                ojson arr = ojson::array();
                for (const Filter& g : x.clauses) arr.push_back(filter_to_json(g));
                return ojson{{"$or", arr}};
            },
            [](const NorF& x) {
                ojson arr = ojson::array();
                for (const Filter& g : x.clauses) arr.push_back(filter_to_json(g));
                return ojson{{"$nor", arr}};
            },
        },
        f.node);
}

Filter parse_filter(std::string_view text) {
    ojson j = ojson::parse(text, nullptr, false);
    if (j.is_discarded()) malformed("filter is not valid JSON");
    return filter_from_json(j);
}

std::string render_filter(const Filter& f) { return filter_to_json(f).dump(); }

}  // namespace nosqlfuzz
