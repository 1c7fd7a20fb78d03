#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nosqlfuzz/value.hpp"

namespace nosqlfuzz {

enum class FilterErrorKind { UnknownOperator, MalformedFilter, EmptyClauseList };

struct FilterError : std::runtime_error {
    FilterErrorKind kind;
    FilterError(FilterErrorKind k, const std::string& what)
        : std::runtime_error(what), kind(k) {}
};

struct Condition;

struct Eq { Value v; };
struct Ne { Value v; };
struct Gt { Value v; };
struct Gte { Value v; };
struct Lt { Value v; };
struct Lte { Value v; };
struct In { std::vector<Value> vs; };
struct Nin { std::vector<Value> vs; };
struct Mod { std::int64_t div; std::int64_t rem; };
struct Exists { bool flag; };
struct SizeIs { std::int64_t n; };
struct TypeIs { std::string name; };
struct All { std::vector<Value> vs; };
struct NotCond { std::shared_ptr<const Condition> inner; };

struct Condition {
    std::variant<Eq, Ne, Gt, Gte, Lt, Lte, In, Nin, Mod, Exists, SizeIs, TypeIs, All, NotCond> node;
};

struct Filter;

struct FieldClause { FieldPath path; Condition cond; };
struct AndF { std::vector<Filter> clauses; };
struct OrF { std::vector<Filter> clauses; };
struct NorF { std::vector<Filter> clauses; };

struct Filter {
    std::variant<FieldClause, AndF, OrF, NorF> node;
};

Condition make_not(Condition inner);

/// Filter JSON surface syntax. Implicit equality {"x": 17}, operator
/// objects {"x": {"$gt": 1, "$lt": 9}} (multiple operators become an $and
/// of single-condition clauses), $and/$or/$nor over arrays of sub-filters,
/// and $not nested under a field with exactly one inner operator.
Filter parse_filter(std::string_view text);

/// Canonical JSON: every condition spelled with its operator, logical
/// nodes always wrapped ({"$and":[...]}). parse_filter(render_filter(f))
/// is structurally identical to f.
std::string render_filter(const Filter& f);

/// Reference semantics. Numeric pairs compare widened, Text pairs by
/// codepoint sequence, mixed kinds are unordered (Eq false, Ne true).
/// On an absent field, Ne/Nin/Exists(false) hold, everything else fails,
/// and Not flips the inner verdict.
bool matches(const Document& d, const Filter& f);
bool matches_condition(const Document& d, const FieldPath& p, const Condition& c);

/// Eq<->Ne, Gt<->Lte, Gte<->Lt, In<->Nin, Exists(b)<->Exists(!b),
/// Not(c) -> c; Mod/Size/Type/All wrap in Not (no direct complement).
Condition negate_condition(const Condition& c);

/// Truth value of a condition evaluated against an absent field.
bool absent_verdict(const Condition& c);

bool structural_equals(const Condition& a, const Condition& b);
bool structural_equals(const Filter& a, const Filter& b);

/// Numeric value reduced mod div with C-style truncated division, doubles
/// truncated toward zero first. Empty for non-numeric values and doubles
/// outside the 64-bit range (such a value can never satisfy $mod).
std::optional<std::int64_t> truncated_mod(const Value& v, std::int64_t div);

}  // namespace nosqlfuzz
