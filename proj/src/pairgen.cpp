#include "nosqlfuzz/pairgen.hpp"

#include <string>
#include <vector>

namespace nosqlfuzz {

namespace {

const std::vector<std::string> kFieldNames = {"a", "b", "c", "d"};
const std::vector<std::string> kPaths = {"a", "b", "c", "d", "e.f"};
const std::vector<std::string> kWords = {"", "a", "b", "ab", "ba", "bb"};
const std::vector<std::string> kOids = {"0123456789abcdef01234567",
                                        "ffffffffffffffffffffffff"};

Value scalar(Rng& rng) {
    switch (rng.below(9)) {
        case 0: return Value(Null{});
        case 1: return Value(rng.chance(0.5));
        case 2:
        case 3: return Value(static_cast<std::int32_t>(rng.range(-3, 3)));
        case 4: return Value(static_cast<std::int64_t>(rng.range(-3, 3)));
        case 5:
        case 6: return Value(static_cast<double>(rng.range(-6, 6)) / 2.0);
        case 7: return Value(rng.pick(kWords));
        default: return Value(ObjectId(rng.pick(kOids)));
    }
}

Value element(Rng& rng);

Array small_array(Rng& rng) {
    Array a;
    std::uint64_t n = rng.below(4);
    for (std::uint64_t i = 0; i < n; ++i) a.push_back(element(rng));
    return a;
}

Value element(Rng& rng) {
    if (rng.chance(0.15)) return Value(small_array(rng));
    return scalar(rng);
}

Value field_value(Rng& rng) {
    std::uint64_t roll = rng.below(10);
    if (roll < 6) return scalar(rng);
    if (roll < 9) return Value(small_array(rng));
    Document sub;
    sub.set("f", scalar(rng));
    return Value(sub);
}

std::vector<Value> value_list(Rng& rng, std::uint64_t max_len) {
    std::vector<Value> vs;
    std::uint64_t n = rng.below(max_len + 1);
    for (std::uint64_t i = 0; i < n; ++i) vs.push_back(element(rng));
    return vs;
}

const std::vector<std::string> kTypeNames = {"null", "bool",  "int",   "long",  "double",
                                             "string", "array", "object", "objectId"};

Condition random_condition(Rng& rng, int depth) {
    std::uint64_t roll = rng.below(depth > 0 ? 13 : 14);
    switch (roll) {
        case 0: return Condition{Eq{scalar(rng)}};
        case 1: return Condition{Ne{scalar(rng)}};
        case 2: return Condition{Gt{scalar(rng)}};
        case 3: return Condition{Gte{scalar(rng)}};
        case 4: return Condition{Lt{scalar(rng)}};
        case 5: return Condition{Lte{scalar(rng)}};
        case 6: return Condition{In{value_list(rng, 3)}};
        case 7: return Condition{Nin{value_list(rng, 3)}};
        case 8: {
            std::int64_t div = rng.range(1, 4);
            if (rng.chance(0.3)) div = -div;
            return Condition{Mod{div, rng.range(-2, 2)}};
        }
        case 9: return Condition{Exists{rng.chance(0.5)}};
        case 10: return Condition{SizeIs{rng.range(0, 3)}};
        case 11: return Condition{TypeIs{rng.pick(kTypeNames)}};
        case 12: return Condition{All{value_list(rng, 2)}};
        default: return make_not(random_condition(rng, depth + 1));
    }
}

Filter random_filter_at(Rng& rng, int depth) {
    if (depth >= 3 || rng.chance(0.6)) {
        return Filter{FieldClause{FieldPath::parse(rng.pick(kPaths)), random_condition(rng, 0)}};
    }
    std::uint64_t n = rng.range(1, 3);
    std::vector<Filter> clauses;
    for (std::uint64_t i = 0; i < n; ++i) clauses.push_back(random_filter_at(rng, depth + 1));
    switch (rng.below(3)) {
        case 0: return Filter{AndF{std::move(clauses)}};
        case 1: return Filter{OrF{std::move(clauses)}};
        default: return Filter{NorF{std::move(clauses)}};
    }
}

}  // namespace

Document random_document(Rng& rng) {
    Document d;
    for (const std::string& name : kFieldNames) {
        if (rng.chance(0.7)) d.set(name, field_value(rng));
    }
    if (rng.chance(0.5)) {
        Document sub;
        if (rng.chance(0.8)) sub.set("f", field_value(rng));
        d.set("e", Value(sub));
    }
    return d;
}

Filter random_filter(Rng& rng) { return random_filter_at(rng, 0); }

EquivalenceResult run_equivalence_trials(std::size_t trials, std::uint64_t seed,
                                         const DistanceConfig& cfg,
                                         const DocDistanceFn& distance) {
    Rng rng(seed);
    EquivalenceResult result;
    result.trials = trials;
    for (std::size_t i = 0; i < trials; ++i) {
        Document doc = random_document(rng);
        Filter f = random_filter(rng);
        bool m = matches(doc, f);
        Distance hd = distance ? distance(doc, f, cfg) : hd_filter(doc, f, cfg);
        if (m) ++result.matched;
        if ((hd == 0.0) != m) {
            ++result.violations;
            if (!result.first) result.first = EquivalenceViolation{i, doc, f, m, hd};
        }
    }
    return result;
}

}  // namespace nosqlfuzz
