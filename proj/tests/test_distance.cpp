#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nosqlfuzz/distance.hpp"
#include "nosqlfuzz/pairgen.hpp"
#include "nosqlfuzz/rng.hpp"

using namespace nosqlfuzz;

namespace {

const DistanceConfig kCfg;  // defaults: k = 1, missing field = MAX, char rule on

Distance cond_dist(const Document& d, const char* path, Condition c) {
    return hd_condition(d, FieldPath::parse(path), c, kCfg);
}

}  // namespace

TEST_CASE("nu squashes distances into the unit interval") {
    CHECK(nu(0.0) == 0.0);
    CHECK(nu(1.0) == 0.5);
    CHECK(nu(25.0) == doctest::Approx(25.0 / 26.0));
    CHECK(nu(kMaxDistance) == 1.0);

    Rng rng(1);
    double prev = -1.0;
    for (double x = 0.0; x < 50.0; x += 0.7) {
        double y = nu(x);
        CHECK(y > prev);
        CHECK(y < 1.0);
        prev = y;
    }
}

TEST_CASE("levenshtein counts codepoint edits") {
    CHECK(levenshtein("kitten", "sitting") == 3);
    CHECK(levenshtein("", "abc") == 3);
    CHECK(levenshtein("abc", "") == 3);
    CHECK(levenshtein("same", "same") == 0);
    CHECK(levenshtein("b", "c") == 1);
    CHECK(levenshtein("ab", "b") == 1);
    // multi-byte characters count as single symbols
    CHECK(levenshtein("\xc3\xa9", "e") == 1);
    CHECK(levenshtein("caf\xc3\xa9", "cafe") == 1);
}

TEST_CASE("rho follows the relational distance table") {
    SUBCASE("satisfied comparisons are zero") {
        CHECK(rho(RelOp::Gt, Value(5), Value(3), kCfg) == 0.0);
        CHECK(rho(RelOp::Gte, Value(3), Value(3), kCfg) == 0.0);
        CHECK(rho(RelOp::Lt, Value(3), Value(5), kCfg) == 0.0);
        CHECK(rho(RelOp::Lte, Value(5), Value(5), kCfg) == 0.0);
        CHECK(rho(RelOp::Eq, Value(42), Value(42), kCfg) == 0.0);
        CHECK(rho(RelOp::Ne, Value(1), Value(2), kCfg) == 0.0);
    }
    SUBCASE("unsatisfied comparisons gap plus k") {
        CHECK(rho(RelOp::Gte, Value(42), Value(100), kCfg) == 59.0);
        CHECK(rho(RelOp::Gt, Value(3), Value(3), kCfg) == 1.0);
        CHECK(rho(RelOp::Gt, Value(2), Value(3), kCfg) == 2.0);
        CHECK(rho(RelOp::Lt, Value(5), Value(5), kCfg) == 1.0);
        CHECK(rho(RelOp::Lte, Value(42), Value(10), kCfg) == 33.0);
        CHECK(rho(RelOp::Ne, Value(2), Value(2), kCfg) == 1.0);
    }
    SUBCASE("equality distance is the numeric gap") {
        CHECK(rho(RelOp::Eq, Value(42), Value(17), kCfg) == 25.0);
        CHECK(rho(RelOp::Eq, Value(1.5), Value(-1.5), kCfg) == 3.0);
        CHECK(rho(RelOp::Eq, Value(42), Value(42.0), kCfg) == 0.0);
        CHECK(rho(RelOp::Eq, Value(std::int64_t{1} << 62), Value(0.0), kCfg) ==
              4611686018427387904.0);
    }
    SUBCASE("a larger k scales the constant part") {
        DistanceConfig big;
        big.k = 10.0;
        CHECK(rho(RelOp::Gte, Value(42), Value(100), big) == 68.0);
        CHECK(rho(RelOp::Ne, Value(2), Value(2), big) == 10.0);
    }
    SUBCASE("non-numeric equality") {
        CHECK(rho(RelOp::Eq, Value(Null{}), Value(Null{}), kCfg) == 0.0);
        CHECK(rho(RelOp::Eq, Value(true), Value(true), kCfg) == 0.0);
        CHECK(rho(RelOp::Eq, Value(true), Value(false), kCfg) == 1.0);
        CHECK(rho(RelOp::Eq, Value("a"), Value(1), kCfg) == kMaxDistance);
        ObjectId a("0123456789abcdef01234567");
        ObjectId b("ffffffffffffffffffffffff");
        CHECK(rho(RelOp::Eq, Value(a), Value(a), kCfg) == 0.0);
        CHECK(rho(RelOp::Eq, Value(a), Value(b), kCfg) == 1.0);
        Array xs{Value(1), Value(2)};
        CHECK(rho(RelOp::Eq, Value(xs), Value(xs), kCfg) == 0.0);
        CHECK(rho(RelOp::Eq, Value(xs), Value(Array{Value(1)}), kCfg) == 1.0);
    }
}

TEST_CASE("rho on text pairs") {
    // single characters compare by codepoint gap, longer strings by edit count
    CHECK(rho(RelOp::Eq, Value("b"), Value("c"), kCfg) == 1.0);
    CHECK(rho(RelOp::Eq, Value("b"), Value("f"), kCfg) == 4.0);
    CHECK(rho(RelOp::Eq, Value("ab"), Value("ba"), kCfg) == 2.0);
    CHECK(rho(RelOp::Eq, Value("abc"), Value("abd"), kCfg) == 1.0);

    DistanceConfig lev;
    lev.char_as_codepoint = false;
    CHECK(rho(RelOp::Eq, Value("b"), Value("f"), lev) == 1.0);

    // ordering by first differing codepoint; end of string sorts lowest
    CHECK(rho(RelOp::Lt, Value("a"), Value("b"), kCfg) == 0.0);
    CHECK(rho(RelOp::Gt, Value("a"), Value("b"), kCfg) == 2.0);
    CHECK(rho(RelOp::Gt, Value("ab"), Value("a"), kCfg) == 0.0);
    CHECK(rho(RelOp::Lt, Value("ab"), Value("a"), kCfg) == 100.0);
    CHECK(rho(RelOp::Gte, Value("ba"), Value("bb"), kCfg) == 2.0);
    // mixed kinds have no ordering
    CHECK(rho(RelOp::Gt, Value("a"), Value(1), kCfg) == kMaxDistance);
}

TEST_CASE("hd_condition scores each operator") {
    Document v42{{"v", Value(42)}};
    SUBCASE("equality family") {
        CHECK(cond_dist(v42, "v", Condition{Eq{Value(17)}}) == 25.0);
        CHECK(cond_dist(v42, "v", Condition{Ne{Value(42)}}) == 1.0);
        CHECK(cond_dist(v42, "v", Condition{Ne{Value(1)}}) == 0.0);
        CHECK(cond_dist(v42, "v", Condition{Gte{Value(100)}}) == 59.0);
    }
    SUBCASE("membership") {
        Document v25{{"v", Value(25)}};
        CHECK(cond_dist(v25, "v", Condition{In{{Value(17), Value(50)}}}) == 8.0);
        CHECK(cond_dist(v25, "v", Condition{In{{Value(25), Value(50)}}}) == 0.0);
        CHECK(cond_dist(v25, "v", Condition{In{{}}}) == kMaxDistance);
        CHECK(cond_dist(v42, "v", Condition{Nin{{Value(42)}}}) == 1.0);
        CHECK(cond_dist(v42, "v", Condition{Nin{{Value(1)}}}) == 0.0);
        CHECK(cond_dist(v42, "v", Condition{Nin{{}}}) == 0.0);
    }
    SUBCASE("mod, size, type") {
        CHECK(cond_dist(v42, "v", Condition{Mod{5, 0}}) == 2.0);
        CHECK(cond_dist(v42, "v", Condition{Mod{5, 2}}) == 0.0);
        Document s{{"v", Value("x")}};
        CHECK(cond_dist(s, "v", Condition{Mod{5, 0}}) == kMaxDistance);
        Document arr{{"v", Value(Array{Value(1), Value(2)})}};
        CHECK(cond_dist(arr, "v", Condition{SizeIs{5}}) == 3.0);
        CHECK(cond_dist(arr, "v", Condition{SizeIs{2}}) == 0.0);
        CHECK(cond_dist(v42, "v", Condition{SizeIs{2}}) == kMaxDistance);
        CHECK(cond_dist(v42, "v", Condition{TypeIs{"string"}}) == 1.0);
        CHECK(cond_dist(v42, "v", Condition{TypeIs{"int"}}) == 0.0);
    }
    SUBCASE("all sums normalized element distances") {
        Document arr{{"a", Value(Array{Value(1), Value(5)})}};
        CHECK(cond_dist(arr, "a", Condition{All{{Value(2), Value(5)}}}) == 0.5);
        CHECK(cond_dist(arr, "a", Condition{All{{Value(1), Value(5)}}}) == 0.0);
        CHECK(cond_dist(arr, "a", Condition{All{{}}}) == 0.0);
        Document v{{"a", Value(3)}};
        CHECK(cond_dist(v, "a", Condition{All{{Value(1)}}}) == kMaxDistance);
    }
    SUBCASE("exists true looks for the nearest field name") {
        CHECK(cond_dist(v42, "v", Condition{Exists{true}}) == 0.0);
        Document w{{"w", Value(5)}};
        CHECK(cond_dist(w, "v", Condition{Exists{true}}) == 1.0);
        Document far{{"hello", Value(5)}};
        CHECK(cond_dist(far, "v", Condition{Exists{true}}) == 5.0);
        CHECK(cond_dist(Document{}, "v", Condition{Exists{true}}) == kMaxDistance);
    }
    SUBCASE("exists false") {
        CHECK(cond_dist(v42, "v", Condition{Exists{false}}) == 1.0);
        CHECK(cond_dist(Document{}, "v", Condition{Exists{false}}) == 0.0);
    }
    SUBCASE("not negates, categorically when there is no complement") {
        CHECK(cond_dist(v42, "v", make_not(Condition{Lt{Value(100)}})) == 59.0);
        CHECK(cond_dist(v42, "v", make_not(Condition{Eq{Value(42)}})) == 1.0);
        CHECK(cond_dist(v42, "v", make_not(Condition{Eq{Value(17)}})) == 0.0);
        CHECK(cond_dist(v42, "v", make_not(Condition{Mod{2, 0}})) == 1.0);
        CHECK(cond_dist(v42, "v", make_not(Condition{Mod{2, 1}})) == 0.0);
        CHECK(cond_dist(v42, "v", make_not(Condition{TypeIs{"int"}})) == 1.0);
    }
    SUBCASE("missing fields cost the configured penalty") {
        CHECK(cond_dist(v42, "w", Condition{Eq{Value(1)}}) == kMaxDistance);
        CHECK(cond_dist(v42, "w", Condition{Ne{Value(1)}}) == 0.0);
        CHECK(cond_dist(v42, "w", Condition{Nin{{Value(1)}}}) == 0.0);
        DistanceConfig soft;
        soft.missing_field_penalty = 7.0;
        CHECK(hd_condition(v42, FieldPath::parse("w"), Condition{Eq{Value(1)}}, soft) == 7.0);
    }
}

TEST_CASE("hd_filter aggregates clause distances") {
    Document doc{{"x", Value(42)}, {"y", Value("b")}, {"z", Value(1.0)}};
    SUBCASE("a conjunction sums normalized distances") {
        Filter f = parse_filter(R"({"x":{"$eq":17},"y":{"$eq":"c"}})");
        double expect = 25.0 / 26.0 + 0.5;
        CHECK(std::fabs(hd_filter(doc, f, kCfg) - expect) <= 1e-9);
        CHECK(std::fabs(hd_filter(doc, f, kCfg) - 1.4615384615384617) <= 1e-9);
    }
    SUBCASE("the three-clause example") {
        Filter f = parse_filter(R"({"x":82,"y":"b","z":-1.0})");
        double expect = 40.0 / 41.0 + 0.0 + 2.0 / 3.0;
        CHECK(std::fabs(hd_filter(doc, f, kCfg) - expect) <= 1e-9);
    }
    SUBCASE("a disjunction takes the closest clause") {
        Filter f = parse_filter(R"({"$or":[{"x":{"$eq":44}},{"x":{"$eq":100}}]})");
        CHECK(hd_filter(doc, f, kCfg) == 2.0);
    }
    SUBCASE("nor sums normalized negated distances") {
        Filter f = parse_filter(R"({"$nor":[{"x":{"$eq":42}}]})");
        CHECK(hd_filter(doc, f, kCfg) == 0.5);  // nu of the Ne distance k
        Filter g = parse_filter(R"({"$nor":[{"x":{"$eq":41}}]})");
        CHECK(hd_filter(doc, g, kCfg) == 0.0);
    }
    SUBCASE("zero exactly when the filter matches") {
        CHECK(hd_filter(doc, parse_filter(R"({"x":42,"y":"b","z":1.0})"), kCfg) == 0.0);
        CHECK(hd_filter(doc, parse_filter(R"({"x":{"$gt":41}})"), kCfg) == 0.0);
        CHECK(hd_filter(doc, parse_filter(R"({"w":{"$exists":false}})"), kCfg) == 0.0);
    }
}

TEST_CASE("collection distance takes the best document") {
    Filter f = parse_filter(R"({"x":{"$eq":42}})");
    std::vector<Document> docs{Document{{"x", Value(40)}}, Document{{"x", Value(100)}}};
    CHECK(collection_distance(docs, f, kCfg) == 2.0);

    docs.push_back(Document{{"x", Value(42)}});
    CHECK(collection_distance(docs, f, kCfg) == 0.0);

    CHECK_THROWS_AS(collection_distance({}, f, kCfg), EmptyCollection);

    // adding a document never increases the distance
    Rng rng(606);
    for (int i = 0; i < 400; ++i) {
        Filter g = random_filter(rng);
        std::vector<Document> pool{random_document(rng)};
        Distance prev = collection_distance(pool, g, kCfg);
        for (int j = 0; j < 3; ++j) {
            pool.push_back(random_document(rng));
            Distance cur = collection_distance(pool, g, kCfg);
            CHECK(cur <= prev);
            prev = cur;
        }
    }
}

TEST_CASE("distance is zero exactly on matching pairs") {
    EquivalenceResult r = run_equivalence_trials(20000, 3, kCfg);
    CHECK(r.trials == 20000);
    CHECK(r.violations == 0);
    CHECK(r.matched > 1000);          // the generator hits both outcomes
    CHECK(r.matched < r.trials);
    CHECK_FALSE(r.first.has_value());
}

TEST_CASE("the equivalence harness catches a broken engine") {
    // constant nonzero distance: every matching pair is a violation
    DocDistanceFn always_one = [](const Document&, const Filter&, const DistanceConfig&) {
        return Distance{1.0};
    };
    EquivalenceResult r1 = run_equivalence_trials(5000, 9, kCfg, always_one);
    CHECK(r1.violations == r1.matched);
    CHECK(r1.violations > 0);
    REQUIRE(r1.first.has_value());
    CHECK(r1.first->matched);
    CHECK(r1.first->hd == 1.0);

    // constant zero distance: every non-matching pair is a violation
    DocDistanceFn always_zero = [](const Document&, const Filter&, const DistanceConfig&) {
        return Distance{0.0};
    };
    EquivalenceResult r0 = run_equivalence_trials(5000, 9, kCfg, always_zero);
    CHECK(r0.violations == r0.trials - r0.matched);
    CHECK(r0.violations > 0);
}

TEST_CASE("fixed stores give hand-computed operator distances") {
    struct Row {
        const char* filter;
        Document doc;
        double expect;
    };
    const Row rows[] = {
        {R"({"v":{"$eq":42}})", Document{{"v", Value(17)}}, 25.0},
        {R"({"v":{"$ne":42}})", Document{{"v", Value(42)}}, 1.0},
        {R"({"v":{"$gt":100}})", Document{{"v", Value(100)}}, 1.0},
        {R"({"v":{"$gte":100}})", Document{{"v", Value(42)}}, 59.0},
        {R"({"v":{"$lt":10}})", Document{{"v", Value(10)}}, 1.0},
        {R"({"v":{"$lte":10}})", Document{{"v", Value(42)}}, 33.0},
        {R"({"v":{"$in":[25,50]}})", Document{{"v", Value(33)}}, 8.0},
        {R"({"v":{"$nin":[42]}})", Document{{"v", Value(42)}}, 1.0},
        {R"({"v":{"$mod":[5,0]}})", Document{{"v", Value(42)}}, 2.0},
        {R"({"v":{"$exists":true}})", Document{{"w", Value(5)}}, 1.0},
        {R"({"v":{"$exists":false}})", Document{{"v", Value(42)}}, 1.0},
        {R"({"v":{"$size":2}})",
         Document{{"v", Value(Array{Value(1), Value(2), Value(3), Value(4), Value(5)})}}, 3.0},
        {R"({"v":{"$type":"string"}})", Document{{"v", Value(42)}}, 1.0},
        {R"({"v":{"$all":[1,2]}})", Document{{"v", Value(Array{Value(1), Value(5)})}}, 0.5},
        {R"({"v":{"$not":{"$lt":100}}})", Document{{"v", Value(42)}}, 59.0},
    };
    for (const Row& row : rows) {
        CAPTURE(row.filter);
        Filter f = parse_filter(row.filter);
        CHECK_FALSE(matches(row.doc, f));
        Distance got = collection_distance({row.doc}, f, kCfg);
        CHECK(std::fabs(got - row.expect) <= 1e-9);
    }
}
