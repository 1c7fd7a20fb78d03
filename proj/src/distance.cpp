#include "nosqlfuzz/distance.hpp"

#include <algorithm>
#include <cmath>

namespace nosqlfuzz {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Distance sanitize(double x) {
    if (std::isnan(x) || x < 0.0) return kMaxDistance;
    return x;
}

bool is_categorical(const Condition& c) {
    return std::holds_alternative<Mod>(c.node) || std::holds_alternative<SizeIs>(c.node) ||
           std::holds_alternative<TypeIs>(c.node) || std::holds_alternative<All>(c.node);
}

}  // namespace

double nu(Distance x) {
    if (!(x < kMaxDistance)) return 1.0;
    return x / (x + 1.0);
}

std::size_t levenshtein(const std::vector<std::int32_t>& a, const std::vector<std::int32_t>& b) {
    if (a.empty()) return b.size();
    if (b.empty()) return a.size();
    std::vector<std::size_t> prev(b.size() + 1);
    std::vector<std::size_t> cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    return levenshtein(utf8_codepoints(a), utf8_codepoints(b));
}

Distance rho(RelOp op, const Value& a, const Value& b, const DistanceConfig& cfg) {
    if (op == RelOp::Ne) return (a == b) ? cfg.k : 0.0;
    if (op == RelOp::Eq) {
        if (auto nums = num_widen(a, b)) {
            return sanitize(std::fabs(nums->first - nums->second));
        }
        if (a.kind() != b.kind()) return kMaxDistance;
        switch (a.kind()) {
            case ValueKind::Null: return 0.0;
            case ValueKind::Bool: return a.as_bool() == b.as_bool() ? 0.0 : cfg.k;
            case ValueKind::ObjectId: return a.as_object_id() == b.as_object_id() ? 0.0 : cfg.k;
            case ValueKind::Text: {
                auto xs = utf8_codepoints(a.as_text());
                auto ys = utf8_codepoints(b.as_text());
                if (cfg.char_as_codepoint && xs.size() == 1 && ys.size() == 1) {
                    return std::fabs(static_cast<double>(xs[0]) - static_cast<double>(ys[0]));
                }
                return static_cast<double>(levenshtein(xs, ys));
            }
            case ValueKind::Array:
            case ValueKind::Doc: return (a == b) ? 0.0 : cfg.k;
            default: return kMaxDistance;
        }
    }
    double x = 0.0;
    double y = 0.0;
    if (auto nums = num_widen(a, b)) {
        x = nums->first;
        y = nums->second;
    } else if (a.kind() == ValueKind::Text && b.kind() == ValueKind::Text) {
        // Order by the first differing codepoint; running out of string
        // sorts below every character.
        auto xs = utf8_codepoints(a.as_text());
        auto ys = utf8_codepoints(b.as_text());
        std::size_t i = 0;
        while (i < xs.size() && i < ys.size() && xs[i] == ys[i]) ++i;
        x = i < xs.size() ? static_cast<double>(xs[i]) : -1.0;
        y = i < ys.size() ? static_cast<double>(ys[i]) : -1.0;
    } else {
        return kMaxDistance;
    }
    switch (op) {
        case RelOp::Gt: return x > y ? 0.0 : sanitize((y - x) + cfg.k);
        case RelOp::Gte: return x >= y ? 0.0 : sanitize((y - x) + cfg.k);
        case RelOp::Lt: return x < y ? 0.0 : sanitize((x - y) + cfg.k);
        case RelOp::Lte: return x <= y ? 0.0 : sanitize((x - y) + cfg.k);
        default: return kMaxDistance;
    }
}

Distance hd_condition(const Document& d, const FieldPath& p, const Condition& c,
                      const DistanceConfig& cfg) {
    if (const auto* e = std::get_if<Exists>(&c.node)) {
        const Value* v = get_path(d, p);
        if (!e->flag) return v ? cfg.k : 0.0;
        if (v) return 0.0;
        const Document* parent = get_parent_doc(d, p);
        if (!parent || parent->empty()) return kMaxDistance;
        auto want = utf8_codepoints(p.last());
        Distance best = kMaxDistance;
        for (const auto& [name, unused] : parent->fields()) {
            (void)unused;
            best = std::min(best, static_cast<Distance>(levenshtein(want, utf8_codepoints(name))));
        }
        return best;
    }
    const Value* v = get_path(d, p);
    if (!v) return absent_verdict(c) ? 0.0 : cfg.missing_field_penalty;
    if (const auto* n = std::get_if<NotCond>(&c.node)) {
        // The inner condition holds exactly when its own distance is 0,
        // so a nonzero inner distance means the negation is satisfied.
        if (hd_condition(d, p, *n->inner, cfg) != 0.0) return 0.0;
        if (is_categorical(*n->inner)) return cfg.k;
        return hd_condition(d, p, negate_condition(*n->inner), cfg);
    }
    return std::visit(
        overloaded{
            [&](const Eq& q) { return rho(RelOp::Eq, *v, q.v, cfg); },
            [&](const Ne& q) { return rho(RelOp::Ne, *v, q.v, cfg); },
            [&](const Gt& q) { return rho(RelOp::Gt, *v, q.v, cfg); },
            [&](const Gte& q) { return rho(RelOp::Gte, *v, q.v, cfg); },
            [&](const Lt& q) { return rho(RelOp::Lt, *v, q.v, cfg); },
            [&](const Lte& q) { return rho(RelOp::Lte, *v, q.v, cfg); },
            [&](const In& q) {
                Distance best = kMaxDistance;
                for (const Value& w : q.vs) best = std::min(best, rho(RelOp::Eq, *v, w, cfg));
                return best;
            },
            [&](const Nin& q) {
                bool member = std::any_of(q.vs.begin(), q.vs.end(),
                                          [&](const Value& w) { return *v == w; });
                return member ? cfg.k : 0.0;
            },
            [&](const Mod& q) {
                auto m = truncated_mod(*v, q.div);
                if (!m) return kMaxDistance;
                return sanitize(std::fabs(static_cast<double>(*m) - static_cast<double>(q.rem)));
            },
            [&](const Exists&) { return kMaxDistance; },  // handled above
            [&](const SizeIs& q) {
                if (v->kind() != ValueKind::Array) return kMaxDistance;
                return sanitize(std::fabs(static_cast<double>(v->as_array().size()) -
                                          static_cast<double>(q.n)));
            },
            [&](const TypeIs& q) { return type_name(*v) == q.name ? 0.0 : cfg.k; },
            [&](const All& q) {
                if (v->kind() != ValueKind::Array) return kMaxDistance;
                const Array& elems = v->as_array();
                double sum = 0.0;
                for (const Value& w : q.vs) {
                    Distance best = kMaxDistance;
                    for (const Value& e : elems) best = std::min(best, rho(RelOp::Eq, e, w, cfg));
                    sum += nu(best);
                }
                return sum;
            },
            [&](const NotCond&) { return kMaxDistance; },  // handled above
        },
        c.node);
}

namespace {

// Distance to making f evaluate false.
Distance hd_negated_filter(const Document& d, const Filter& f, const DistanceConfig& cfg) {
    return std::visit(
        overloaded{
            [&](const FieldClause& fc) {
                return hd_condition(d, fc.path, make_not(fc.cond), cfg);
            },
            [&](const AndF& x) {
                Distance best = kMaxDistance;
                for (const Filter& g : x.clauses) {
                    best = std::min(best, hd_negated_filter(d, g, cfg));
                }
                return best;
            },
            [&](const OrF& x) {
                double sum = 0.0;
                for (const Filter& g : x.clauses) sum += nu(hd_negated_filter(d, g, cfg));
                return sum;
            },
            [&](const NorF& x) {
                Distance best = kMaxDistance;
                for (const Filter& g : x.clauses) best = std::min(best, hd_filter(d, g, cfg));
                return best;
            },
        },
        f.node);
}

}  // namespace

Distance hd_filter(const Document& d, const Filter& f, const DistanceConfig& cfg) {
    return std::visit(
        overloaded{
            [&](const FieldClause& fc) { return hd_condition(d, fc.path, fc.cond, cfg); },
            [&](const AndF& x) {
                double sum = 0.0;
                for (const Filter& g : x.clauses) sum += nu(hd_filter(d, g, cfg));
                return sum;
            },
            [&](const OrF& x) {
                Distance best = kMaxDistance;
                for (const Filter& g : x.clauses) best = std::min(best, hd_filter(d, g, cfg));
                return best;
            },
            [&](const NorF& x) {
                double sum = 0.0;
                for (const Filter& g : x.clauses) sum += nu(hd_negated_filter(d, g, cfg));
                return sum;
            },
        },
        f.node);
}

Distance collection_distance(const std::vector<Document>& docs, const Filter& f,
                             const DistanceConfig& cfg) {
    if (docs.empty()) throw EmptyCollection();
    Distance best = kMaxDistance;
    for (const Document& d : docs) best = std::min(best, hd_filter(d, f, cfg));
    return best;
}

}  // namespace nosqlfuzz
