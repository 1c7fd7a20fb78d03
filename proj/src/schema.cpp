#include "nosqlfuzz/schema.hpp"

#include <algorithm>
#include <array>

namespace nosqlfuzz {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_canonical(const std::map<std::string, std::string>& fields) {
    for (const auto& [name, type] : fields) {
        if (!is_canonical_type_name(type)) {
            throw ValueError("unknown type name \"" + type + "\" for field \"" + name + "\"");
        }
    }
}

std::optional<std::string> value_type_hint(const Value& v) {
    return std::string(type_name(v));
}

// Field types a condition pins down, for last-resort inference.
std::optional<std::string> condition_type_hint(const Condition& c) {
    return std::visit(
        overloaded{
            [](const Eq& q) { return value_type_hint(q.v); },
            [](const Gt& q) { return value_type_hint(q.v); },
            [](const Gte& q) { return value_type_hint(q.v); },
            [](const Lt& q) { return value_type_hint(q.v); },
            [](const Lte& q) { return value_type_hint(q.v); },
            [](const In& q) -> std::optional<std::string> {
                if (q.vs.empty()) return std::nullopt;
                auto first = value_type_hint(q.vs.front());
                for (const Value& v : q.vs) {
                    if (value_type_hint(v) != first) return std::nullopt;
                }
                return first;
            },
            [](const Mod&) -> std::optional<std::string> { return "int"; },
            [](const SizeIs&) -> std::optional<std::string> { return "array"; },
            [](const All&) -> std::optional<std::string> { return "array"; },
            [](const TypeIs& q) -> std::optional<std::string> { return q.name; },
            [](const auto&) -> std::optional<std::string> { return std::nullopt; },
        },
        c.node);
}

void collect_filter_hints(const Filter& f, std::map<std::string, std::string>& out) {
    std::visit(
        overloaded{
            [&](const FieldClause& fc) {
                if (fc.path.depth() != 1) return;
                if (auto hint = condition_type_hint(fc.cond)) out.emplace(fc.path.last(), *hint);
            },
            [&](const AndF& x) {
                for (const Filter& g : x.clauses) collect_filter_hints(g, out);
            },
            [&](const OrF& x) {
                for (const Filter& g : x.clauses) collect_filter_hints(g, out);
            },
            [&](const NorF& x) {
                for (const Filter& g : x.clauses) collect_filter_hints(g, out);
            },
        },
        f.node);
}

}  // namespace

void SchemaRegistry::declare(const std::string& db, const std::string& coll,
                             const std::map<std::string, std::string>& fields) {
    check_canonical(fields);
    entries_[{db, coll}].declared_fields = fields;
}

void SchemaRegistry::observe_documents(const std::string& db, const std::string& coll,
                                       const std::vector<Document>& docs) {
    PerCollection& e = entries_[{db, coll}];
    if (e.declared_fields) return;
    for (const Document& d : docs) {
        for (const auto& [name, value] : d.fields()) {
            if (e.doc_conflicts.count(name)) continue;
            std::string type(type_name(value));
            auto it = e.doc_fields.find(name);
            if (it == e.doc_fields.end()) {
                e.doc_fields.emplace(name, std::move(type));
            } else if (it->second != type) {
                e.doc_fields.erase(it);
                e.doc_conflicts.insert(name);
            }
        }
    }
}

void SchemaRegistry::observe_filter(const std::string& db, const std::string& coll,
                                    const Filter& f) {
    PerCollection& e = entries_[{db, coll}];
    if (e.declared_fields) return;
    collect_filter_hints(f, e.filter_fields);
}

std::optional<InferredSchema> SchemaRegistry::declared(const std::string& db,
                                                       const std::string& coll) const {
    auto it = entries_.find({db, coll});
    if (it == entries_.end() || !it->second.declared_fields) return std::nullopt;
    return InferredSchema{db, coll, *it->second.declared_fields, SchemaSource::Declared};
}

std::optional<InferredSchema> SchemaRegistry::lookup(const std::string& db,
                                                     const std::string& coll) const {
    auto it = entries_.find({db, coll});
    if (it == entries_.end()) return std::nullopt;
    const PerCollection& e = it->second;
    if (e.declared_fields) {
        return InferredSchema{db, coll, *e.declared_fields, SchemaSource::Declared};
    }
    if (!e.doc_fields.empty()) {
        InferredSchema s{db, coll, e.doc_fields, SchemaSource::ObservedDocs};
        for (const auto& [name, type] : e.filter_fields) s.fields.emplace(name, type);
        return s;
    }
    if (!e.filter_fields.empty()) {
        return InferredSchema{db, coll, e.filter_fields, SchemaSource::ObservedFilter};
    }
    return std::nullopt;
}

Value random_value_of_type(std::string_view type, const SynthesisConfig& cfg, Rng& rng) {
    if (type == "null") return Null{};
    if (type == "bool") return rng.chance(0.5);
    if (type == "int") return static_cast<std::int32_t>(rng.range(cfg.numeric_min, cfg.numeric_max));
    if (type == "long") return rng.range(cfg.numeric_min, cfg.numeric_max);
    if (type == "double") {
        return static_cast<double>(rng.range(cfg.numeric_min, cfg.numeric_max));
    }
    if (type == "string") {
        std::size_t len = rng.below(cfg.max_string_len + 1);
        std::string s;
        for (std::size_t i = 0; i < len; ++i) s += cfg.alphabet[rng.below(cfg.alphabet.size())];
        return s;
    }
    if (type == "array") {
        Array a;
        std::size_t len = rng.below(cfg.max_array_len + 1);
        for (std::size_t i = 0; i < len; ++i) {
            a.emplace_back(static_cast<std::int32_t>(rng.range(cfg.numeric_min, cfg.numeric_max)));
        }
        return a;
    }
    if (type == "object") {
        Document d;
        d.set("a", static_cast<std::int32_t>(rng.range(cfg.numeric_min, cfg.numeric_max)));
        return d;
    }
    if (type == "objectId") return ObjectId(synthetic_hex24(rng.next_u64(), 0));
    throw ValueError("unknown type name \"" + std::string(type) + "\"");
}

namespace {

const std::array<const char*, 9> kAllTypes = {"null",  "bool",  "int",    "long",    "double",
                                              "string", "array", "object", "objectId"};

std::string different_type(const std::string& type, Rng& rng) {
    while (true) {
        const char* pick = kAllTypes[rng.below(kAllTypes.size())];
        if (type != pick) return pick;
    }
}

}  // namespace

Document synthesize_document(const InferredSchema& schema, const SynthesisConfig& cfg, Rng& rng) {
    Document d;
    for (const auto& [name, type] : schema.fields) {
        if (rng.chance(cfg.conform_probability)) {
            d.set(name, random_value_of_type(type, cfg, rng));
            continue;
        }
        switch (rng.below(3)) {
            case 0:  // wrong type
                d.set(name, random_value_of_type(different_type(type, rng), cfg, rng));
                break;
            case 1:  // dropped field
                break;
            default:  // kept, plus a stray sibling
                d.set(name, random_value_of_type(type, cfg, rng));
                d.set(name + "_x", random_value_of_type("int", cfg, rng));
                break;
        }
    }
    return d;
}

bool conforms(const Document& d, const InferredSchema& schema) {
    for (const auto& [name, type] : schema.fields) {
        const Value* v = d.find(name);
        if (!v || type_name(*v) != type) return false;
    }
    for (const auto& [name, value] : d.fields()) {
        (void)value;
        if (name == "_id") continue;
        if (!schema.fields.count(name)) return false;
    }
    return true;
}

}  // namespace nosqlfuzz
