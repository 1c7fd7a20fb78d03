#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "nosqlfuzz/filter.hpp"
#include "nosqlfuzz/rng.hpp"
#include "nosqlfuzz/value.hpp"

namespace nosqlfuzz {

struct NoSchema : std::runtime_error {
    explicit NoSchema(const std::string& what) : std::runtime_error(what) {}
};

enum class SchemaSource { Declared, ObservedDocs, ObservedFilter };

struct InferredSchema {
    std::string db;
    std::string coll;
    std::map<std::string, std::string> fields;  // name -> canonical type name
    SchemaSource source = SchemaSource::Declared;
};

struct SynthesisConfig {
    double conform_probability = 0.9;
    std::int64_t numeric_min = -128;
    std::int64_t numeric_max = 128;
    std::string alphabet = "abcdefghijklmnopqrstuvwxyz";
    std::size_t max_string_len = 6;
    std::size_t max_array_len = 4;
};

/// Expected document shape per collection. Declared schemas always win;
/// shapes observed from stored documents beat shapes guessed from filter
/// constants, and observation never rewrites a declaration.
class SchemaRegistry {
  public:
    void declare(const std::string& db, const std::string& coll,
                 const std::map<std::string, std::string>& fields);
    void observe_documents(const std::string& db, const std::string& coll,
                           const std::vector<Document>& docs);
    void observe_filter(const std::string& db, const std::string& coll, const Filter& f);

    std::optional<InferredSchema> lookup(const std::string& db, const std::string& coll) const;
    std::optional<InferredSchema> declared(const std::string& db, const std::string& coll) const;

  private:
    struct PerCollection {
        std::optional<std::map<std::string, std::string>> declared_fields;
        std::map<std::string, std::string> doc_fields;
        std::set<std::string> doc_conflicts;
        std::map<std::string, std::string> filter_fields;
    };
    std::map<std::pair<std::string, std::string>, PerCollection> entries_;
};

/// Random document for the schema: each field conforms with probability
/// cfg.conform_probability, otherwise its shape is perturbed (wrong type,
/// dropped field, or stray extra field).
Document synthesize_document(const InferredSchema& schema, const SynthesisConfig& cfg, Rng& rng);

/// Strict shape check used for find materialization: all schema fields
/// present with the declared types and nothing extra beyond _id.
bool conforms(const Document& d, const InferredSchema& schema);

/// Random value of one canonical type, from the synthesis domain.
Value random_value_of_type(std::string_view type, const SynthesisConfig& cfg, Rng& rng);

}  // namespace nosqlfuzz
