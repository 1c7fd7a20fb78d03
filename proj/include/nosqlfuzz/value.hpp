#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace nosqlfuzz {

struct ValueError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Null {
    friend bool operator==(Null, Null) { return true; }
};

/// 24-character lowercase hex id, the unique document identifier kind.
struct ObjectId {
    std::string hex;

    explicit ObjectId(std::string h);
    friend bool operator==(const ObjectId& a, const ObjectId& b) { return a.hex == b.hex; }
};

class Value;
using Array = std::vector<Value>;

/// Ordered sequence of (name, value) fields; names unique per level.
class Document {
public:
    using Field = std::pair<std::string, Value>;

    Document() = default;
    Document(std::initializer_list<Field> fields);

    const std::vector<Field>& fields() const { return fields_; }
    bool empty() const { return fields_.empty(); }
    std::size_t size() const { return fields_.size(); }

    const Value* find(std::string_view name) const;
    bool contains(std::string_view name) const { return find(name) != nullptr; }

    /// Inserts or replaces; insertion keeps field order.
    void set(std::string name, Value v);

    /// Drops the named field if present.
    void remove(std::string_view name);

private:
    std::vector<Field> fields_;
};

enum class ValueKind { Null, Bool, Int32, Int64, Double, Text, Array, Doc, ObjectId };

/// Dynamically typed document value. Immutable by convention once stored;
/// operator== is the semantic equality the matcher uses (numeric kinds
/// compare by widened value, document fields compare regardless of order).
class Value {
public:
    Value() : v_(Null{}) {}
    Value(Null) : v_(Null{}) {}
    Value(bool b) : v_(b) {}
    Value(std::int32_t i) : v_(i) {}
    Value(std::int64_t i) : v_(i) {}
    Value(double d) : v_(d) {}
    Value(std::string s) : v_(std::move(s)) {}
    Value(const char* s) : v_(std::string(s)) {}
    Value(Array a) : v_(std::move(a)) {}
    Value(Document d) : v_(std::move(d)) {}
    Value(ObjectId id) : v_(std::move(id)) {}

    ValueKind kind() const { return static_cast<ValueKind>(v_.index()); }
    bool is_null() const { return kind() == ValueKind::Null; }
    bool is_numeric() const {
        return kind() == ValueKind::Int32 || kind() == ValueKind::Int64 || kind() == ValueKind::Double;
    }

    bool as_bool() const { return std::get<bool>(v_); }
    std::int32_t as_int32() const { return std::get<std::int32_t>(v_); }
    std::int64_t as_int64() const { return std::get<std::int64_t>(v_); }
    double as_double() const { return std::get<double>(v_); }
    const std::string& as_text() const { return std::get<std::string>(v_); }
    const Array& as_array() const { return std::get<Array>(v_); }
    const Document& as_doc() const { return std::get<Document>(v_); }
    const ObjectId& as_object_id() const { return std::get<ObjectId>(v_); }

    friend bool operator==(const Value& a, const Value& b);
    friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }

private:
    std::variant<Null, bool, std::int32_t, std::int64_t, double, std::string, Array, Document, ObjectId> v_;
};

bool operator==(const Document& a, const Document& b);
inline bool operator!=(const Document& a, const Document& b) { return !(a == b); }

/// Kind-exact, order-sensitive comparison, e.g. for round-trip checks;
/// unlike operator==, Int32(1) and Int64(1) differ and field order matters.
bool structural_equals(const Value& a, const Value& b);
bool structural_equals(const Document& a, const Document& b);

/// Canonical name of the value's kind: one of
/// "null","bool","int","long","double","string","array","object","objectId".
std::string_view type_name(const Value& v);

/// True for the nine canonical type names above.
bool is_canonical_type_name(std::string_view name);

/// Dotted field path; "a.b" descends through nested documents only.
class FieldPath {
public:
    explicit FieldPath(std::vector<std::string> segments);
    static FieldPath parse(std::string_view dotted);

    const std::vector<std::string>& segments() const { return segments_; }
    const std::string& last() const { return segments_.back(); }
    std::size_t depth() const { return segments_.size(); }
    std::string render() const;

    friend bool operator==(const FieldPath& a, const FieldPath& b) {
        return a.segments_ == b.segments_;
    }

private:
    std::vector<std::string> segments_;
};

/// Value at the path, or null if any segment is missing or a non-terminal
/// segment is not a nested document. Absence is not an error.
const Value* get_path(const Document& d, const FieldPath& p);

/// Value at the parent of the path's final segment (the document whose
/// field names are the path's siblings); null when that level is absent
/// or not a document.
const Document* get_parent_doc(const Document& d, const FieldPath& p);

/// Both operands widened to double when both are numeric kinds; empty
/// otherwise. Int64 magnitudes beyond 2^53 widen with round-to-nearest.
std::optional<std::pair<double, double>> num_widen(const Value& a, const Value& b);

/// JSON interchange. Int64 round-trips as {"$long":"<decimal>"}, ObjectId
/// as {"$oid":"<24hex>"}; every other kind uses its native JSON form.
/// Unsupported extended-JSON wrappers ($date, $regex, ...) are rejected.
std::string render_document(const Document& d);
std::string render_value(const Value& v);
Document parse_document(std::string_view json_text);
Value parse_value(std::string_view json_text);

/// UTF-8 text as a codepoint sequence; stray bytes decode as their byte
/// value so arbitrary input never throws.
std::vector<std::int32_t> utf8_codepoints(std::string_view text);
std::string codepoints_to_utf8(const std::vector<std::int32_t>& cps);

}  // namespace nosqlfuzz
