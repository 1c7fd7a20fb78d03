#include "nosqlfuzz/value.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "nosqlfuzz/json_conv.hpp"
#include "nosqlfuzz/rng.hpp"

namespace nosqlfuzz {

using ojson = nlohmann::ordered_json;

namespace {

bool is_hex24(std::string_view s) {
    if (s.size() != 24) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    });
}

constexpr std::array<std::string_view, 9> kTypeNames = {
    "null", "bool", "int", "long", "double", "string", "array", "object", "objectId"};

}  // namespace

ObjectId::ObjectId(std::string h) : hex(std::move(h)) {
    if (!is_hex24(hex)) {
        throw ValueError("ObjectId must be 24 lowercase hex characters: \"" + hex + "\"");
    }
}

Document::Document(std::initializer_list<Field> fields) {
    for (const auto& f : fields) set(f.first, f.second);
}

const Value* Document::find(std::string_view name) const {
    for (const auto& [k, v] : fields_) {
        if (k == name) return &v;
    }
    return nullptr;
}

void Document::set(std::string name, Value v) {
    for (auto& [k, existing] : fields_) {
        if (k == name) {
            existing = std::move(v);
            return;
        }
    }
    fields_.emplace_back(std::move(name), std::move(v));
}

void Document::remove(std::string_view name) {
    for (auto it = fields_.begin(); it != fields_.end(); ++it) {
        if (it->first == name) {
            fields_.erase(it);
            return;
        }
    }
}

std::optional<std::pair<double, double>> num_widen(const Value& a, const Value& b) {
    auto widen = [](const Value& v) -> std::optional<double> {
        switch (v.kind()) {
            case ValueKind::Int32: return static_cast<double>(v.as_int32());
            case ValueKind::Int64: return static_cast<double>(v.as_int64());
            case ValueKind::Double: return v.as_double();
            default: return std::nullopt;
        }
    };
    auto wa = widen(a);
    auto wb = widen(b);
    if (!wa || !wb) return std::nullopt;
    return std::pair{*wa, *wb};
}

bool operator==(const Value& a, const Value& b) {
    if (auto nums = num_widen(a, b)) return nums->first == nums->second;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case ValueKind::Null: return true;
        case ValueKind::Bool: return a.as_bool() == b.as_bool();
        case ValueKind::Text: return a.as_text() == b.as_text();
        case ValueKind::ObjectId: return a.as_object_id() == b.as_object_id();
        case ValueKind::Array: {
            const Array& xs = a.as_array();
            const Array& ys = b.as_array();
            if (xs.size() != ys.size()) return false;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (!(xs[i] == ys[i])) return false;
            }
            return true;
        }
        case ValueKind::Doc: return a.as_doc() == b.as_doc();
        default: return false;  // numeric kinds handled by num_widen
    }
}

bool operator==(const Document& a, const Document& b) {
    // Field order is preserved in storage but ignored by equality.
    if (a.size() != b.size()) return false;
    for (const auto& [name, va] : a.fields()) {
        const Value* vb = b.find(name);
        if (!vb || !(va == *vb)) return false;
    }
    return true;
}

bool structural_equals(const Document& a, const Document& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& [ka, va] = a.fields()[i];
        const auto& [kb, vb] = b.fields()[i];
        if (ka != kb || !structural_equals(va, vb)) return false;
    }
    return true;
}

bool structural_equals(const Value& a, const Value& b) {
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case ValueKind::Null: return true;
        case ValueKind::Bool: return a.as_bool() == b.as_bool();
        case ValueKind::Int32: return a.as_int32() == b.as_int32();
        case ValueKind::Int64: return a.as_int64() == b.as_int64();
        case ValueKind::Double: return a.as_double() == b.as_double();
        case ValueKind::Text: return a.as_text() == b.as_text();
        case ValueKind::ObjectId: return a.as_object_id() == b.as_object_id();
        case ValueKind::Array: {
            const Array& xs = a.as_array();
            const Array& ys = b.as_array();
            if (xs.size() != ys.size()) return false;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (!structural_equals(xs[i], ys[i])) return false;
            }
            return true;
        }
        case ValueKind::Doc: return structural_equals(a.as_doc(), b.as_doc());
    }
    return false;
}

std::string_view type_name(const Value& v) {
    return kTypeNames[static_cast<std::size_t>(v.kind())];
}

bool is_canonical_type_name(std::string_view name) {
    return std::find(kTypeNames.begin(), kTypeNames.end(), name) != kTypeNames.end();
}

FieldPath::FieldPath(std::vector<std::string> segments) : segments_(std::move(segments)) {
    if (segments_.empty()) throw ValueError("field path needs at least one segment");
}

FieldPath FieldPath::parse(std::string_view dotted) {
    std::vector<std::string> segs;
    std::size_t start = 0;
    while (true) {
        std::size_t dot = dotted.find('.', start);
        if (dot == std::string_view::npos) {
            segs.emplace_back(dotted.substr(start));
            break;
        }
        segs.emplace_back(dotted.substr(start, dot - start));
        start = dot + 1;
    }
    return FieldPath(std::move(segs));
}

std::string FieldPath::render() const {
    std::string out = segments_.front();
    for (std::size_t i = 1; i < segments_.size(); ++i) {
        out += '.';
        out += segments_[i];
    }
    return out;
}

const Value* get_path(const Document& d, const FieldPath& p) {
    const Document* cur = &d;
    for (std::size_t i = 0; i + 1 < p.depth(); ++i) {
        const Value* v = cur->find(p.segments()[i]);
        if (!v || v->kind() != ValueKind::Doc) return nullptr;
        cur = &v->as_doc();
    }
    return cur->find(p.last());
}

const Document* get_parent_doc(const Document& d, const FieldPath& p) {
    const Document* cur = &d;
    for (std::size_t i = 0; i + 1 < p.depth(); ++i) {
        const Value* v = cur->find(p.segments()[i]);
        if (!v || v->kind() != ValueKind::Doc) return nullptr;
        cur = &v->as_doc();
    }
    return cur;
}

ojson to_json(const Document& d) {
    ojson out = ojson::object();
    for (const auto& [name, value] : d.fields()) out[name] = to_json(value);
    return out;
}

ojson to_json(const Value& v) {
    switch (v.kind()) {
        case ValueKind::Null: return nullptr;
        case ValueKind::Bool: return v.as_bool();
        case ValueKind::Int32: return v.as_int32();
        case ValueKind::Int64: return ojson{{"$long", std::to_string(v.as_int64())}};
        case ValueKind::Double: return v.as_double();
        case ValueKind::Text: return v.as_text();
        case ValueKind::ObjectId: return ojson{{"$oid", v.as_object_id().hex}};
        case ValueKind::Array: {
            ojson arr = ojson::array();
            for (const Value& e : v.as_array()) arr.push_back(to_json(e));
            return arr;
        }
        case ValueKind::Doc: return to_json(v.as_doc());
    }
    throw ValueError("unreachable value kind");
}

namespace {

std::int64_t parse_decimal_i64(const std::string& s) {
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ValueError("bad $long payload: \"" + s + "\"");
    }
    return out;
}

}  // namespace

Document document_from_json(const ojson& j) {
    if (!j.is_object()) throw ValueError("document must be a JSON object");
    Document d;
    for (const auto& [key, val] : j.items()) {
        if (!key.empty() && key[0] == '$') {
            throw ValueError("unsupported $-field in document: \"" + key + "\"");
        }
        d.set(key, value_from_json(val));
    }
    return d;
}

Value value_from_json(const ojson& j) {
    switch (j.type()) {
        case ojson::value_t::null: return Null{};
        case ojson::value_t::boolean: return j.get<bool>();
        case ojson::value_t::number_integer: {
            std::int64_t i = j.get<std::int64_t>();
            if (i >= INT32_MIN && i <= INT32_MAX) return static_cast<std::int32_t>(i);
            return i;
        }
        case ojson::value_t::number_unsigned: {
            std::uint64_t u = j.get<std::uint64_t>();
            if (u > static_cast<std::uint64_t>(INT64_MAX)) {
                throw ValueError("integer too large: " + j.dump());
            }
            auto i = static_cast<std::int64_t>(u);
            if (i <= INT32_MAX) return static_cast<std::int32_t>(i);
            return i;
        }
        case ojson::value_t::number_float: return j.get<double>();
        case ojson::value_t::string: return j.get<std::string>();
        case ojson::value_t::array: {
            Array arr;
            arr.reserve(j.size());
            for (const auto& e : j) arr.push_back(value_from_json(e));
            return arr;
        }
        case ojson::value_t::object: {
            if (j.size() == 1) {
                const auto& key = j.items().begin().key();
                if (key == "$oid") {
                    const auto& payload = *j.begin();
                    if (!payload.is_string()) throw ValueError("$oid payload must be a string");
                    return ObjectId(payload.get<std::string>());
                }
                if (key == "$long") {
                    const auto& payload = *j.begin();
                    if (payload.is_string()) return parse_decimal_i64(payload.get<std::string>());
                    if (payload.is_number_integer()) return payload.get<std::int64_t>();
                    throw ValueError("$long payload must be a decimal string");
                }
            }
            return document_from_json(j);
        }
        default: throw ValueError("unsupported JSON value: " + j.dump());
    }
}

std::string render_document(const Document& d) { return to_json(d).dump(); }

std::string render_value(const Value& v) { return to_json(v).dump(); }

Document parse_document(std::string_view json_text) {
    ojson j = ojson::parse(json_text, nullptr, false);
    if (j.is_discarded()) throw ValueError("invalid JSON");
    Value v = value_from_json(j);
    if (v.kind() != ValueKind::Doc) throw ValueError("document must be a plain JSON object");
    return v.as_doc();
}

Value parse_value(std::string_view json_text) {
    ojson j = ojson::parse(json_text, nullptr, false);
    if (j.is_discarded()) throw ValueError("invalid JSON");
    return value_from_json(j);
}

std::vector<std::int32_t> utf8_codepoints(std::string_view text) {
    std::vector<std::int32_t> cps;
    std::size_t i = 0;
    while (i < text.size()) {
        auto byte = static_cast<unsigned char>(text[i]);
        std::size_t extra = 0;
        std::int32_t cp = byte;
        if (byte >= 0xf0) {
            extra = 3;
            cp = byte & 0x07;
        } else if (byte >= 0xe0) {
            extra = 2;
            cp = byte & 0x0f;
        } else if (byte >= 0xc0) {
            extra = 1;
            cp = byte & 0x1f;
        }
        if (extra > 0 && i + extra < text.size()) {
            bool ok = true;
            std::int32_t acc = cp;
            for (std::size_t k = 1; k <= extra; ++k) {
                auto cont = static_cast<unsigned char>(text[i + k]);
                if ((cont & 0xc0) != 0x80) {
                    ok = false;
                    break;
                }
                acc = (acc << 6) | (cont & 0x3f);
            }
            if (ok) {
                cps.push_back(acc);
                i += extra + 1;
                continue;
            }
        }
        cps.push_back(byte);
        ++i;
    }
    return cps;
}

std::string codepoints_to_utf8(const std::vector<std::int32_t>& cps) {
    std::string out;
    for (std::int32_t cp : cps) {
        if (cp < 0) cp = 0;
        auto u = static_cast<std::uint32_t>(cp);
        if (u < 0x80) {
            out += static_cast<char>(u);
        } else if (u < 0x800) {
            out += static_cast<char>(0xc0 | (u >> 6));
            out += static_cast<char>(0x80 | (u & 0x3f));
        } else if (u < 0x10000) {
            out += static_cast<char>(0xe0 | (u >> 12));
            out += static_cast<char>(0x80 | ((u >> 6) & 0x3f));
            out += static_cast<char>(0x80 | (u & 0x3f));
        } else {
            out += static_cast<char>(0xf0 | (u >> 18));
            out += static_cast<char>(0x80 | ((u >> 12) & 0x3f));
            out += static_cast<char>(0x80 | ((u >> 6) & 0x3f));
            out += static_cast<char>(0x80 | (u & 0x3f));
        }
    }
    return out;
}

std::string synthetic_hex24(std::uint64_t seed, std::uint64_t counter) {
    Rng rng(seed ^ (counter * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
    std::uint64_t a = rng.next_u64();
    std::uint64_t b = rng.next_u64();
    char buf[25];
    std::snprintf(buf, sizeof(buf), "%016llx%08llx",
                  static_cast<unsigned long long>(a),
                  static_cast<unsigned long long>(b & 0xffffffffULL));
    return std::string(buf, 24);
}

}  // namespace nosqlfuzz
