#pragma once

#include <json.hpp>

#include "nosqlfuzz/filter.hpp"
#include "nosqlfuzz/value.hpp"

namespace nosqlfuzz {

using ojson = nlohmann::ordered_json;

// Order-preserving JSON forms of the value model, shared by the filter
// parser, scenario loader, and report writer. Same conventions as
// render_value/parse_value.

nlohmann::ordered_json to_json(const Value& v);
nlohmann::ordered_json to_json(const Document& d);
Value value_from_json(const nlohmann::ordered_json& j);
Document document_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json filter_to_json(const Filter& f);
Filter filter_from_json(const nlohmann::ordered_json& j);

}  // namespace nosqlfuzz
