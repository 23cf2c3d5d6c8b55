#pragma once

// JSON helpers shared by the loaders. Kept out of the lighter public headers.

#include <string>
#include <string_view>

#include "horizon/typed_value.hpp"
#include "json.hpp"

namespace horizon {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

// {"kind": "number", "value": 206, "unit": "centimetre"}; dates as ISO strings.
Json typed_value_to_json(const TypedValue& value);
TypedValue typed_value_from_json(const Json& node, const std::string& position);

}  // namespace horizon
