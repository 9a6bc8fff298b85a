#pragma once

// Checks a JSON value against the subset of JSON Schema used by the files in
// schemas/: type, required, properties, additionalProperties, items,
// min/maxItems, enum, numeric bounds, pattern and local $ref.

#include <fstream>
#include <regex>
#include <string>
#include <vector>

#include <json.hpp>

namespace schema_check {

using nlohmann::json;

inline bool has_type(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  if (t == "integer") return v.is_number_integer();
  if (t == "number") return v.is_number();
  return false;
}

inline const json& resolve(const json& root, const json& schema) {
  if (!schema.contains("$ref")) return schema;
  const std::string ref = schema["$ref"];
  const std::string prefix = "#/$defs/";
  if (ref.rfind(prefix, 0) != 0) throw std::runtime_error("unsupported $ref " + ref);
  return root.at("$defs").at(ref.substr(prefix.size()));
}

inline void check(const json& root, const json& schema_in, const json& v, const std::string& path,
                  std::vector<std::string>& errors) {
  const json& schema = resolve(root, schema_in);
  if (schema.contains("type")) {
    bool ok = false;
    if (schema["type"].is_array()) {
      for (const auto& t : schema["type"]) ok = ok || has_type(v, t);
    } else {
      ok = has_type(v, schema["type"]);
    }
    if (!ok) {
      errors.push_back(path + ": expected type " + schema["type"].dump() + ", got " + v.dump());
      return;
    }
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& e : schema["enum"]) ok = ok || e == v;
    if (!ok) errors.push_back(path + ": not in enum");
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (schema.contains("minimum") && x < schema["minimum"].get<double>()) errors.push_back(path + ": below minimum");
    if (schema.contains("maximum") && x > schema["maximum"].get<double>()) errors.push_back(path + ": above maximum");
    if (schema.contains("exclusiveMinimum") && x <= schema["exclusiveMinimum"].get<double>())
      errors.push_back(path + ": not above exclusiveMinimum");
    if (schema.contains("exclusiveMaximum") && x >= schema["exclusiveMaximum"].get<double>())
      errors.push_back(path + ": not below exclusiveMaximum");
  }
  if (v.is_string() && schema.contains("pattern")) {
    if (!std::regex_search(v.get<std::string>(), std::regex(schema["pattern"].get<std::string>())))
      errors.push_back(path + ": pattern mismatch");
  }
  if (v.is_array()) {
    if (schema.contains("minItems") && v.size() < schema["minItems"].get<std::size_t>())
      errors.push_back(path + ": too few items");
    if (schema.contains("maxItems") && v.size() > schema["maxItems"].get<std::size_t>())
      errors.push_back(path + ": too many items");
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        check(root, schema["items"], v[i], path + "[" + std::to_string(i) + "]", errors);
      }
    }
  }
  if (v.is_object()) {
    if (schema.contains("required")) {
      for (const auto& k : schema["required"]) {
        if (!v.contains(k.get<std::string>())) errors.push_back(path + ": missing " + k.get<std::string>());
      }
    }
    for (const auto& [k, child] : v.items()) {
      if (schema.contains("properties") && schema["properties"].contains(k)) {
        check(root, schema["properties"][k], child, path + "." + k, errors);
      } else if (schema.contains("additionalProperties")) {
        const auto& extra = schema["additionalProperties"];
        if (extra.is_boolean()) {
          if (!extra.get<bool>()) errors.push_back(path + ": unexpected key " + k);
        } else {
          check(root, extra, child, path + "." + k, errors);
        }
      }
    }
  }
}

inline std::vector<std::string> validate(const json& schema, const json& value) {
  std::vector<std::string> errors;
  check(schema, schema, value, "$", errors);
  return errors;
}

inline json load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open schema " + path);
  return json::parse(f);
}

}  // namespace schema_check
