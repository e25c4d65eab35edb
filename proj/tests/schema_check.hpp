#pragma once

// Minimal JSON-Schema checker for the subset the shipped schemas use:
// type (string or array of strings), properties, required, items, enum.
// Enough to assert that emitted documents match the published schemas.

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace schema_check {

using nlohmann::json;

inline bool type_matches(const std::string& type, const json& value) {
    if (type == "object") return value.is_object();
    if (type == "array") return value.is_array();
    if (type == "string") return value.is_string();
    if (type == "boolean") return value.is_boolean();
    if (type == "null") return value.is_null();
    if (type == "integer") return value.is_number_integer() || value.is_number_unsigned();
    if (type == "number") return value.is_number();
    return false;
}

inline void validate(const json& schema, const json& value, const std::string& path,
                     std::vector<std::string>& errors) {
    if (schema.contains("type")) {
        const json& type = schema["type"];
        bool ok = false;
        if (type.is_string()) {
            ok = type_matches(type.get<std::string>(), value);
        } else {
            for (const auto& t : type) ok = ok || type_matches(t.get<std::string>(), value);
        }
        if (!ok) {
            errors.push_back(path + ": type mismatch (" + type.dump() + " vs " +
                             std::string(value.type_name()) + ")");
            return;
        }
    }
    if (value.is_null()) return;  // nullable fields carry no structure
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& candidate : schema["enum"]) ok = ok || candidate == value;
        if (!ok) errors.push_back(path + ": value not in enum");
    }
    if (value.is_object()) {
        if (schema.contains("required")) {
            for (const auto& key : schema["required"]) {
                if (!value.contains(key.get<std::string>())) {
                    errors.push_back(path + ": missing required key '" + key.get<std::string>() +
                                     "'");
                }
            }
        }
        if (schema.contains("properties")) {
            for (const auto& [key, sub] : schema["properties"].items()) {
                if (value.contains(key)) validate(sub, value[key], path + "." + key, errors);
            }
        }
    }
    if (value.is_array() && schema.contains("items")) {
        for (std::size_t i = 0; i < value.size(); ++i) {
            validate(schema["items"], value[i], path + "[" + std::to_string(i) + "]", errors);
        }
    }
}

inline std::vector<std::string> validate_against_file(const std::string& schema_path,
                                                      const json& value) {
    std::ifstream in(schema_path);
    json schema;
    in >> schema;
    std::vector<std::string> errors;
    validate(schema, value, "$", errors);
    return errors;
}

}  // namespace schema_check
