#pragma once

// Validator for the JSON Schema subset used by the shipped report schemas:
// type, enum, const, required, properties, additionalProperties, items,
// minItems, minimum, maximum, exclusiveMinimum, anyOf and local "$ref"s
// into "#/$defs/...".

#include <json.hpp>

#include <string>
#include <vector>

namespace ctxgeo::testing {

class SchemaValidator {
 public:
  explicit SchemaValidator(nlohmann::json root) : root_(std::move(root)) {}

  std::vector<std::string> validate(const nlohmann::json& doc) const {
    std::vector<std::string> errors;
    check(root_, doc, "", errors);
    return errors;
  }

 private:
  using json = nlohmann::json;

  static bool has_type(const json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "boolean") return v.is_boolean();
    if (t == "null") return v.is_null();
    if (t == "number") return v.is_number();
    if (t == "integer") {
      return v.is_number_integer() ||
             (v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<long long>(v.get<double>())));
    }
    return false;
  }

  const json& resolve(const json& schema) const {
    if (schema.is_object() && schema.contains("$ref")) {
      const auto ref = schema["$ref"].get<std::string>();
      return root_.at(json::json_pointer(ref.substr(1)));
    }
    return schema;
  }

  void check(const json& raw_schema, const json& v, const std::string& path,
             std::vector<std::string>& errors) const {
    const json& s = resolve(raw_schema);
    if (s.is_boolean()) {
      if (!s.get<bool>()) errors.push_back(path + ": not allowed");
      return;
    }
    const std::string where = path.empty() ? "/" : path;
    if (auto t = s.find("type"); t != s.end()) {
      bool ok = false;
      if (t->is_string()) {
        ok = has_type(v, t->get<std::string>());
      } else {
        for (const auto& alt : *t) ok = ok || has_type(v, alt.get<std::string>());
      }
      if (!ok) {
        errors.push_back(where + ": expected type " + t->dump() + ", got " + v.type_name());
        return;
      }
    }
    if (auto e = s.find("enum"); e != s.end()) {
      bool found = false;
      for (const auto& option : *e) found = found || option == v;
      if (!found) errors.push_back(where + ": value " + v.dump() + " not in enum");
    }
    if (auto c = s.find("const"); c != s.end() && *c != v) {
      errors.push_back(where + ": expected constant " + c->dump());
    }
    if (v.is_number()) {
      const double x = v.get<double>();
      if (auto m = s.find("minimum"); m != s.end() && x < m->get<double>()) {
        errors.push_back(where + ": " + v.dump() + " < minimum " + m->dump());
      }
      if (auto m = s.find("maximum"); m != s.end() && x > m->get<double>()) {
        errors.push_back(where + ": " + v.dump() + " > maximum " + m->dump());
      }
      if (auto m = s.find("exclusiveMinimum"); m != s.end() && x <= m->get<double>()) {
        errors.push_back(where + ": " + v.dump() + " <= exclusiveMinimum " + m->dump());
      }
    }
    if (auto any = s.find("anyOf"); any != s.end()) {
      bool ok = false;
      for (const auto& alt : *any) {
        std::vector<std::string> sub;
        check(alt, v, path, sub);
        ok = ok || sub.empty();
      }
      if (!ok) errors.push_back(where + ": matches no anyOf alternative");
    }
    if (v.is_object()) {
      if (auto req = s.find("required"); req != s.end()) {
        for (const auto& key : *req) {
          if (!v.contains(key.get<std::string>())) {
            errors.push_back(where + ": missing required '" + key.get<std::string>() + "'");
          }
        }
      }
      const json* props = s.contains("properties") ? &s["properties"] : nullptr;
      for (auto it = v.begin(); it != v.end(); ++it) {
        const std::string child = path + "/" + it.key();
        if (props != nullptr && props->contains(it.key())) {
          check((*props)[it.key()], it.value(), child, errors);
        } else if (auto extra = s.find("additionalProperties"); extra != s.end()) {
          check(*extra, it.value(), child, errors);
        }
      }
    }
    if (v.is_array()) {
      if (auto m = s.find("minItems"); m != s.end() && v.size() < m->get<std::size_t>()) {
        errors.push_back(where + ": fewer than " + m->dump() + " items");
      }
      if (auto items = s.find("items"); items != s.end()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
          check(*items, v[i], path + "/" + std::to_string(i), errors);
        }
      }
    }
  }

  json root_;
};

}  // namespace ctxgeo::testing
