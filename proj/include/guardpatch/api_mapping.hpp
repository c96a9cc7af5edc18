#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "guardpatch/error.hpp"
#include "guardpatch/syntax/ast.hpp"

namespace guardpatch {

/// Deprecated-to-replacement method mapping plus its SDK version gate. The
/// guard operator is always `>=` against `since_version`.
struct ApiMapping {
  std::string deprecated_class;
  std::string deprecated_method;
  std::vector<std::string> param_types;
  std::string return_type = "void";
  std::string replacement_method;
  std::vector<std::string> replacement_param_types;
  std::string since_version;

  static constexpr const char* guard_op = ">=";

  bool returns_value() const { return return_type != "void"; }

  std::string class_simple_name() const {
    const auto dot = deprecated_class.rfind('.');
    return dot == std::string::npos ? deprecated_class : deprecated_class.substr(dot + 1);
  }
};

namespace detail {

inline bool is_java_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

inline std::string required_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw MappingError(key, "required");
  const auto& v = j.at(key);
  if (!v.is_string()) throw MappingError(key, "must be a string");
  std::string s = v.get<std::string>();
  if (s.empty()) throw MappingError(key, "must not be empty");
  return s;
}

inline std::vector<std::string> required_list(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw MappingError(key, "required");
  const auto& v = j.at(key);
  if (!v.is_array()) throw MappingError(key, "must be an array of type names");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string() || item.get<std::string>().empty())
      throw MappingError(key, "must be an array of type names");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace detail

/// Parses and validates a mapping document. Every malformed input surfaces as
/// MappingError.
inline ApiMapping parse_mapping(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MappingError("<document>", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw MappingError("<document>", "must be a JSON object");

  static const std::set<std::string> kKnown = {
      "deprecatedClass",     "deprecatedMethod",      "paramTypes",  "returnType",
      "replacementMethod",   "replacementParamTypes", "sinceVersion"};
  for (const auto& [key, _] : j.items())
    if (!kKnown.count(key)) throw MappingError(key, "unknown key");

  ApiMapping m;
  m.deprecated_class = detail::required_string(j, "deprecatedClass");
  m.deprecated_method = detail::required_string(j, "deprecatedMethod");
  m.param_types = detail::required_list(j, "paramTypes");
  m.return_type = detail::required_string(j, "returnType");
  m.replacement_method = detail::required_string(j, "replacementMethod");
  m.replacement_param_types = detail::required_list(j, "replacementParamTypes");
  m.since_version = detail::required_string(j, "sinceVersion");

  if (!detail::is_java_identifier(m.deprecated_method))
    throw MappingError("deprecatedMethod", "must be a method name");
  if (!detail::is_java_identifier(m.replacement_method))
    throw MappingError("replacementMethod", "must be a method name");
  if (!detail::is_java_identifier(m.since_version))
    throw MappingError("sinceVersion", "must be a VERSION_CODES identifier");
  return m;
}

inline ApiMapping load_mapping(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MappingError("<file>", "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_mapping(buf.str());
}

inline std::string to_json(const ApiMapping& m) {
  nlohmann::ordered_json j;
  j["deprecatedClass"] = m.deprecated_class;
  j["deprecatedMethod"] = m.deprecated_method;
  j["paramTypes"] = m.param_types;
  j["returnType"] = m.return_type;
  j["replacementMethod"] = m.replacement_method;
  j["replacementParamTypes"] = m.replacement_param_types;
  j["sinceVersion"] = m.since_version;
  return j.dump(2);
}

/// Name + arity match; no type resolution happens.
inline bool matches_deprecated(const ApiMapping& m, const Expr& call) {
  return call.kind == ExprKind::MethodCall && call.name == m.deprecated_method &&
         call.args().size() == m.param_types.size();
}

inline bool matches_replacement(const ApiMapping& m, const Expr& call) {
  return call.kind == ExprKind::MethodCall && call.name == m.replacement_method &&
         call.args().size() == m.replacement_param_types.size();
}

}  // namespace guardpatch
