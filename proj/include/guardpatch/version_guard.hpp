#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "guardpatch/syntax/ast.hpp"

namespace guardpatch {

/// Published values of android.os.Build.VERSION_CODES.
inline std::optional<int> version_code(std::string_view name) {
  static constexpr std::array<std::pair<std::string_view, int>, 24> kCodes = {{
      {"ICE_CREAM_SANDWICH", 14}, {"ICE_CREAM_SANDWICH_MR1", 15}, {"JELLY_BEAN", 16},
      {"JELLY_BEAN_MR1", 17},     {"JELLY_BEAN_MR2", 18},         {"KITKAT", 19},
      {"KITKAT_WATCH", 20},       {"LOLLIPOP", 21},               {"LOLLIPOP_MR1", 22},
      {"M", 23},                  {"N", 24},                      {"N_MR1", 25},
      {"O", 26},                  {"O_MR1", 27},                  {"P", 28},
      {"Q", 29},                  {"R", 30},                      {"S", 31},
      {"S_V2", 32},               {"TIRAMISU", 33},               {"UPSIDE_DOWN_CAKE", 34},
      {"VANILLA_ICE_CREAM", 35},  {"BASE", 1},                    {"CUR_DEVELOPMENT", 10000},
  }};
  for (const auto& [n, v] : kCodes)
    if (n == name) return v;
  return std::nullopt;
}

inline bool is_sdk_int(const Expr& e) {
  const std::string name = dotted_name(strip_parens(e));
  return name == "Build.VERSION.SDK_INT" || name == "android.os.Build.VERSION.SDK_INT";
}

/// "M" for `Build.VERSION_CODES.M` (with or without the android.os prefix).
inline std::optional<std::string> version_code_name(const Expr& e) {
  const std::string name = dotted_name(strip_parens(e));
  for (std::string_view prefix : {"Build.VERSION_CODES.", "android.os.Build.VERSION_CODES."}) {
    if (name.size() > prefix.size() && name.compare(0, prefix.size(), prefix) == 0) {
      std::string rest = name.substr(prefix.size());
      if (rest.find('.') == std::string::npos) return rest;
    }
  }
  return std::nullopt;
}

inline bool is_version_expr(const Expr& e) {
  return is_sdk_int(e) || version_code_name(e).has_value();
}

/// Comparison of Build.VERSION.SDK_INT against a version code or an integer
/// literal, canonicalized so SDK_INT is the left operand.
struct VersionGuard {
  std::string op;
  std::string version_text;
  std::string version_name;  // empty for integer literals
  std::optional<int> version_value;

  std::string to_string() const { return "Build.VERSION.SDK_INT " + op + " " + version_text; }

  bool mentions(std::string_view code_name) const {
    if (!version_name.empty() && version_name == code_name) return true;
    const auto v = version_code(code_name);
    return v && version_value && *v == *version_value;
  }
};

inline std::string flip_comparison(std::string_view op) {
  if (op == ">=") return "<=";
  if (op == "<=") return ">=";
  if (op == ">") return "<";
  if (op == "<") return ">";
  return std::string(op);
}

/// Recognizes a bare version comparison. Conjunctions and equality tests are
/// not guards.
inline std::optional<VersionGuard> as_version_guard(const Expr& condition, std::string_view text) {
  const Expr& c = strip_parens(condition);
  if (c.kind != ExprKind::Binary) return std::nullopt;
  if (c.op != ">=" && c.op != ">" && c.op != "<=" && c.op != "<") return std::nullopt;

  const Expr* sdk = &c.lhs();
  const Expr* version = &c.rhs();
  std::string op = c.op;
  if (!is_sdk_int(*sdk)) {
    std::swap(sdk, version);
    op = flip_comparison(op);
  }
  if (!is_sdk_int(*sdk) || is_sdk_int(*version)) return std::nullopt;

  const Expr& v = strip_parens(*version);
  VersionGuard g;
  g.op = op;
  g.version_text = std::string(v.span.of(text));
  if (auto name = version_code_name(v)) {
    g.version_name = *name;
    g.version_value = version_code(*name);
  } else if (v.kind == ExprKind::Literal && v.literal == LiteralKind::Int) {
    try {
      g.version_value = std::stoi(v.name);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  } else {
    return std::nullopt;
  }
  return g;
}

}  // namespace guardpatch
