#pragma once

#include <optional>
#include <string>
#include <vector>

#include "guardpatch/api_mapping.hpp"
#include "guardpatch/block_extractor.hpp"
#include "guardpatch/error.hpp"
#include "guardpatch/normalizer.hpp"
#include "guardpatch/patch_engine.hpp"

namespace guardpatch {

/// Names and shapes the synthesized update patch is built from.
struct SynthesisPlan {
  std::string receiver_metavar = "classIden";
  std::string init_metavar = "exp0";
  std::vector<std::string> arg_metavars;
  // For each replacement parameter, the deprecated argument it takes.
  std::vector<std::size_t> replacement_args;
  std::string return_temp{NamingScheme::return_temp};
  std::string guard_text;
  std::string receiver_type;
  bool two_rules = false;
};

inline constexpr const char* kStatementRule = "bottomupper";
inline constexpr const char* kAssignmentRule = "bottomupper_assignment";

namespace detail {

inline std::string simple_type_name(std::string t) {
  std::string out;
  for (char c : t)
    if (c != ' ') out += c;
  // strip generic arguments and package qualifiers
  if (auto lt = out.find('<'); lt != std::string::npos) {
    auto gt = out.rfind('>');
    out = out.substr(0, lt) + (gt != std::string::npos ? out.substr(gt + 1) : "");
  }
  if (auto dot = out.rfind('.', out.find('[')); dot != std::string::npos) out = out.substr(dot + 1);
  return out;
}

inline std::string unboxed(const std::string& t) {
  static const std::pair<const char*, const char*> kBoxes[] = {
      {"Integer", "int"}, {"Long", "long"},    {"Short", "short"},   {"Byte", "byte"},
      {"Character", "char"}, {"Boolean", "boolean"}, {"Float", "float"}, {"Double", "double"},
  };
  for (const auto& [boxed, prim] : kBoxes)
    if (t == boxed) return prim;
  return t;
}

inline bool same_param_type(const std::string& a, const std::string& b) {
  return unboxed(simple_type_name(a)) == unboxed(simple_type_name(b));
}

// Replacement parameters drawn, in order, from the deprecated ones; when a
// type fits several positions the later one wins.
inline std::optional<std::vector<std::size_t>> positional_args(const ApiMapping& m) {
  std::vector<std::size_t> picks(m.replacement_param_types.size());
  std::size_t limit = m.param_types.size();
  for (std::size_t j = m.replacement_param_types.size(); j-- > 0;) {
    bool found = false;
    while (limit > 0) {
      --limit;
      if (same_param_type(m.param_types[limit], m.replacement_param_types[j])) {
        picks[j] = limit;
        found = true;
        break;
      }
    }
    if (!found) return std::nullopt;
  }
  return picks;
}

inline std::string call_text(const std::string& recv, const std::string& method,
                             const std::vector<std::string>& args) {
  std::string out = recv + "." + method + "(";
  for (std::size_t i = 0; i < args.size(); ++i) out += (i ? ", " : "") + args[i];
  return out + ")";
}

}  // namespace detail

inline SynthesisPlan plan_synthesis(const UpdatedBlock& block, const ApiMapping& mapping) {
  if (auto problem = validate_block(block, mapping))
    throw SynthesisError("update block is not valid: " + *problem);
  auto picks = detail::positional_args(mapping);
  if (!picks) {
    std::string want;
    for (const auto& t : mapping.replacement_param_types) want += (want.empty() ? "" : ", ") + t;
    throw SynthesisError("arguments of " + mapping.replacement_method + "(" + want +
                         ") cannot be taken from the arguments of " + mapping.deprecated_method +
                         "; the update needs new values the example does not provide");
  }
  SynthesisPlan plan;
  for (std::size_t i = 0; i < mapping.param_types.size(); ++i)
    plan.arg_metavars.push_back("arg" + std::to_string(i));
  plan.replacement_args = std::move(*picks);
  plan.guard_text = "Build.VERSION.SDK_INT >= Build.VERSION_CODES." + mapping.since_version;
  plan.receiver_type = mapping.class_simple_name();
  plan.two_rules = mapping.returns_value();
  return plan;
}

/// Patch text in the canonical shape: receiver declaration anchor, a gap,
/// then the deprecated call wrapped into a version-guarded if/else.
inline std::string synthesize_patch_text(const SynthesisPlan& plan, const ApiMapping& mapping) {
  std::vector<std::string> new_args;
  for (std::size_t idx : plan.replacement_args) new_args.push_back(plan.arg_metavars[idx]);
  const std::string old_call =
      detail::call_text(plan.receiver_metavar, mapping.deprecated_method, plan.arg_metavars);
  const std::string new_call = detail::call_text(plan.receiver_metavar, mapping.replacement_method, new_args);

  SemanticPatch patch;
  auto make_rule = [&](const std::string& name, const std::string& lhs) {
    std::string text = "@" + name + "@\n";
    text += "expression " + plan.init_metavar;
    for (const auto& a : plan.arg_metavars) text += ", " + a;
    text += ";\nidentifier " + plan.receiver_metavar + ";\n@@\n";
    text += plan.receiver_type + " " + plan.receiver_metavar + " = " + plan.init_metavar + ";\n";
    text += "...\n";
    text += "+ if (" + plan.guard_text + ") {\n";
    text += "+ " + lhs + new_call + ";\n";
    text += "+ } else {\n";
    text += lhs + old_call + ";\n";
    text += "+ }\n";
    return text;
  };
  std::string text = make_rule(kStatementRule, "");
  if (plan.two_rules) text += "\n" + make_rule(kAssignmentRule, plan.return_temp + " = ");
  // Printing the parsed form keeps the output canonical.
  return format_patch(parse_patch(text));
}

inline SemanticPatch synthesize_patch(const UpdatedBlock& block, const ApiMapping& mapping) {
  return parse_patch(synthesize_patch_text(plan_synthesis(block, mapping), mapping));
}

}  // namespace guardpatch
