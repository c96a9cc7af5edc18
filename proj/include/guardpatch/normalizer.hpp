#pragma once

#include <cctype>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "guardpatch/api_mapping.hpp"
#include "guardpatch/call_sites.hpp"
#include "guardpatch/error.hpp"
#include "guardpatch/syntax/parser.hpp"
#include "guardpatch/syntax/splice.hpp"

namespace guardpatch {

/// Reserved temporary names. A generated name may carry a `_k` suffix when
/// the base name already exists in the enclosing method.
struct NamingScheme {
  static constexpr std::string_view return_temp = "tempFunctionReturnValue";
  static constexpr std::string_view param_temp = "paramVar";
  static constexpr std::string_view receiver_temp = "classNameVar";

  static std::string param_name(std::size_t index) {
    return std::string(param_temp) + std::to_string(index);
  }

  /// `name` is `base` or `base_k` for some k >= 1.
  static bool matches(std::string_view name, std::string_view base) {
    if (name.substr(0, base.size()) != base) return false;
    std::string_view rest = name.substr(base.size());
    if (rest.empty()) return true;
    return rest.size() >= 2 && rest[0] == '_' && all_digits(rest.substr(1));
  }

  static bool is_return_temp(std::string_view name) { return matches(name, return_temp); }
  static bool is_receiver_temp(std::string_view name) { return matches(name, receiver_temp); }
  static bool is_param_temp(std::string_view name) {
    if (name.substr(0, param_temp.size()) != param_temp) return false;
    std::string_view rest = name.substr(param_temp.size());
    std::size_t digits = 0;
    while (digits < rest.size() && std::isdigit(static_cast<unsigned char>(rest[digits]))) ++digits;
    if (digits == 0) return false;
    rest = rest.substr(digits);
    return rest.empty() || (rest.size() >= 2 && rest[0] == '_' && all_digits(rest.substr(1)));
  }
  static bool is_reserved(std::string_view name) {
    return is_return_temp(name) || is_receiver_temp(name) || is_param_temp(name);
  }

  /// Smallest of `base`, `base_1`, `base_2`, ... not in `taken`.
  static std::string fresh(std::string_view base, const std::set<std::string>& taken) {
    std::string candidate(base);
    for (std::size_t k = 1; taken.count(candidate); ++k)
      candidate = std::string(base) + "_" + std::to_string(k);
    return candidate;
  }

 private:
  static bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
  }
};

namespace detail {

inline void collect_names(const Stmt& s, std::set<std::string>& out) {
  walk_stmts(s, [&](const Stmt& st, const std::vector<const Stmt*>&) {
    if (!st.name.empty() && (st.kind == StmtKind::LocalVarDecl || st.kind == StmtKind::ForEach))
      out.insert(st.name);
    for (const auto& c : st.catches) out.insert(c.name);
    for (const Expr* e : own_expressions(st))
      walk_expr(*e, [&](const Expr& x) {
        if (x.kind == ExprKind::Identifier) out.insert(x.name);
      });
  });
}

/// Variable-like names present in a method: parameters, locals, and every
/// identifier expression.
inline std::set<std::string> method_names(const MethodDecl& m) {
  std::set<std::string> out;
  for (const auto& p : m.params) out.insert(p.name);
  if (m.body) collect_names(*m.body, out);
  return out;
}

inline bool references_name(const Stmt& s, std::string_view name) {
  bool found = false;
  walk_stmts(s, [&](const Stmt& st, const std::vector<const Stmt*>&) {
    for (const Expr* e : own_expressions(st))
      walk_expr(*e, [&](const Expr& x) {
        if (x.kind == ExprKind::Identifier && x.name == name) found = true;
      });
  });
  return found;
}

/// Leading whitespace of the line containing `offset`.
inline std::string line_indent(std::string_view text, std::size_t offset) {
  std::size_t start = 0;
  if (offset > 0) {
    const std::size_t nl = text.rfind('\n', offset - 1);
    if (nl != std::string_view::npos) start = nl + 1;
  }
  std::size_t end = start;
  while (end < text.size() && (text[end] == ' ' || text[end] == '\t')) ++end;
  return std::string(text.substr(start, end - start));
}

/// Adds `extra` after every newline of `text`.
inline std::string reindent(std::string_view text, std::string_view extra) {
  std::string out;
  for (char c : text) {
    out += c;
    if (c == '\n') out += extra;
  }
  return out;
}

/// Text of `stmt` with `inner` (a span inside it) replaced.
inline std::string rewrite_inside(const SourceUnit& unit, const Stmt& stmt, const Span& inner,
                                  std::string_view replacement) {
  std::string out(unit.slice(Span{stmt.span.begin, inner.begin}));
  out += replacement;
  out += unit.slice(Span{inner.end, stmt.span.end});
  return out;
}

/// Position of a call inside its statement, as far as hoisting is concerned.
inline void check_hoistable(const CallSite& site) {
  const Stmt& st = site.statement();
  const Stmt* parent = site.parent_statement();
  auto fail = [&](const char* why) {
    throw NormalizeError(site.location, std::string("cannot normalize call to '") + site.expr->name +
                                            "': " + why);
  };
  if (parent && parent->kind == StmtKind::For &&
      (st.kind == StmtKind::LocalVarDecl || st.kind == StmtKind::ExprStmt)) {
    for (const auto& init : parent->statements)
      if (init.get() == &st) fail("call in for-loop initializer");
  }
  if (st.kind == StmtKind::While) fail("call in loop condition");
  if (st.kind == StmtKind::For) fail("call in for-loop header");

  // Operands evaluated conditionally can't be hoisted without changing behaviour.
  bool conditional = false;
  for (const Expr* root : own_expressions(st)) {
    walk_expr(*root, [&](const Expr& e) {
      if (e.kind == ExprKind::Binary && (e.op == "&&" || e.op == "||") &&
          e.rhs().span.contains(site.expr->span))
        conditional = true;
      if (e.kind == ExprKind::Conditional &&
          (e.operands[1]->span.contains(site.expr->span) ||
           e.operands[2]->span.contains(site.expr->span)))
        conditional = true;
    });
  }
  if (conditional) fail("call is evaluated conditionally");
}

/// Replaces the statement enclosing `site` with `lines` followed by
/// `new_stmt_text`. A statement that is not directly inside a block is wrapped
/// in braces so the hoisted lines stay under the same control flow.
inline Edit hoist_before(const SourceUnit& unit, const CallSite& site,
                         const std::vector<std::string>& lines, const std::string& new_stmt_text) {
  const Stmt& st = site.statement();
  const Stmt* parent = site.parent_statement();
  const std::string indent = line_indent(unit.text, st.span.begin);
  std::string text;
  if (parent && parent->kind == StmtKind::Block) {
    for (const auto& line : lines) text += line + "\n" + indent;
    text += new_stmt_text;
  } else {
    const std::string inner = indent + "    ";
    text = "{\n";
    for (const auto& line : lines) text += inner + line + "\n";
    text += inner + reindent(new_stmt_text, "    ") + "\n" + indent + "}";
  }
  return Edit{st.span, std::move(text)};
}

inline SourceUnit reparse_checked(const SourceUnit& before, std::string text, const CallSite& site) {
  SourceUnit after;
  try {
    after = parse_unit(std::move(text), before.path);
  } catch (const ParseError& e) {
    throw NormalizeError(site.location, std::string("normalized output does not parse: ") + e.what());
  }
  if (count_opaque(after) > count_opaque(before))
    throw NormalizeError(site.location, "normalized output leaves the supported subset");
  return after;
}

inline bool operands_normal(const Expr& call) {
  const Expr* recv = call.receiver();
  if (!recv || recv->kind != ExprKind::Identifier || !NamingScheme::is_receiver_temp(recv->name))
    return false;
  for (const auto& a : call.args())
    if (a->kind != ExprKind::Identifier || !NamingScheme::is_param_temp(a->name)) return false;
  return true;
}

inline bool assigns_return_temp(const CallSite& site) {
  return site.role == CallRole::AssignmentRhs && site.statement().kind == StmtKind::ExprStmt &&
         NamingScheme::is_return_temp(site.assigned_name);
}

inline bool needs_statement_extraction(const CallSite& site, const ApiMapping& mapping) {
  if (!mapping.returns_value()) return false;
  if (site.role == CallRole::StandaloneStmt) return false;
  return !assigns_return_temp(site);
}

/// A declaration `name` visible at the site's statement: declared earlier in
/// one of the enclosing statement lists.
inline const Stmt* visible_declaration(const CallSite& site, std::string_view name) {
  const auto& path = site.stmt_path;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const Stmt* owner = path[i];
    if (owner->kind != StmtKind::Block) continue;
    for (const auto& s : owner->statements) {
      if (s.get() == path[i + 1]) break;
      if (s->kind == StmtKind::LocalVarDecl && s->name == name) return s.get();
    }
  }
  return nullptr;
}

inline std::set<std::string> user_names_of(const MethodDecl& m) {
  std::set<std::string> out;
  for (const auto& n : method_names(m))
    if (!NamingScheme::is_reserved(n)) out.insert(n);
  return out;
}

inline SourceUnit extract_statement_with(const SourceUnit& unit, const CallSite& site,
                                         const ApiMapping& mapping,
                                         const std::set<std::string>& user_names) {
  check_hoistable(site);
  const Stmt& st = site.statement();
  std::string temp = NamingScheme::fresh(NamingScheme::return_temp, user_names);
  bool declare = true;
  if (const Stmt* decl = visible_declaration(site, temp)) {
    if (decl->type == mapping.return_type && !decl->expr && !references_name(st, temp)) {
      declare = false;
    } else {
      auto taken = method_names(*site.method);
      taken.insert(user_names.begin(), user_names.end());
      temp = NamingScheme::fresh(NamingScheme::return_temp, taken);
    }
  }
  std::vector<std::string> lines;
  if (declare) lines.push_back(mapping.return_type + " " + temp + ";");
  lines.push_back(temp + " = " + std::string(unit.slice(site.expr->span)) + ";");
  const std::string rewritten = rewrite_inside(unit, st, site.expr->span, temp);
  return reparse_checked(unit, splice(unit, {hoist_before(unit, site, lines, rewritten)}), site);
}

inline SourceUnit extract_variables_impl(const SourceUnit& unit, const CallSite& site,
                                         const ApiMapping& mapping) {
  const Expr& call = *site.expr;
  if (operands_normal(call)) return parse_unit(unit.text, unit.path);
  const Expr* recv = call.receiver();
  if (!recv)
    throw NormalizeError(site.location, "unqualified call to '" + call.name + "' has no receiver to extract");
  if (recv->kind == ExprKind::Identifier && recv->name == "super")
    throw NormalizeError(site.location, "call through 'super' cannot be extracted");
  check_hoistable(site);

  std::set<std::string> taken = method_names(*site.method);
  std::vector<std::string> lines;
  std::vector<std::string> arg_names;
  const auto args = call.args();
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string name = NamingScheme::fresh(NamingScheme::param_name(i), taken);
    taken.insert(name);
    const std::string& type = i < mapping.param_types.size() ? mapping.param_types[i] : "Object";
    lines.push_back(type + " " + name + " = " + std::string(unit.slice(args[i]->span)) + ";");
    arg_names.push_back(std::move(name));
  }
  const std::string receiver = NamingScheme::fresh(NamingScheme::receiver_temp, taken);
  lines.push_back(mapping.class_simple_name() + " " + receiver + " = " +
                  std::string(unit.slice(recv->span)) + ";");

  std::string new_call = receiver + "." + call.name + "(";
  for (std::size_t i = 0; i < arg_names.size(); ++i) new_call += (i ? ", " : "") + arg_names[i];
  new_call += ")";
  const std::string rewritten = rewrite_inside(unit, site.statement(), call.span, new_call);
  return reparse_checked(unit, splice(unit, {hoist_before(unit, site, lines, rewritten)}), site);
}

}  // namespace detail

/// True when the call's receiver and arguments are reserved temporaries and,
/// for value-returning APIs, the call stands alone or is assigned straight
/// into a return temporary.
inline bool in_normal_form(const CallSite& site, const ApiMapping& mapping) {
  if (!detail::operands_normal(*site.expr)) return false;
  return !detail::needs_statement_extraction(site, mapping);
}

/// Hoists a value-returning call out of a compound expression or statement
/// into `T temp; temp = call;` placed before the enclosing statement.
/// Stand-alone calls and calls already assigned to a return temporary come
/// back unchanged.
inline SourceUnit extract_statement(const SourceUnit& unit, const CallSite& site,
                                    const ApiMapping& mapping) {
  if (!detail::needs_statement_extraction(site, mapping)) return parse_unit(unit.text, unit.path);
  return detail::extract_statement_with(unit, site, mapping, detail::user_names_of(*site.method));
}

/// Hoists every argument into `paramVar{i}` and then the receiver into
/// `classNameVar`, rewriting the call to use them.
inline SourceUnit extract_variables(const SourceUnit& unit, const CallSite& site,
                                    const ApiMapping& mapping) {
  return detail::extract_variables_impl(unit, site, mapping);
}

/// Brings every deprecated call of the unit into normal form, in source
/// order. Running it on its own output changes nothing.
inline SourceUnit normalize_unit(const SourceUnit& unit, const ApiMapping& mapping) {
  SourceUnit current = parse_unit(unit.text, unit.path);
  // Each step fixes one site; the bound only trips on a logic error.
  for (std::size_t step = 0; step < 100000; ++step) {
    const auto sites = find_calls(current, mapping);
    const CallSite* next = nullptr;
    for (const auto& s : sites)
      if (!in_normal_form(s, mapping)) {
        next = &s;
        break;
      }
    if (!next) return current;
    if (detail::needs_statement_extraction(*next, mapping))
      current = extract_statement(current, *next, mapping);
    else
      current = extract_variables(current, *next, mapping);
  }
  throw NormalizeError(Location{}, "normalization did not converge");
}

}  // namespace guardpatch
