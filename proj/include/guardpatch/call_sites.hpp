#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "guardpatch/api_mapping.hpp"
#include "guardpatch/syntax/ast.hpp"

namespace guardpatch {

enum class CallRole { StandaloneStmt, AssignmentRhs, Subexpression };

inline const char* to_string(CallRole r) {
  switch (r) {
    case CallRole::StandaloneStmt: return "standalone-stmt";
    case CallRole::AssignmentRhs: return "assignment-rhs";
    case CallRole::Subexpression: return "subexpression";
  }
  return "?";
}

/// One syntactic use of the deprecated method. Pointers refer into the unit
/// passed to find_calls and are valid only as long as that unit lives.
struct CallSite {
  const MethodDecl* method = nullptr;
  // From the method body block down to the innermost enclosing statement.
  std::vector<const Stmt*> stmt_path;
  const Expr* expr = nullptr;
  CallRole role = CallRole::Subexpression;
  // Target variable when role == AssignmentRhs and the target is a plain name.
  std::string assigned_name;
  Location location;

  const Stmt& statement() const { return *stmt_path.back(); }
  const Stmt* parent_statement() const {
    return stmt_path.size() >= 2 ? stmt_path[stmt_path.size() - 2] : nullptr;
  }
};

namespace detail {

template <typename Pred>
void collect_calls(const Expr& e, const Stmt& stmt, const std::vector<const Stmt*>& path,
                   const MethodDecl& method, const SourceUnit& unit, Pred&& matches,
                   std::vector<CallSite>& out) {
  if (e.kind == ExprKind::MethodCall && matches(e)) {
    CallSite site;
    site.method = &method;
    site.stmt_path = path;
    site.stmt_path.push_back(&stmt);
    site.expr = &e;
    site.location = locate(unit.text, e.span.begin);
    if (stmt.kind == StmtKind::ExprStmt && stmt.expr.get() == &e) {
      site.role = CallRole::StandaloneStmt;
    } else if (stmt.kind == StmtKind::ExprStmt && stmt.expr->kind == ExprKind::Assign &&
               stmt.expr->op == "=" && &stmt.expr->rhs() == &e) {
      site.role = CallRole::AssignmentRhs;
      site.assigned_name = dotted_name(stmt.expr->lhs());
    } else if (stmt.kind == StmtKind::LocalVarDecl && stmt.expr.get() == &e) {
      site.role = CallRole::AssignmentRhs;
      site.assigned_name = stmt.name;
    }
    out.push_back(std::move(site));
  }
  for (const auto& child : e.operands)
    collect_calls(*child, stmt, path, method, unit, matches, out);
}

}  // namespace detail

/// Every call satisfying `matches`, in source order (outer call first when two
/// calls start at the same offset). Opaque methods are skipped.
template <typename Pred>
std::vector<CallSite> find_calls_if(const SourceUnit& unit, Pred&& matches) {
  std::vector<CallSite> out;
  for_each_method(unit, [&](const MethodDecl& m) {
    if (!m.body) return;
    walk_stmts(*m.body, [&](const Stmt& s, const std::vector<const Stmt*>& path) {
      for (const Expr* e : own_expressions(s))
        detail::collect_calls(*e, s, path, m, unit, matches, out);
    });
  });
  std::stable_sort(out.begin(), out.end(), [](const CallSite& a, const CallSite& b) {
    if (a.expr->span.begin != b.expr->span.begin) return a.expr->span.begin < b.expr->span.begin;
    return a.expr->span.end > b.expr->span.end;
  });
  return out;
}

inline std::vector<CallSite> find_calls(const SourceUnit& unit, const ApiMapping& mapping) {
  return find_calls_if(unit, [&](const Expr& e) { return matches_deprecated(mapping, e); });
}

/// Opaque methods whose text mentions the deprecated method name; these
/// usages are invisible to analyses.
inline std::vector<const MethodDecl*> opaque_methods_mentioning(const SourceUnit& unit,
                                                                const ApiMapping& mapping) {
  std::vector<const MethodDecl*> out;
  for_each_method(unit, [&](const MethodDecl& m) {
    if (!m.opaque) return;
    for (const Token& t : tokenize(unit.slice(m.body_span)))
      if (t.kind == TokenKind::Identifier && t.text == mapping.deprecated_method) {
        out.push_back(&m);
        return;
      }
  });
  return out;
}

}  // namespace guardpatch
