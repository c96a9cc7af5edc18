#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "guardpatch/api_mapping.hpp"
#include "guardpatch/error.hpp"
#include "guardpatch/syntax/parser.hpp"
#include "guardpatch/syntax/splice.hpp"
#include "guardpatch/version_guard.hpp"

namespace guardpatch {

enum class Polarity { NewInThen, NewInElse };

enum class OldCallShape { ExprStmt, Assignment, Other };

inline const char* to_string(Polarity p) {
  return p == Polarity::NewInThen ? "new-in-then" : "new-in-else";
}

inline const char* to_string(OldCallShape s) {
  switch (s) {
    case OldCallShape::ExprStmt: return "expr-stmt";
    case OldCallShape::Assignment: return "assignment";
    case OldCallShape::Other: return "other";
  }
  return "?";
}

/// A version-guarded if/else whose branches hold the replacement call and
/// the deprecated call respectively. Branches are kept as statement source
/// texts so the block outlives the unit it came from.
struct UpdatedBlock {
  VersionGuard guard;
  std::vector<std::string> new_branch;
  std::vector<std::string> old_branch;
  Polarity polarity = Polarity::NewInThen;
  OldCallShape old_call_shape = OldCallShape::Other;
  std::string assigned_name;  // target of the old call when shape is Assignment
  Span span;
  Location location;
};

namespace detail {

template <typename Pred>
bool contains_call(const Stmt& s, Pred&& pred) {
  bool found = false;
  walk_stmts(s, [&](const Stmt& st, const std::vector<const Stmt*>&) {
    for (const Expr* e : own_expressions(st))
      walk_expr(*e, [&](const Expr& x) {
        if (x.kind == ExprKind::MethodCall && pred(x)) found = true;
      });
  });
  return found;
}

template <typename Pred>
bool contains_call(const std::vector<StmtPtr>& stmts, Pred&& pred) {
  for (const auto& s : stmts)
    if (contains_call(*s, pred)) return true;
  return false;
}

inline std::vector<std::string> branch_texts(const SourceUnit& unit, const Stmt& branch) {
  std::vector<std::string> out;
  if (branch.kind == StmtKind::Block) {
    for (const auto& s : branch.statements) out.emplace_back(unit.slice(s->span));
  } else {
    out.emplace_back(unit.slice(branch.span));
  }
  return out;
}

inline bool is_comparison(std::string_view op) {
  return op == "<" || op == "<=" || op == ">" || op == ">=" || op == "==" || op == "!=";
}

/// Statements that may reassign `name` anywhere inside `s`.
inline bool assigns_to(const Stmt& s, const std::string& name) {
  bool found = false;
  walk_stmts(s, [&](const Stmt& st, const std::vector<const Stmt*>&) {
    if (st.kind == StmtKind::LocalVarDecl && st.name == name) found = true;
    for (const Expr* e : own_expressions(st))
      walk_expr(*e, [&](const Expr& x) {
        if (x.kind == ExprKind::Assign && x.lhs().kind == ExprKind::Identifier &&
            x.lhs().name == name)
          found = true;
        if (x.kind == ExprKind::Unary && (x.op == "++" || x.op == "--") &&
            x.operand().kind == ExprKind::Identifier && x.operand().name == name)
          found = true;
      });
  });
  return found;
}

inline void replace_in_condition(const Expr& cond,
                                 const std::map<std::string, std::string>& tracked,
                                 std::vector<Edit>& edits) {
  walk_expr(cond, [&](const Expr& e) {
    if (e.kind != ExprKind::Binary || !is_comparison(e.op)) return;
    for (const auto& side : e.operands) {
      const Expr& operand = strip_parens(*side);
      if (operand.kind != ExprKind::Identifier) continue;
      auto it = tracked.find(operand.name);
      if (it != tracked.end()) edits.push_back(Edit{operand.span, it->second});
    }
  });
}

inline void normalize_conditions_in_list(const SourceUnit& unit,
                                         const std::vector<StmtPtr>& list,
                                         std::vector<Edit>& edits);

inline void normalize_conditions_nested(const SourceUnit& unit, const Stmt& s,
                                        std::vector<Edit>& edits) {
  if (s.kind == StmtKind::Block) {
    normalize_conditions_in_list(unit, s.statements, edits);
    return;
  }
  for (const Stmt* c : child_statements(s)) normalize_conditions_nested(unit, *c, edits);
}

// Tracking is local to one statement list: last assignment before the use,
// no flow into nested blocks.
inline void normalize_conditions_in_list(const SourceUnit& unit,
                                         const std::vector<StmtPtr>& list,
                                         std::vector<Edit>& edits) {
  std::map<std::string, std::string> tracked;
  for (const auto& sp : list) {
    const Stmt& s = *sp;
    if (s.kind == StmtKind::If) {
      for (const Stmt* chain = &s; chain && chain->kind == StmtKind::If;
           chain = chain->else_branch.get())
        replace_in_condition(*chain->expr, tracked, edits);
    }

    const Expr* assigned = nullptr;
    std::string target;
    if (s.kind == StmtKind::LocalVarDecl) {
      target = s.name;
      assigned = s.expr.get();
    } else if (s.kind == StmtKind::ExprStmt && s.expr->kind == ExprKind::Assign &&
               s.expr->op == "=" && s.expr->lhs().kind == ExprKind::Identifier) {
      target = s.expr->lhs().name;
      assigned = &s.expr->rhs();
    }
    for (auto it = tracked.begin(); it != tracked.end();) {
      if (it->first != target && assigns_to(s, it->first))
        it = tracked.erase(it);
      else
        ++it;
    }
    if (!target.empty()) {
      if (assigned && is_version_expr(*assigned))
        tracked[target] = std::string(unit.slice(strip_parens(*assigned).span));
      else
        tracked.erase(target);
    }
    normalize_conditions_nested(unit, s, edits);
  }
}

}  // namespace detail

/// Replaces local variables holding SDK_INT or a VERSION_CODES constant with
/// the constant itself inside if-condition comparisons. Declarations stay.
inline SourceUnit normalize_version_conditions(const SourceUnit& unit) {
  std::vector<Edit> edits;
  for_each_method(unit, [&](const MethodDecl& m) {
    if (m.body) detail::normalize_conditions_in_list(unit, m.body->statements, edits);
  });
  return parse_unit(splice(unit, std::move(edits)), unit.path);
}

/// Checks every UpdatedBlock invariant; returns the first violation.
inline std::optional<std::string> validate_block(const UpdatedBlock& block,
                                                 const ApiMapping& mapping) {
  const auto& g = block.guard;
  if (g.op != ">=" && g.op != ">" && g.op != "<=" && g.op != "<")
    return "guard operator '" + g.op + "' is not a version comparison";
  if (g.version_text.empty() || !g.version_value) return std::string("guard has no version operand");
  std::vector<StmtPtr> fresh_new, fresh_old;
  try {
    for (const auto& t : block.new_branch) fresh_new.push_back(parse_statement(t));
    for (const auto& t : block.old_branch) fresh_old.push_back(parse_statement(t));
  } catch (const ParseError& e) {
    return std::string("branch does not parse: ") + e.what();
  }
  auto is_new = [&](const Expr& e) { return matches_replacement(mapping, e); };
  auto is_old = [&](const Expr& e) { return matches_deprecated(mapping, e); };
  if (!detail::contains_call(fresh_new, is_new)) return std::string("new branch lacks the replacement call");
  if (detail::contains_call(fresh_new, is_old)) return std::string("new branch contains the deprecated call");
  if (!detail::contains_call(fresh_old, is_old)) return std::string("old branch lacks the deprecated call");
  if (detail::contains_call(fresh_old, is_new)) return std::string("old branch contains the replacement call");
  return std::nullopt;
}

/// First if/else, in source order, that is guarded by a version check and
/// splits the replacement call and the deprecated call across its branches.
inline UpdatedBlock extract_update_block(const SourceUnit& unit, const ApiMapping& mapping) {
  auto is_new = [&](const Expr& e) { return matches_replacement(mapping, e); };
  auto is_old = [&](const Expr& e) { return matches_deprecated(mapping, e); };

  std::optional<UpdatedBlock> result;
  for_each_method(unit, [&](const MethodDecl& m) {
    if (result || !m.body) return;
    walk_stmts(*m.body, [&](const Stmt& s, const std::vector<const Stmt*>&) {
      if (result || s.kind != StmtKind::If || !s.else_branch) return;
      auto guard = as_version_guard(*s.expr, unit.text);
      if (!guard) return;
      const Stmt& then_b = *s.then_branch;
      const Stmt& else_b = *s.else_branch;
      const bool then_new = detail::contains_call(then_b, is_new);
      const bool then_old = detail::contains_call(then_b, is_old);
      const bool else_new = detail::contains_call(else_b, is_new);
      const bool else_old = detail::contains_call(else_b, is_old);

      Polarity polarity;
      if (then_new && !then_old && else_old && !else_new)
        polarity = Polarity::NewInThen;
      else if (else_new && !else_old && then_old && !then_new)
        polarity = Polarity::NewInElse;
      else
        return;

      UpdatedBlock block;
      block.guard = *guard;
      block.polarity = polarity;
      const Stmt& new_b = polarity == Polarity::NewInThen ? then_b : else_b;
      const Stmt& old_b = polarity == Polarity::NewInThen ? else_b : then_b;
      block.new_branch = detail::branch_texts(unit, new_b);
      block.old_branch = detail::branch_texts(unit, old_b);
      block.span = s.span;
      block.location = locate(unit.text, s.span.begin);

      walk_stmts(old_b, [&](const Stmt& st, const std::vector<const Stmt*>&) {
        if (block.old_call_shape != OldCallShape::Other || st.kind != StmtKind::ExprStmt) return;
        const Expr& e = *st.expr;
        if (e.kind == ExprKind::MethodCall && is_old(e)) {
          block.old_call_shape = OldCallShape::ExprStmt;
        } else if (e.kind == ExprKind::Assign && e.op == "=" && is_old(e.rhs()) &&
                   e.lhs().kind == ExprKind::Identifier) {
          block.old_call_shape = OldCallShape::Assignment;
          block.assigned_name = e.lhs().name;
        }
      });
      result = std::move(block);
    });
  });
  if (!result)
    throw NoValidBlock("no version-guarded if/else with '" + mapping.replacement_method +
                       "' in one branch and '" + mapping.deprecated_method + "' in the other" +
                       (unit.path.empty() ? "" : " in " + unit.path));
  return *result;
}

}  // namespace guardpatch
