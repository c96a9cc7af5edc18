#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "guardpatch/syntax/lexer.hpp"

namespace guardpatch {

enum class ExprKind {
  MethodCall,
  FieldAccess,
  Identifier,
  Literal,
  Binary,
  Assign,
  New,
  Cast,
  Unary,
  Paren,
  ArrayAccess,
  Conditional,
};

enum class LiteralKind { Int, Float, String, Char, Bool, Null };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

/// Expression node. Operand layout per kind:
///   MethodCall   [receiver?] args...   (has_receiver tells which)
///   FieldAccess  [target]              name = field
///   Binary       [lhs, rhs]            op
///   Assign       [lhs, rhs]            op ("=", "+=", ...)
///   New          args...               type
///   Cast         [operand]             type
///   Unary        [operand]             op, postfix
///   Paren        [inner]
///   ArrayAccess  [array, index]
///   Conditional  [cond, then, else]
struct Expr {
  ExprKind kind = ExprKind::Identifier;
  Span span;
  std::string name;
  std::string op;
  std::string type;
  LiteralKind literal = LiteralKind::Int;
  bool has_receiver = false;
  bool postfix = false;
  std::vector<ExprPtr> operands;

  const Expr* receiver() const {
    return kind == ExprKind::MethodCall && has_receiver ? operands.front().get() : nullptr;
  }
  std::span<const ExprPtr> args() const {
    std::span<const ExprPtr> all(operands);
    return has_receiver ? all.subspan(1) : all;
  }
  const Expr& lhs() const { return *operands.at(0); }
  const Expr& rhs() const { return *operands.at(1); }
  const Expr& operand() const { return *operands.at(0); }
};

enum class StmtKind {
  Block,
  LocalVarDecl,
  ExprStmt,
  If,
  While,
  For,
  ForEach,
  Return,
  Throw,
  Try,
  Break,
  Continue,
  Empty,
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct CatchClause {
  Span span;
  std::string type;
  std::string name;
  StmtPtr body;
};

/// Statement node. Field use per kind:
///   Block         statements
///   LocalVarDecl  type, name, expr = initializer (may be null), is_final
///   ExprStmt      expr
///   If            expr = condition, then_branch, else_branch (may be null)
///   While         expr = condition, then_branch = body
///   For           statements = init, expr = condition (may be null), updates, then_branch = body
///   ForEach       type, name, expr = iterable, then_branch = body
///   Return/Throw  expr (may be null for return)
///   Try           then_branch = block, catches, else_branch = finally block
struct Stmt {
  StmtKind kind = StmtKind::Empty;
  Span span;
  Span type_span;
  std::string type;
  std::string name;
  bool is_final = false;
  ExprPtr expr;
  std::vector<StmtPtr> statements;
  std::vector<ExprPtr> updates;
  StmtPtr then_branch;
  StmtPtr else_branch;
  std::vector<CatchClause> catches;
};

struct Param {
  std::string type;
  std::string name;
};

struct MethodDecl {
  std::string name;
  Span span;
  Span body_span;
  std::vector<Param> params;
  // Null when the method is abstract/native or when its body is opaque.
  StmtPtr body;
  bool opaque = false;
  std::string opaque_reason;

  bool has_body() const noexcept { return !body_span.empty(); }
};

struct TypeDecl {
  std::string keyword;  // class, interface, enum, @interface
  std::string name;
  Span span;
  std::vector<Span> fields;
  std::vector<MethodDecl> methods;
  std::vector<TypeDecl> nested;
};

/// Parsed source file. Trees carry spans into `text`; comments and whitespace
/// live only in the text.
struct SourceUnit {
  std::string path;
  std::string text;
  std::vector<TypeDecl> decls;

  std::string_view slice(const Span& s) const { return s.of(text); }
};

/// Visits every method in declaration order, nested types after their outer
/// type's own methods.
template <typename Fn>
void for_each_method(const TypeDecl& decl, Fn&& fn) {
  for (const auto& m : decl.methods) fn(m);
  for (const auto& t : decl.nested) for_each_method(t, fn);
}

template <typename Fn>
void for_each_method(const SourceUnit& unit, Fn&& fn) {
  for (const auto& t : unit.decls) for_each_method(t, fn);
}

/// Spelled-out dotted name of an Identifier/FieldAccess chain ("a.b.c"), or
/// empty when the expression is anything else.
inline std::string dotted_name(const Expr& e) {
  if (e.kind == ExprKind::Identifier) return e.name;
  if (e.kind == ExprKind::FieldAccess) {
    std::string head = dotted_name(e.operand());
    if (head.empty()) return {};
    return head + "." + e.name;
  }
  return {};
}

inline const Expr& strip_parens(const Expr& e) {
  const Expr* cur = &e;
  while (cur->kind == ExprKind::Paren) cur = &cur->operand();
  return *cur;
}

// Structural equality ignores spans, so fragments from different buffers compare.
inline bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.name != b.name || a.op != b.op || a.type != b.type ||
      a.has_receiver != b.has_receiver || a.postfix != b.postfix ||
      a.operands.size() != b.operands.size())
    return false;
  if (a.kind == ExprKind::Literal && a.literal != b.literal) return false;
  for (std::size_t i = 0; i < a.operands.size(); ++i)
    if (!structurally_equal(*a.operands[i], *b.operands[i])) return false;
  return true;
}

inline bool structurally_equal(const Stmt& a, const Stmt& b);

inline bool structurally_equal_opt(const Stmt* a, const Stmt* b) {
  if (!a || !b) return a == b;
  return structurally_equal(*a, *b);
}

inline bool structurally_equal(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind || a.type != b.type || a.name != b.name || a.is_final != b.is_final)
    return false;
  if (static_cast<bool>(a.expr) != static_cast<bool>(b.expr)) return false;
  if (a.expr && !structurally_equal(*a.expr, *b.expr)) return false;
  if (a.statements.size() != b.statements.size() || a.updates.size() != b.updates.size() ||
      a.catches.size() != b.catches.size())
    return false;
  for (std::size_t i = 0; i < a.statements.size(); ++i)
    if (!structurally_equal(*a.statements[i], *b.statements[i])) return false;
  for (std::size_t i = 0; i < a.updates.size(); ++i)
    if (!structurally_equal(*a.updates[i], *b.updates[i])) return false;
  for (std::size_t i = 0; i < a.catches.size(); ++i) {
    const auto& ca = a.catches[i];
    const auto& cb = b.catches[i];
    if (ca.type != cb.type || ca.name != cb.name || !structurally_equal(*ca.body, *cb.body))
      return false;
  }
  return structurally_equal_opt(a.then_branch.get(), b.then_branch.get()) &&
         structurally_equal_opt(a.else_branch.get(), b.else_branch.get());
}

/// Preorder walk over an expression tree.
template <typename Fn>
void walk_expr(const Expr& e, Fn&& fn) {
  fn(e);
  for (const auto& child : e.operands) walk_expr(*child, fn);
}

/// Expressions owned directly by a statement (not by nested statements), in
/// source order.
inline std::vector<const Expr*> own_expressions(const Stmt& s) {
  std::vector<const Expr*> out;
  if (s.kind == StmtKind::For) {
    // init statements are walked as statements; condition then updates
    if (s.expr) out.push_back(s.expr.get());
    for (const auto& u : s.updates) out.push_back(u.get());
    return out;
  }
  if (s.expr) out.push_back(s.expr.get());
  return out;
}

/// Direct child statements in source order.
inline std::vector<const Stmt*> child_statements(const Stmt& s) {
  std::vector<const Stmt*> out;
  for (const auto& c : s.statements) out.push_back(c.get());
  if (s.then_branch) out.push_back(s.then_branch.get());
  for (const auto& c : s.catches) out.push_back(c.body.get());
  if (s.else_branch) out.push_back(s.else_branch.get());
  return out;
}

/// Preorder statement walk; `fn(stmt, path)` where path holds the ancestors
/// from the outermost statement down to the parent.
template <typename Fn>
void walk_stmts(const Stmt& s, Fn&& fn, std::vector<const Stmt*>& path) {
  fn(s, path);
  path.push_back(&s);
  for (const Stmt* c : child_statements(s)) walk_stmts(*c, fn, path);
  path.pop_back();
}

template <typename Fn>
void walk_stmts(const Stmt& s, Fn&& fn) {
  std::vector<const Stmt*> path;
  walk_stmts(s, fn, path);
}

}  // namespace guardpatch
