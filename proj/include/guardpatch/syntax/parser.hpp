#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "guardpatch/error.hpp"
#include "guardpatch/syntax/ast.hpp"
#include "guardpatch/syntax/lexer.hpp"

namespace guardpatch {

namespace detail {

inline constexpr std::array<std::string_view, 9> kPrimitiveTypes = {
    "byte", "short", "int", "long", "float", "double", "boolean", "char", "void"};

inline constexpr std::array<std::string_view, 40> kReservedWords = {
    "if",        "else",       "while",      "for",       "do",       "return",   "throw",
    "try",       "catch",      "finally",    "switch",    "case",     "default",  "break",
    "continue",  "new",        "class",      "interface", "enum",     "extends",  "implements",
    "import",    "package",    "public",     "private",   "protected", "static",  "final",
    "abstract",  "synchronized", "volatile", "transient", "native",   "strictfp", "throws",
    "instanceof", "assert",    "goto",       "const",     "true"};

inline constexpr std::array<std::string_view, 13> kModifiers = {
    "public",    "private",  "protected", "static",   "final",   "abstract", "native",
    "synchronized", "transient", "volatile", "strictfp", "default", "sealed"};

inline bool is_primitive(std::string_view word) {
  return std::find(kPrimitiveTypes.begin(), kPrimitiveTypes.end(), word) != kPrimitiveTypes.end();
}

inline bool is_reserved(std::string_view word) {
  return std::find(kReservedWords.begin(), kReservedWords.end(), word) != kReservedWords.end() ||
         word == "false" || word == "null";
}

inline bool is_modifier(std::string_view word) {
  return std::find(kModifiers.begin(), kModifiers.end(), word) != kModifiers.end();
}

inline bool needs_space(std::string_view prev, std::string_view next) {
  auto wordy = [](std::string_view t) {
    return !t.empty() && (is_ident_part(t.back()) || is_ident_part(t.front()));
  };
  return wordy(prev) && wordy(next) && is_ident_part(prev.back()) && is_ident_part(next.front());
}

/// Recursive-descent parser over a token vector. One instance parses one
/// buffer; statement-level failures throw ParseError, which the unit parser
/// turns into opaque-body markers.
class Parser {
 public:
  Parser(std::string_view text, std::vector<Token> tokens)
      : text_(text), owned_(std::move(tokens)), tokens_(&owned_) {}
  // Borrows `tokens`, which must outlive the parser.
  Parser(std::string_view text, const std::vector<Token>* tokens)
      : text_(text), tokens_(tokens) {}
  Parser(const Parser&) = delete;
  Parser& operator=(const Parser&) = delete;

  const Token& peek(std::size_t ahead = 0) const {
    return (*tokens_)[std::min(pos_ + ahead, tokens_->size() - 1)];
  }
  bool at(std::string_view p, std::size_t ahead = 0) const { return peek(ahead).is(p); }
  bool at_end() const { return peek().kind == TokenKind::End; }
  std::size_t pos() const { return pos_; }
  void reset(std::size_t p) { pos_ = p; }
  const std::vector<Token>& tokens() const { return *tokens_; }

  const Token& advance() {
    const Token& t = (*tokens_)[pos_];
    if (pos_ + 1 < tokens_->size()) ++pos_;
    return t;
  }

  [[noreturn]] void fail(const std::string& expected) const {
    throw ParseError(locate(text_, peek().span.begin), expected);
  }

  const Token& expect(std::string_view p) {
    if (!at(p)) fail("'" + std::string(p) + "'");
    return advance();
  }

  std::size_t prev_end() const { return pos_ == 0 ? 0 : (*tokens_)[pos_ - 1].span.end; }

  bool at_identifier() const {
    return peek().kind == TokenKind::Identifier && !is_reserved(peek().text);
  }

  std::string expect_identifier() {
    if (!at_identifier()) fail("identifier");
    return std::string(advance().text);
  }

  // ---- types -------------------------------------------------------------

  /// Parses a type at the current position; restores the position and
  /// returns nullopt when the tokens don't form one.
  std::optional<std::string> try_type() {
    const std::size_t save = pos_;
    std::string out;
    if (parse_type_into(out)) return out;
    pos_ = save;
    return std::nullopt;
  }

  std::string parse_type() {
    auto t = try_type();
    if (!t) fail("type");
    return *t;
  }

  // ---- expressions -------------------------------------------------------

  ExprPtr parse_expr() { return parse_assignment(); }

  // ---- statements --------------------------------------------------------

  StmtPtr parse_statement() {
    const Token& t = peek();
    if (t.is("{")) return parse_block();
    if (t.is(";")) {
      auto s = make_stmt(StmtKind::Empty, t.span.begin);
      advance();
      return finish(std::move(s));
    }
    if (t.is("if")) return parse_if();
    if (t.is("while")) return parse_while();
    if (t.is("for")) return parse_for();
    if (t.is("return") || t.is("throw")) {
      auto s = make_stmt(t.is("return") ? StmtKind::Return : StmtKind::Throw, t.span.begin);
      advance();
      if (s->kind == StmtKind::Throw || !at(";")) s->expr = parse_expr();
      expect(";");
      return finish(std::move(s));
    }
    if (t.is("try")) return parse_try();
    if (t.is("break") || t.is("continue")) {
      auto s = make_stmt(t.is("break") ? StmtKind::Break : StmtKind::Continue, t.span.begin);
      advance();
      if (at_identifier()) s->name = expect_identifier();
      expect(";");
      return finish(std::move(s));
    }
    if (t.kind == TokenKind::Identifier && is_reserved(t.text) && !t.is("final") &&
        !t.is("new"))
      fail("statement in supported subset");
    if (t.is("@")) fail("statement in supported subset");
    if (t.kind == TokenKind::Identifier && peek(1).is(":")) fail("statement in supported subset");

    if (auto decl = try_local_decl()) {
      expect(";");
      decl->span.end = prev_end();
      return decl;
    }
    auto s = make_stmt(StmtKind::ExprStmt, t.span.begin);
    s->expr = parse_expr();
    const ExprKind k = s->expr->kind;
    const bool is_statement_expr =
        k == ExprKind::Assign || k == ExprKind::MethodCall || k == ExprKind::New ||
        (k == ExprKind::Unary && (s->expr->op == "++" || s->expr->op == "--"));
    if (!is_statement_expr) fail("statement expression");
    expect(";");
    return finish(std::move(s));
  }

  StmtPtr parse_block() {
    auto s = make_stmt(StmtKind::Block, peek().span.begin);
    expect("{");
    while (!at("}")) {
      if (at_end()) fail("'}'");
      s->statements.push_back(parse_statement());
    }
    advance();
    return finish(std::move(s));
  }

 private:
  std::string_view text_;
  std::vector<Token> owned_;
  const std::vector<Token>* tokens_;
  std::size_t pos_ = 0;

  StmtPtr make_stmt(StmtKind kind, std::size_t begin) {
    auto s = std::make_unique<Stmt>();
    s->kind = kind;
    s->span.begin = begin;
    return s;
  }
  StmtPtr finish(StmtPtr s) {
    s->span.end = prev_end();
    return s;
  }
  ExprPtr make_expr(ExprKind kind, std::size_t begin) {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->span.begin = begin;
    return e;
  }
  ExprPtr finish(ExprPtr e) {
    e->span.end = prev_end();
    return e;
  }

  bool parse_type_into(std::string& out) {
    auto append = [&](std::string_view piece) {
      if (!out.empty() && needs_space(out, piece)) out += ' ';
      out += piece;
    };
    const Token& first = peek();
    if (first.kind != TokenKind::Identifier) return false;
    if (is_primitive(first.text)) {
      append(advance().text);
    } else {
      if (is_reserved(first.text)) return false;
      append(advance().text);
      if (at("<") && !parse_type_args(out)) return false;
      while (at(".") && peek(1).kind == TokenKind::Identifier && !is_reserved(peek(1).text)) {
        advance();
        out += '.';
        out += advance().text;
        if (at("<") && !parse_type_args(out)) return false;
      }
    }
    while (at("[") && at("]", 1)) {
      advance();
      advance();
      out += "[]";
    }
    if (at("...")) {
      advance();
      out += "...";
    }
    return true;
  }

  bool parse_type_args(std::string& out) {
    advance();  // <
    out += '<';
    bool first = true;
    while (!at(">")) {
      if (!first) {
        if (!at(",")) return false;
        advance();
        out += ',';
      }
      first = false;
      if (at("?")) {
        advance();
        out += '?';
        if (at("extends") || at("super")) {
          out += ' ';
          out += advance().text;
          out += ' ';
          if (!parse_type_into(out)) return false;
        }
      } else {
        std::string inner;
        if (!parse_type_into(inner)) return false;
        out += inner;
      }
    }
    advance();  // >
    out += '>';
    return true;
  }

  /// `[final] Type name [= init]` without the terminating semicolon.
  StmtPtr try_local_decl() {
    const std::size_t save = pos_;
    const std::size_t begin = peek().span.begin;
    bool is_final = false;
    while (at("final")) {
      advance();
      is_final = true;
    }
    const std::size_t type_begin = peek().span.begin;
    auto type = try_type();
    if (!type || !at_identifier() || !(at("=", 1) || at(";", 1) || at(",", 1) || at("[", 1) ||
                                       at(":", 1) || at(")", 1))) {
      if (is_final) fail("local variable declaration");
      pos_ = save;
      return nullptr;
    }
    if (*type == "void") fail("local variable type");
    auto s = make_stmt(StmtKind::LocalVarDecl, begin);
    s->is_final = is_final;
    s->type = *type;
    s->type_span = Span{type_begin, prev_end()};
    s->name = expect_identifier();
    if (at(",") || at("[")) fail("single declarator");
    if (at("=")) {
      advance();
      if (at("{")) fail("initializer expression");
      s->expr = parse_expr();
    }
    s->span.end = prev_end();
    return s;
  }

  StmtPtr parse_if() {
    auto s = make_stmt(StmtKind::If, peek().span.begin);
    advance();
    expect("(");
    s->expr = parse_expr();
    expect(")");
    s->then_branch = parse_statement();
    if (at("else")) {
      advance();
      s->else_branch = parse_statement();
    }
    return finish(std::move(s));
  }

  StmtPtr parse_while() {
    auto s = make_stmt(StmtKind::While, peek().span.begin);
    advance();
    expect("(");
    s->expr = parse_expr();
    expect(")");
    s->then_branch = parse_statement();
    return finish(std::move(s));
  }

  StmtPtr parse_for() {
    const std::size_t begin = peek().span.begin;
    advance();
    expect("(");
    // enhanced for
    {
      const std::size_t save = pos_;
      auto decl = try_local_decl();
      if (decl && !decl->expr && at(":")) {
        advance();
        auto s = make_stmt(StmtKind::ForEach, begin);
        s->type = decl->type;
        s->type_span = decl->type_span;
        s->name = decl->name;
        s->is_final = decl->is_final;
        s->expr = parse_expr();
        expect(")");
        s->then_branch = parse_statement();
        return finish(std::move(s));
      }
      pos_ = save;
    }
    auto s = make_stmt(StmtKind::For, begin);
    if (!at(";")) {
      if (auto decl = try_local_decl()) {
        s->statements.push_back(std::move(decl));
      } else {
        do {
          if (at(",")) advance();
          auto e = make_stmt(StmtKind::ExprStmt, peek().span.begin);
          e->expr = parse_expr();
          s->statements.push_back(finish(std::move(e)));
        } while (at(","));
      }
    }
    expect(";");
    if (!at(";")) s->expr = parse_expr();
    expect(";");
    if (!at(")")) {
      s->updates.push_back(parse_expr());
      while (at(",")) {
        advance();
        s->updates.push_back(parse_expr());
      }
    }
    expect(")");
    s->then_branch = parse_statement();
    return finish(std::move(s));
  }

  StmtPtr parse_try() {
    auto s = make_stmt(StmtKind::Try, peek().span.begin);
    advance();
    if (at("(")) fail("try block (resources unsupported)");
    s->then_branch = parse_block();
    while (at("catch")) {
      CatchClause c;
      c.span.begin = peek().span.begin;
      advance();
      expect("(");
      while (at("final")) advance();
      c.type = parse_type();
      while (at("|")) {
        advance();
        c.type += "|" + parse_type();
      }
      c.name = expect_identifier();
      expect(")");
      c.body = parse_block();
      c.span.end = prev_end();
      s->catches.push_back(std::move(c));
    }
    if (at("finally")) {
      advance();
      s->else_branch = parse_block();
    }
    if (s->catches.empty() && !s->else_branch) fail("catch or finally");
    return finish(std::move(s));
  }

  ExprPtr parse_assignment() {
    auto lhs = parse_conditional();
    static constexpr std::array<std::string_view, 6> kAssignOps = {"=", "+=", "-=", "*=", "/=", "%="};
    for (std::string_view op : kAssignOps) {
      if (at(op)) {
        const ExprKind lk = lhs->kind;
        if (lk != ExprKind::Identifier && lk != ExprKind::FieldAccess && lk != ExprKind::ArrayAccess)
          fail("assignable expression");
        auto e = make_expr(ExprKind::Assign, lhs->span.begin);
        e->op = std::string(advance().text);
        e->operands.push_back(std::move(lhs));
        e->operands.push_back(parse_assignment());
        return finish(std::move(e));
      }
    }
    return lhs;
  }

  ExprPtr parse_conditional() {
    auto cond = parse_binary(0);
    if (!at("?")) return cond;
    auto e = make_expr(ExprKind::Conditional, cond->span.begin);
    advance();
    e->operands.push_back(std::move(cond));
    e->operands.push_back(parse_expr());
    expect(":");
    e->operands.push_back(parse_conditional());
    return finish(std::move(e));
  }

  static int precedence(const Token& t) {
    if (t.kind != TokenKind::Punct) return -1;
    static constexpr std::array<std::pair<std::string_view, int>, 13> kLevels = {{
        {"||", 0}, {"&&", 1}, {"==", 2}, {"!=", 2}, {"<", 3}, {"<=", 3}, {">", 3},
        {">=", 3}, {"+", 4}, {"-", 4}, {"*", 5}, {"/", 5}, {"%", 5},
    }};
    for (const auto& [op, level] : kLevels)
      if (t.text == op) return level;
    return -1;
  }

  ExprPtr parse_binary(int min_level) {
    auto lhs = parse_unary();
    while (true) {
      if (at("instanceof")) fail("expression in supported subset");
      const int level = precedence(peek());
      if (level < min_level) return lhs;
      auto e = make_expr(ExprKind::Binary, lhs->span.begin);
      e->op = std::string(advance().text);
      e->operands.push_back(std::move(lhs));
      e->operands.push_back(parse_binary(level + 1));
      lhs = finish(std::move(e));
    }
  }

  bool looks_like_cast() {
    const std::size_t save = pos_;
    advance();  // (
    auto type = try_type();
    bool cast = false;
    if (type && at(")")) {
      const Token& after = peek(1);
      const bool primitive = is_primitive(type->substr(0, type->find('[')));
      if (primitive) {
        cast = true;
      } else {
        cast = (after.kind == TokenKind::Identifier && !after.is("instanceof")) ||
               after.kind == TokenKind::IntLiteral || after.kind == TokenKind::FloatLiteral ||
               after.kind == TokenKind::StringLiteral || after.kind == TokenKind::CharLiteral ||
               after.is("(") || after.is("!") || after.is("~");
      }
    }
    pos_ = save;
    return cast;
  }

  ExprPtr parse_unary() {
    const Token& t = peek();
    if (t.is("+") || t.is("-") || t.is("!") || t.is("~") || t.is("++") || t.is("--")) {
      auto e = make_expr(ExprKind::Unary, t.span.begin);
      e->op = std::string(advance().text);
      e->operands.push_back(parse_unary());
      return finish(std::move(e));
    }
    if (t.is("(") && looks_like_cast()) {
      auto e = make_expr(ExprKind::Cast, t.span.begin);
      advance();
      e->type = parse_type();
      expect(")");
      e->operands.push_back(parse_unary());
      return finish(std::move(e));
    }
    return parse_postfix(parse_primary());
  }

  std::vector<ExprPtr> parse_args() {
    std::vector<ExprPtr> args;
    expect("(");
    if (!at(")")) {
      args.push_back(parse_expr());
      while (at(",")) {
        advance();
        args.push_back(parse_expr());
      }
    }
    expect(")");
    return args;
  }

  ExprPtr parse_postfix(ExprPtr base) {
    while (true) {
      if (at(".")) {
        advance();
        if (at("<")) fail("call without explicit type arguments");
        const Token& name = peek();
        if (name.kind != TokenKind::Identifier || (is_reserved(name.text) && !name.is("class")))
          fail("member name");
        advance();
        if (at("(")) {
          auto e = make_expr(ExprKind::MethodCall, base->span.begin);
          e->name = std::string(name.text);
          e->has_receiver = true;
          e->operands.push_back(std::move(base));
          for (auto& a : parse_args()) e->operands.push_back(std::move(a));
          base = finish(std::move(e));
        } else {
          auto e = make_expr(ExprKind::FieldAccess, base->span.begin);
          e->name = std::string(name.text);
          e->operands.push_back(std::move(base));
          base = finish(std::move(e));
        }
      } else if (at("[")) {
        auto e = make_expr(ExprKind::ArrayAccess, base->span.begin);
        advance();
        e->operands.push_back(std::move(base));
        e->operands.push_back(parse_expr());
        expect("]");
        base = finish(std::move(e));
      } else if (at("++") || at("--")) {
        auto e = make_expr(ExprKind::Unary, base->span.begin);
        e->op = std::string(advance().text);
        e->postfix = true;
        e->operands.push_back(std::move(base));
        base = finish(std::move(e));
      } else if (at("::") || at("->")) {
        fail("expression in supported subset");
      } else {
        return base;
      }
    }
  }

  ExprPtr parse_primary() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::IntLiteral:
      case TokenKind::FloatLiteral:
      case TokenKind::StringLiteral:
      case TokenKind::CharLiteral: {
        auto e = make_expr(ExprKind::Literal, t.span.begin);
        e->literal = t.kind == TokenKind::IntLiteral     ? LiteralKind::Int
                     : t.kind == TokenKind::FloatLiteral ? LiteralKind::Float
                     : t.kind == TokenKind::StringLiteral ? LiteralKind::String
                                                          : LiteralKind::Char;
        e->name = std::string(advance().text);
        return finish(std::move(e));
      }
      case TokenKind::Identifier:
        break;
      default:
        if (t.is("(")) {
          auto e = make_expr(ExprKind::Paren, t.span.begin);
          advance();
          e->operands.push_back(parse_expr());
          expect(")");
          return finish(std::move(e));
        }
        fail("expression");
    }
    if (t.is("true") || t.is("false") || t.is("null")) {
      auto e = make_expr(ExprKind::Literal, t.span.begin);
      e->literal = t.is("null") ? LiteralKind::Null : LiteralKind::Bool;
      e->name = std::string(advance().text);
      return finish(std::move(e));
    }
    if (t.is("new")) {
      auto e = make_expr(ExprKind::New, t.span.begin);
      advance();
      e->type = parse_type();
      if (!at("(")) fail("constructor arguments");
      e->operands = parse_args();
      if (at("{")) fail("expression in supported subset");
      return finish(std::move(e));
    }
    if (is_reserved(t.text) && !t.is("this") && !t.is("super")) fail("expression");
    if (is_primitive(t.text)) fail("expression");
    const std::size_t begin = t.span.begin;
    std::string name(advance().text);
    if (at("(")) {
      auto e = make_expr(ExprKind::MethodCall, begin);
      e->name = std::move(name);
      e->operands = parse_args();
      return finish(std::move(e));
    }
    auto e = make_expr(ExprKind::Identifier, begin);
    e->name = std::move(name);
    return finish(std::move(e));
  }
};

// ---- class-level structure ---------------------------------------------------

class UnitParser {
 public:
  explicit UnitParser(std::string_view text) : text_(text), p_(text, tokenize(text)) {}

  std::vector<TypeDecl> parse() {
    std::vector<TypeDecl> decls;
    while (!p_.at_end()) {
      if (p_.at("package") || p_.at("import")) {
        skip_to_semicolon();
        continue;
      }
      if (p_.at(";")) {
        p_.advance();
        continue;
      }
      const std::size_t begin = p_.peek().span.begin;
      skip_modifiers();
      if (!at_type_keyword()) p_.fail("class, interface or enum declaration");
      decls.push_back(parse_type_decl(begin));
    }
    return decls;
  }

 private:
  std::string_view text_;
  Parser p_;

  const std::vector<Token>& toks() const { return p_.tokens(); }

  bool at_type_keyword() const {
    return p_.at("class") || p_.at("interface") || p_.at("enum") || p_.at("record") ||
           (p_.at("@") && p_.at("interface", 1));
  }

  void skip_to_semicolon() {
    while (!p_.at(";")) {
      if (p_.at_end()) p_.fail("';'");
      p_.advance();
    }
    p_.advance();
  }

  /// Skips a balanced group starting at the current open token.
  void skip_balanced() {
    std::vector<std::string_view> stack;
    do {
      const Token& t = p_.peek();
      if (t.kind == TokenKind::End) p_.fail(stack.empty() ? "token" : "'" + closer(stack.back()) + "'");
      if (t.is("(") || t.is("{") || t.is("[")) stack.push_back(t.text);
      if (t.is(")") || t.is("}") || t.is("]")) {
        if (stack.empty() || closer(stack.back()) != t.text) p_.fail("balanced brackets");
        stack.pop_back();
      }
      p_.advance();
    } while (!stack.empty());
  }

  static std::string closer(std::string_view open) {
    return open == "(" ? ")" : open == "{" ? "}" : "]";
  }

  void skip_annotation() {
    p_.advance();  // @
    p_.expect_identifier();
    while (p_.at(".") && p_.peek(1).kind == TokenKind::Identifier) {
      p_.advance();
      p_.advance();
    }
    if (p_.at("(")) skip_balanced();
  }

  void skip_modifiers() {
    while (true) {
      if (p_.at("@") && !p_.at("interface", 1)) {
        skip_annotation();
      } else if (p_.peek().kind == TokenKind::Identifier && is_modifier(p_.peek().text)) {
        p_.advance();
      } else if (p_.at("non") && p_.at("-", 1) && p_.at("sealed", 2)) {
        p_.advance();
        p_.advance();
        p_.advance();
      } else {
        return;
      }
    }
  }

  TypeDecl parse_type_decl(std::size_t begin) {
    TypeDecl decl;
    if (p_.at("@")) {
      p_.advance();
      decl.keyword = "@interface";
    } else {
      decl.keyword = std::string(p_.peek().text);
    }
    p_.advance();
    decl.name = p_.expect_identifier();
    int angle = 0;
    while (!(p_.at("{") && angle == 0)) {
      if (p_.at_end()) p_.fail("'{'");
      if (p_.at("<")) ++angle;
      if (p_.at(">")) --angle;
      if (p_.at("(")) {
        skip_balanced();
        continue;
      }
      p_.advance();
    }
    parse_class_body(decl);
    decl.span = Span{begin, p_.prev_end()};
    return decl;
  }

  void skip_enum_constants() {
    while (!p_.at(";") && !p_.at("}")) {
      if (p_.at_end()) p_.fail("'}'");
      if (p_.at("(") || p_.at("{") || p_.at("[")) {
        skip_balanced();
        continue;
      }
      p_.advance();
    }
    if (p_.at(";")) p_.advance();
  }

  void parse_class_body(TypeDecl& decl) {
    p_.expect("{");
    if (decl.keyword == "enum") skip_enum_constants();
    while (!p_.at("}")) {
      if (p_.at_end()) p_.fail("'}'");
      if (p_.at(";")) {
        p_.advance();
        continue;
      }
      const std::size_t begin = p_.peek().span.begin;
      skip_modifiers();
      if (p_.at("{")) {  // initializer block
        skip_balanced();
        continue;
      }
      if (at_type_keyword()) {
        decl.nested.push_back(parse_type_decl(begin));
        continue;
      }
      if (p_.at("<")) skip_type_params();
      parse_member(decl, begin);
    }
    p_.advance();
  }

  void skip_type_params() {
    int depth = 0;
    do {
      if (p_.at_end()) p_.fail("'>'");
      if (p_.at("<")) ++depth;
      if (p_.at(">")) --depth;
      p_.advance();
    } while (depth > 0);
  }

  void parse_member(TypeDecl& decl, std::size_t begin) {
    const std::size_t header_start = p_.pos();
    int angle = 0;
    while (true) {
      if (p_.at_end()) p_.fail("member declaration");
      if (p_.at("<")) ++angle;
      if (p_.at(">")) --angle;
      if (angle == 0 && (p_.at("(") || p_.at("=") || p_.at(";") || p_.at("{"))) break;
      if (p_.at("}")) p_.fail("member declaration");
      p_.advance();
    }
    if (p_.at("(")) {
      if (p_.pos() == header_start || toks()[p_.pos() - 1].kind != TokenKind::Identifier)
        p_.fail("method name");
      parse_method(decl, begin, std::string(toks()[p_.pos() - 1].text));
      return;
    }
    if (p_.at("{")) {  // enum-constant-like body or something outside the subset
      skip_balanced();
      decl.fields.push_back(Span{begin, p_.prev_end()});
      return;
    }
    // field declaration: skip to the terminating semicolon at depth zero
    while (!p_.at(";")) {
      if (p_.at_end() || p_.at("}")) p_.fail("';'");
      if (p_.at("(") || p_.at("{") || p_.at("[")) {
        skip_balanced();
        continue;
      }
      p_.advance();
    }
    p_.advance();
    decl.fields.push_back(Span{begin, p_.prev_end()});
  }

  std::vector<Param> parse_params(std::size_t open, std::size_t close) {
    std::vector<Param> params;
    std::vector<const Token*> current;
    int depth = 0;
    auto flush = [&] {
      std::vector<const Token*> kept;
      for (std::size_t i = 0; i < current.size(); ++i) {
        const Token* t = current[i];
        if (t->is("@")) {  // drop annotation name
          ++i;
          continue;
        }
        if (t->is("final")) continue;
        kept.push_back(t);
      }
      if (kept.empty()) return;
      Param param;
      param.name = std::string(kept.back()->text);
      for (std::size_t i = 0; i + 1 < kept.size(); ++i) {
        if (!param.type.empty() && needs_space(param.type, kept[i]->text)) param.type += ' ';
        param.type += kept[i]->text;
      }
      params.push_back(std::move(param));
      current.clear();
    };
    for (std::size_t i = open + 1; i < close; ++i) {
      const Token& t = toks()[i];
      if (t.is("<") || t.is("(")) ++depth;
      if (t.is(">") || t.is(")")) --depth;
      if (depth == 0 && t.is(",")) {
        flush();
        continue;
      }
      current.push_back(&t);
    }
    flush();
    return params;
  }

  void parse_method(TypeDecl& decl, std::size_t begin, std::string name) {
    MethodDecl m;
    m.name = std::move(name);
    const std::size_t open = p_.pos();
    skip_balanced();
    m.params = parse_params(open, p_.pos() - 1);
    while (!p_.at("{") && !p_.at(";")) {
      if (p_.at_end() || p_.at("}")) p_.fail("method body");
      if (p_.at("(")) {
        skip_balanced();
        continue;
      }
      p_.advance();
    }
    if (p_.at(";")) {
      p_.advance();
      m.span = Span{begin, p_.prev_end()};
      decl.methods.push_back(std::move(m));
      return;
    }
    const std::size_t body_open = p_.pos();
    skip_balanced();
    const std::size_t body_close = p_.pos() - 1;
    m.body_span = Span{toks()[body_open].span.begin, toks()[body_close].span.end};
    m.span = Span{begin, m.body_span.end};

    Parser body(text_, &p_.tokens());
    body.reset(body_open);
    try {
      m.body = body.parse_block();
      if (body.pos() != body_close + 1) body.fail("end of method body");
    } catch (const ParseError& e) {
      m.body.reset();
      m.opaque = true;
      m.opaque_reason = e.what();
    }
    decl.methods.push_back(std::move(m));
  }
};

}  // namespace detail

/// Parses a whole compilation unit. Methods whose bodies fall outside the
/// supported subset are kept with `opaque = true`; only an unrecognizable
/// class/member structure raises ParseError.
inline SourceUnit parse_unit(std::string text, std::string path = {}) {
  SourceUnit unit;
  unit.path = std::move(path);
  unit.text = std::move(text);
  detail::UnitParser parser(unit.text);
  unit.decls = parser.parse();
  return unit;
}

/// Parses a single expression that must span the whole buffer.
inline ExprPtr parse_expression(std::string_view text) {
  detail::Parser p(text, tokenize(text));
  auto e = p.parse_expr();
  if (!p.at_end()) p.fail("end of expression");
  return e;
}

/// Parses a sequence of statements that must span the whole buffer.
inline std::vector<StmtPtr> parse_statements(std::string_view text) {
  detail::Parser p(text, tokenize(text));
  std::vector<StmtPtr> out;
  while (!p.at_end()) out.push_back(p.parse_statement());
  return out;
}

inline StmtPtr parse_statement(std::string_view text) {
  detail::Parser p(text, tokenize(text));
  auto s = p.parse_statement();
  if (!p.at_end()) p.fail("end of statement");
  return s;
}

inline std::size_t count_opaque(const SourceUnit& unit) {
  std::size_t n = 0;
  for_each_method(unit, [&](const MethodDecl& m) { n += m.opaque ? 1 : 0; });
  return n;
}

}  // namespace guardpatch
