#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "guardpatch/error.hpp"
#include "guardpatch/syntax/parser.hpp"
#include "guardpatch/syntax/splice.hpp"
#include "guardpatch/version_guard.hpp"

namespace guardpatch {

enum class MetaKind { Expression, Identifier, Type };

inline const char* to_string(MetaKind k) {
  switch (k) {
    case MetaKind::Expression: return "expression";
    case MetaKind::Identifier: return "identifier";
    case MetaKind::Type: return "type";
  }
  return "?";
}

inline std::optional<MetaKind> meta_kind_from(std::string_view word) {
  if (word == "expression") return MetaKind::Expression;
  if (word == "identifier") return MetaKind::Identifier;
  if (word == "type") return MetaKind::Type;
  return std::nullopt;
}

struct MetaVar {
  MetaKind kind = MetaKind::Expression;
  std::string name;
  bool operator==(const MetaVar&) const = default;
};

enum class LineMark { Context, Minus, Plus, Dots };

/// One body line. Context and minus lines carry a parsed statement pattern
/// whose spans refer to `text`; plus lines are raw templates.
struct PatchLine {
  LineMark mark = LineMark::Context;
  std::string text;
  std::shared_ptr<const Stmt> pattern;
  std::size_t source_line = 0;

  bool is_anchor() const { return mark == LineMark::Context || mark == LineMark::Minus; }
};

struct PatchRule {
  std::string name;
  std::vector<MetaVar> metavars;
  std::vector<PatchLine> lines;

  const MetaVar* find_metavar(std::string_view n) const {
    for (const auto& m : metavars)
      if (m.name == n) return &m;
    return nullptr;
  }
  std::size_t anchor_count() const {
    return static_cast<std::size_t>(
        std::count_if(lines.begin(), lines.end(), [](const PatchLine& l) { return l.is_anchor(); }));
  }
};

struct SemanticPatch {
  std::vector<PatchRule> rules;

  const PatchRule* find_rule(std::string_view name) const {
    for (const auto& r : rules)
      if (r.name == name) return &r;
    return nullptr;
  }
};

/// A bound program fragment. `expr` points into the matched unit and is only
/// valid while that unit lives; `text` is a copy of the source.
struct Fragment {
  MetaKind kind = MetaKind::Expression;
  std::string text;
  Span span;
  const Expr* expr = nullptr;
};

struct Binding {
  std::map<std::string, Fragment> values;
  std::vector<Span> statements;  // matched anchor statements in rule order

  Span extent() const {
    if (statements.empty()) return {};
    return Span{statements.front().begin, statements.back().end};
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

inline std::string trim_left(std::string_view s) {
  std::size_t b = 0;
  while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
  std::string out(s.substr(b));
  while (!out.empty() && (out.back() == '\r' || out.back() == ' ' || out.back() == '\t'))
    out.pop_back();
  return out;
}

inline bool is_rule_name(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

inline bool is_header(std::string_view trimmed) {
  return trimmed.size() >= 2 && trimmed.front() == '@' && trimmed.back() == '@';
}

// A pattern buffer is complete once brackets balance and it ends a statement.
inline bool statement_complete(std::string_view text) {
  std::vector<Token> toks;
  try {
    toks = tokenize(text);
  } catch (const ParseError&) {
    return false;
  }
  int depth = 0;
  const Token* last = nullptr;
  for (const auto& t : toks) {
    if (t.kind == TokenKind::End) break;
    if (t.kind == TokenKind::Punct) {
      if (t.text == "(" || t.text == "{" || t.text == "[") ++depth;
      if (t.text == ")" || t.text == "}" || t.text == "]") --depth;
    }
    last = &t;
  }
  return depth <= 0 && last && last->kind == TokenKind::Punct && (last->text == ";" || last->text == "}");
}

inline bool is_keyword_like(std::string_view w) {
  return is_reserved(w) || is_primitive(w) || w == "true" || w == "false" || w == "null" ||
         w == "this" || w == "super" || w == "var";
}

inline std::set<std::string> identifier_words(std::string_view text) {
  std::set<std::string> out;
  for (const auto& t : tokenize(text))
    if (t.kind == TokenKind::Identifier) out.emplace(t.text);
  return out;
}

// Free lowercase names in plus templates must be declared metavariables,
// concrete names from the anchors, or locals the template itself declares.
inline void check_plus_names(const PatchRule& rule) {
  std::set<std::string> known;
  for (const auto& l : rule.lines)
    if (l.is_anchor())
      for (auto& w : identifier_words(l.text)) known.insert(w);

  std::vector<std::vector<Token>> plus_tokens;
  for (const auto& l : rule.lines)
    if (l.mark == LineMark::Plus) plus_tokens.push_back(tokenize(l.text));

  for (const auto& toks : plus_tokens)
    for (std::size_t i = 1; i + 1 < toks.size(); ++i) {
      const Token& prev = toks[i - 1];
      const Token& t = toks[i];
      const Token& next = toks[i + 1];
      const bool after_type = prev.kind == TokenKind::Identifier ? !is_keyword_like(prev.text) || is_primitive(prev.text)
                                                                 : (prev.is(">") || prev.is("]"));
      if (t.kind == TokenKind::Identifier && after_type &&
          (next.is("=") || next.is(";") || next.is(",") || next.is(":")))
        known.emplace(t.text);
    }

  for (const auto& toks : plus_tokens)
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const Token& t = toks[i];
      if (t.kind != TokenKind::Identifier) continue;
      const std::string w(t.text);
      if (rule.find_metavar(w) || known.count(w) || is_keyword_like(w)) continue;
      if (!w.empty() && !(w[0] >= 'a' && w[0] <= 'z')) continue;
      if (i > 0 && toks[i - 1].is(".")) continue;
      if (i + 1 < toks.size() && toks[i + 1].is("(")) continue;
      throw UndeclaredMetavar(w);
    }
}

inline void validate_rule(const PatchRule& rule, std::size_t header_line) {
  bool has_anchor = false;
  const PatchLine* prev = nullptr;
  for (const auto& l : rule.lines) {
    if (l.is_anchor()) has_anchor = true;
    if (l.mark == LineMark::Dots && prev && prev->mark == LineMark::Dots)
      throw PatchParseError(l.source_line, "'...' directly after another '...'");
    prev = &l;
  }
  if (!has_anchor)
    throw PatchParseError(header_line, "rule has no context or minus line to anchor the match");
  check_plus_names(rule);
}

}  // namespace detail

/// Parses patch text: rules of the form `@name@`, metavariable declarations,
/// `@@`, then body lines marked `-`, `+`, unmarked (context) or `...`.
inline SemanticPatch parse_patch(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::string cur;
    for (char c : text) {
      if (c == '\n') {
        lines.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) lines.push_back(cur);
  }

  SemanticPatch patch;
  std::set<std::string> rule_names;
  std::size_t i = 0;
  auto skip_blank = [&] {
    while (i < lines.size()) {
      const std::string t = detail::trim(lines[i]);
      if (!t.empty() && t.rfind("//", 0) != 0) break;
      ++i;
    }
  };

  skip_blank();
  if (i >= lines.size()) throw PatchParseError(1, "patch contains no rules");

  while (i < lines.size()) {
    const std::size_t header_line = i + 1;
    const std::string header = detail::trim(lines[i]);
    if (!detail::is_header(header))
      throw PatchParseError(header_line, "expected rule header '@name@'");
    PatchRule rule;
    rule.name = header.substr(1, header.size() - 2);
    if (!rule.name.empty()) {
      if (!detail::is_rule_name(rule.name))
        throw PatchParseError(header_line, "bad rule name '" + rule.name + "'");
      if (!rule_names.insert(rule.name).second)
        throw PatchParseError(header_line, "duplicate rule name '" + rule.name + "'");
    }
    ++i;

    // metavariable declarations up to "@@"
    bool closed = false;
    for (; i < lines.size(); ++i) {
      const std::string t = detail::trim(lines[i]);
      if (t.empty()) continue;
      if (t == "@@") {
        closed = true;
        ++i;
        break;
      }
      std::vector<Token> toks;
      try {
        toks = tokenize(t);
      } catch (const ParseError& e) {
        throw PatchParseError(i + 1, e.what());
      }
      if (toks.empty() || toks[0].kind != TokenKind::Identifier)
        throw PatchParseError(i + 1, "expected metavariable kind");
      auto kind = meta_kind_from(toks[0].text);
      if (!kind) throw PatchParseError(i + 1, "unknown metavariable kind '" + std::string(toks[0].text) + "'");
      std::size_t k = 1;
      for (;;) {
        if (toks[k].kind != TokenKind::Identifier || detail::is_reserved(toks[k].text))
          throw PatchParseError(i + 1, "expected metavariable name");
        if (rule.find_metavar(toks[k].text))
          throw PatchParseError(i + 1, "metavariable '" + std::string(toks[k].text) + "' declared twice");
        rule.metavars.push_back(MetaVar{*kind, std::string(toks[k].text)});
        ++k;
        if (toks[k].is(",")) {
          ++k;
          continue;
        }
        if (toks[k].is(";") && toks[k + 1].kind == TokenKind::End) break;
        throw PatchParseError(i + 1, "expected ',' or ';' in metavariable declaration");
      }
    }
    if (!closed) throw PatchParseError(header_line, "missing '@@' after metavariable declarations");

    // body up to the next header
    std::string pending;
    LineMark pending_mark = LineMark::Context;
    std::size_t pending_line = 0;
    auto flush = [&] {
      if (pending.empty()) return;
      if (!detail::statement_complete(pending))
        throw PatchParseError(pending_line, "incomplete statement pattern");
      PatchLine pl;
      pl.mark = pending_mark;
      pl.text = pending;
      pl.source_line = pending_line;
      try {
        pl.pattern = std::shared_ptr<const Stmt>(parse_statement(pl.text));
      } catch (const ParseError& e) {
        throw PatchParseError(pending_line, std::string("statement pattern: ") + e.what());
      }
      rule.lines.push_back(std::move(pl));
      pending.clear();
    };

    for (; i < lines.size(); ++i) {
      const std::string& raw = lines[i];
      const std::string t = detail::trim(raw);
      if (pending.empty() && detail::is_header(t)) break;
      if (t.empty() || (pending.empty() && t.rfind("//", 0) == 0)) continue;

      LineMark mark = LineMark::Context;
      std::string body;
      if (raw[0] == '+') {
        mark = LineMark::Plus;
        body = detail::trim_left(std::string_view(raw).substr(1));
      } else if (raw[0] == '-') {
        mark = LineMark::Minus;
        body = detail::trim_left(std::string_view(raw).substr(1));
      } else {
        body = detail::trim_left(raw);
      }

      if (!pending.empty()) {
        if (mark != pending_mark && !(mark == LineMark::Context && pending_mark == LineMark::Context))
          throw PatchParseError(i + 1, "statement pattern continues with a different mark");
        pending += "\n" + body;
        if (detail::statement_complete(pending)) flush();
        continue;
      }

      if (body == "...") {
        if (mark != LineMark::Context) throw PatchParseError(i + 1, "'...' cannot be marked");
        PatchLine pl;
        pl.mark = LineMark::Dots;
        pl.text = "...";
        pl.source_line = i + 1;
        rule.lines.push_back(std::move(pl));
        continue;
      }
      if (mark == LineMark::Plus) {
        PatchLine pl;
        pl.mark = LineMark::Plus;
        pl.text = body;
        pl.source_line = i + 1;
        rule.lines.push_back(std::move(pl));
        continue;
      }
      pending = body;
      pending_mark = mark;
      pending_line = i + 1;
      if (detail::statement_complete(pending)) flush();
    }
    if (!pending.empty()) throw PatchParseError(pending_line, "incomplete statement pattern");

    try {
      detail::validate_rule(rule, header_line);
    } catch (const ParseError& e) {
      throw PatchParseError(header_line, e.what());
    }
    patch.rules.push_back(std::move(rule));
    skip_blank();
  }
  return patch;
}

/// Deterministic printer; parse_patch(format_patch(p)) yields an equal patch.
inline std::string format_patch(const SemanticPatch& patch) {
  std::ostringstream out;
  bool first = true;
  for (const auto& rule : patch.rules) {
    if (!first) out << "\n";
    first = false;
    out << "@" << rule.name << "@\n";
    for (std::size_t k = 0; k < rule.metavars.size();) {
      const MetaKind kind = rule.metavars[k].kind;
      out << to_string(kind) << " " << rule.metavars[k].name;
      ++k;
      for (; k < rule.metavars.size() && rule.metavars[k].kind == kind; ++k)
        out << ", " << rule.metavars[k].name;
      out << ";\n";
    }
    out << "@@\n";
    for (const auto& line : rule.lines) {
      std::string prefix;
      switch (line.mark) {
        case LineMark::Plus: prefix = "+ "; break;
        case LineMark::Minus: prefix = "- "; break;
        case LineMark::Dots: prefix = ""; break;
        case LineMark::Context:
          prefix = (!line.text.empty() && (line.text[0] == '+' || line.text[0] == '-' || line.text[0] == '@'))
                       ? " "
                       : "";
          break;
      }
      std::size_t start = 0;
      for (;;) {
        const std::size_t nl = line.text.find('\n', start);
        const std::string piece = line.text.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
        out << (start == 0 || line.mark != LineMark::Context ? prefix : std::string(" ")) << piece << "\n";
        if (nl == std::string::npos) break;
        start = nl + 1;
      }
    }
  }
  return out.str();
}

/// Structural patch equality: rule names, metavariables, marks and statement
/// patterns; whitespace inside lines is ignored.
inline bool patches_equivalent(const SemanticPatch& a, const SemanticPatch& b) {
  auto squash = [](std::string_view s) {
    std::string out;
    for (const auto& t : tokenize(s))
      if (t.kind != TokenKind::End) (out += t.text) += "\x1f";
    return out;
  };
  if (a.rules.size() != b.rules.size()) return false;
  for (std::size_t r = 0; r < a.rules.size(); ++r) {
    const auto& x = a.rules[r];
    const auto& y = b.rules[r];
    if (x.name != y.name || x.metavars != y.metavars || x.lines.size() != y.lines.size()) return false;
    for (std::size_t k = 0; k < x.lines.size(); ++k) {
      const auto& lx = x.lines[k];
      const auto& ly = y.lines[k];
      if (lx.mark != ly.mark) return false;
      if (lx.pattern && ly.pattern) {
        if (!structurally_equal(*lx.pattern, *ly.pattern)) return false;
      } else if (squash(lx.text) != squash(ly.text)) {
        return false;
      }
    }
  }
  return true;
}

namespace detail {

struct StmtEntry {
  const Stmt* stmt = nullptr;
  std::vector<const Stmt*> path;  // enclosing statements, outermost first
  int next_sibling = -1;          // next statement of the same block, if any
};

inline void index_statements(const Stmt& s, std::vector<const Stmt*>& path, std::vector<StmtEntry>& out) {
  out.push_back(StmtEntry{&s, path, -1});
  path.push_back(&s);
  if (s.kind == StmtKind::Block) {
    int prev = -1;
    for (const auto& child : s.statements) {
      const int idx = static_cast<int>(out.size());
      if (prev >= 0) out[static_cast<std::size_t>(prev)].next_sibling = idx;
      index_statements(*child, path, out);
      prev = idx;
    }
  } else {
    for (const Stmt* c : child_statements(s)) index_statements(*c, path, out);
  }
  path.pop_back();
}

inline std::vector<StmtEntry> index_method(const MethodDecl& m) {
  std::vector<StmtEntry> out;
  std::vector<const Stmt*> path;
  if (!m.body) return out;
  // The body block itself is not a candidate; its statements are.
  int prev = -1;
  path.push_back(m.body.get());
  for (const auto& child : m.body->statements) {
    const int idx = static_cast<int>(out.size());
    if (prev >= 0) out[static_cast<std::size_t>(prev)].next_sibling = idx;
    index_statements(*child, path, out);
    prev = idx;
  }
  return out;
}

using Env = std::map<std::string, Fragment>;

class Unifier {
 public:
  Unifier(const PatchRule& rule, const SourceUnit& unit) : rule_(rule), unit_(unit) {}

  bool expr(const Expr& p, const Expr& t, Env& env) const {
    if (p.kind == ExprKind::Identifier) {
      if (const MetaVar* mv = rule_.find_metavar(p.name)) {
        switch (mv->kind) {
          case MetaKind::Expression: return bind(*mv, t, env);
          case MetaKind::Identifier:
            return t.kind == ExprKind::Identifier && bind(*mv, t, env);
          case MetaKind::Type: {
            if (dotted_name(t).empty()) return false;
            return bind_text(*mv, std::string(unit_.slice(t.span)), t.span, env);
          }
        }
      }
    }
    if (p.kind != t.kind) return false;
    switch (p.kind) {
      case ExprKind::MethodCall:
      case ExprKind::FieldAccess:
        if (!name(p.name, t.name, t.span, env)) return false;
        if (p.has_receiver != t.has_receiver) return false;
        break;
      case ExprKind::Identifier:
        return p.name == t.name;
      case ExprKind::Literal:
        return p.literal == t.literal && p.name == t.name;
      case ExprKind::Binary:
      case ExprKind::Assign:
      case ExprKind::Unary:
        if (p.op != t.op || p.postfix != t.postfix) return false;
        break;
      case ExprKind::New:
      case ExprKind::Cast:
        if (!type(p.type, t.type, env)) return false;
        break;
      case ExprKind::Paren:
      case ExprKind::ArrayAccess:
      case ExprKind::Conditional:
        break;
    }
    if (p.operands.size() != t.operands.size()) return false;
    for (std::size_t i = 0; i < p.operands.size(); ++i)
      if (!expr(*p.operands[i], *t.operands[i], env)) return false;
    return true;
  }

  bool opt_expr(const Expr* p, const Expr* t, Env& env) const {
    if (!p || !t) return p == t;
    return expr(*p, *t, env);
  }

  bool stmt(const Stmt& p, const Stmt& t, Env& env) const {
    if (p.kind != t.kind) return false;
    switch (p.kind) {
      case StmtKind::LocalVarDecl:
        if (!type(p.type, t.type, env)) return false;
        if (!name(p.name, t.name, t.span, env)) return false;
        return opt_expr(p.expr.get(), t.expr.get(), env);
      case StmtKind::ForEach:
        if (!type(p.type, t.type, env) || !name(p.name, t.name, t.span, env)) return false;
        break;
      case StmtKind::Break:
      case StmtKind::Continue:
        return p.name == t.name;
      default:
        break;
    }
    if (!opt_expr(p.expr.get(), t.expr.get(), env)) return false;
    if (p.statements.size() != t.statements.size() || p.updates.size() != t.updates.size() ||
        p.catches.size() != t.catches.size())
      return false;
    for (std::size_t i = 0; i < p.statements.size(); ++i)
      if (!stmt(*p.statements[i], *t.statements[i], env)) return false;
    for (std::size_t i = 0; i < p.updates.size(); ++i)
      if (!expr(*p.updates[i], *t.updates[i], env)) return false;
    for (std::size_t i = 0; i < p.catches.size(); ++i) {
      if (!type(p.catches[i].type, t.catches[i].type, env)) return false;
      if (!name(p.catches[i].name, t.catches[i].name, t.catches[i].span, env)) return false;
      if (!stmt(*p.catches[i].body, *t.catches[i].body, env)) return false;
    }
    return opt_stmt(p.then_branch.get(), t.then_branch.get(), env) &&
           opt_stmt(p.else_branch.get(), t.else_branch.get(), env);
  }

 private:
  bool opt_stmt(const Stmt* p, const Stmt* t, Env& env) const {
    if (!p || !t) return p == t;
    return stmt(*p, *t, env);
  }

  // Names in declarator, member and method positions.
  bool name(const std::string& p, const std::string& t, Span where, Env& env) const {
    if (const MetaVar* mv = rule_.find_metavar(p)) {
      if (mv->kind != MetaKind::Identifier) return false;
      return bind_text(*mv, t, where, env);
    }
    return p == t;
  }

  bool type(const std::string& p, const std::string& t, Env& env) const {
    if (const MetaVar* mv = rule_.find_metavar(p)) {
      if (mv->kind != MetaKind::Type) return false;
      return bind_text(*mv, t, Span{}, env);
    }
    return p == t;
  }

  static bool bind(const MetaVar& mv, const Expr& t, Env& env) {
    auto it = env.find(mv.name);
    if (it != env.end()) {
      const Fragment& f = it->second;
      if (f.expr) return structurally_equal(*f.expr, t);
      return t.kind == ExprKind::Identifier && f.text == t.name;
    }
    env.emplace(mv.name, Fragment{mv.kind, {}, t.span, &t});
    return true;
  }

  static bool bind_text(const MetaVar& mv, const std::string& text, Span where, Env& env) {
    auto it = env.find(mv.name);
    if (it != env.end()) {
      const Fragment& f = it->second;
      if (f.expr) return f.expr->kind == ExprKind::Identifier && f.expr->name == text;
      return f.text == text;
    }
    env.emplace(mv.name, Fragment{mv.kind, text, where, nullptr});
    return true;
  }

  const PatchRule& rule_;
  const SourceUnit& unit_;
};

struct AnchorHit {
  std::size_t line = 0;  // index into rule.lines
  const StmtEntry* entry = nullptr;
};

struct RawMatch {
  Env env;
  std::vector<AnchorHit> anchors;
};

class RuleMatcher {
 public:
  RuleMatcher(const PatchRule& rule, const SourceUnit& unit) : rule_(rule), unit_(unit), unify_(rule, unit) {
    bool dots = false;
    for (std::size_t k = 0; k < rule.lines.size(); ++k) {
      const auto& l = rule.lines[k];
      if (l.mark == LineMark::Dots) dots = true;
      if (!l.is_anchor()) continue;
      anchor_lines_.push_back(k);
      dots_before_.push_back(dots);
      dots = false;
    }
  }

  // All matches inside one method, each the earliest completion for its start.
  std::vector<RawMatch> match_method(const std::vector<StmtEntry>& entries) const {
    std::vector<RawMatch> out;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      RawMatch m;
      if (extend(entries, 0, static_cast<int>(i), m)) out.push_back(std::move(m));
    }
    return out;
  }

 private:
  bool extend(const std::vector<StmtEntry>& entries, std::size_t a, int idx, RawMatch& m) const {
    const StmtEntry& e = entries[static_cast<std::size_t>(idx)];
    const PatchLine& line = rule_.lines[anchor_lines_[a]];
    Env env = m.env;
    if (!unify_.stmt(*line.pattern, *e.stmt, env)) return false;
    RawMatch next{std::move(env), m.anchors};
    next.anchors.push_back(AnchorHit{anchor_lines_[a], &e});
    if (a + 1 == anchor_lines_.size()) {
      m = std::move(next);
      return true;
    }
    if (dots_before_[a + 1]) {
      for (std::size_t j = static_cast<std::size_t>(idx) + 1; j < entries.size(); ++j) {
        if (entries[j].stmt->span.begin < e.stmt->span.end) continue;
        RawMatch attempt = next;
        if (extend(entries, a + 1, static_cast<int>(j), attempt)) {
          m = std::move(attempt);
          return true;
        }
      }
      return false;
    }
    if (e.next_sibling < 0) return false;
    RawMatch attempt = next;
    if (!extend(entries, a + 1, e.next_sibling, attempt)) return false;
    m = std::move(attempt);
    return true;
  }

  const PatchRule& rule_;
  const SourceUnit& unit_;
  Unifier unify_;
  std::vector<std::size_t> anchor_lines_;
  std::vector<bool> dots_before_;
};

inline bool overlaps_any(const RawMatch& m, const std::vector<Span>& taken) {
  for (const auto& h : m.anchors)
    for (const auto& s : taken)
      if (h.entry->stmt->span.overlaps(s)) return true;
  return false;
}

struct MethodIndex {
  const MethodDecl* method = nullptr;
  std::vector<StmtEntry> entries;
};

// Non-overlapping matches over the whole unit, earliest start first.
inline std::vector<RawMatch> match_all(const PatchRule& rule, const SourceUnit& unit,
                                       std::vector<MethodIndex>& storage) {
  storage.clear();
  for_each_method(unit, [&](const MethodDecl& m) {
    if (m.body) storage.push_back(MethodIndex{&m, index_method(m)});
  });
  std::vector<RawMatch> out;
  RuleMatcher matcher(rule, unit);
  for (const auto& mi : storage) {
    auto candidates = matcher.match_method(mi.entries);
    std::stable_sort(candidates.begin(), candidates.end(), [](const RawMatch& x, const RawMatch& y) {
      return x.anchors.front().entry->stmt->span.begin < y.anchors.front().entry->stmt->span.begin;
    });
    std::vector<Span> taken;
    for (auto& c : candidates) {
      if (overlaps_any(c, taken)) continue;
      for (const auto& h : c.anchors) taken.push_back(h.entry->stmt->span);
      out.push_back(std::move(c));
    }
  }
  return out;
}

inline Binding to_binding(const RawMatch& m, const SourceUnit& unit) {
  Binding b;
  for (const auto& [name, frag] : m.env) {
    Fragment f = frag;
    if (f.expr) f.text = std::string(unit.slice(f.expr->span));
    b.values.emplace(name, std::move(f));
  }
  for (const auto& h : m.anchors) b.statements.push_back(h.entry->stmt->span);
  return b;
}

}  // namespace detail

/// Matches one rule against every method of `unit`.
inline std::vector<Binding> match_rule(const PatchRule& rule, const SourceUnit& unit) {
  std::vector<detail::MethodIndex> storage;
  std::vector<Binding> out;
  for (const auto& m : detail::match_all(rule, unit, storage)) out.push_back(detail::to_binding(m, unit));
  return out;
}

struct MatchReport {
  std::string rule;
  Location location;
  std::map<std::string, std::string> bindings;
  bool skipped = false;
  std::string reason;
};

struct RuleStats {
  std::string rule;
  std::size_t matches = 0;
  std::size_t applied = 0;
  std::size_t skipped = 0;
};

struct TransformResult {
  std::string text;
  std::vector<RuleStats> rules;
  std::vector<MatchReport> sites;

  std::size_t total_matches() const {
    std::size_t n = 0;
    for (const auto& r : rules) n += r.matches;
    return n;
  }
  std::size_t total_applied() const {
    std::size_t n = 0;
    for (const auto& r : rules) n += r.applied;
    return n;
  }
  std::size_t total_skipped() const {
    std::size_t n = 0;
    for (const auto& r : rules) n += r.skipped;
    return n;
  }
  bool changed(std::string_view original) const { return text != original; }
};

namespace detail {

// Plus lines attach before the following anchor, or after the preceding one
// when a dots line or the end of the rule comes first.
struct PlusLayout {
  std::vector<std::vector<std::string>> before, after;  // indexed by anchor ordinal
};

inline PlusLayout layout_plus_lines(const PatchRule& rule) {
  PlusLayout lay;
  const std::size_t n = rule.anchor_count();
  lay.before.resize(n);
  lay.after.resize(n);
  std::vector<std::string> pending;
  int last_anchor = -1;
  auto attach_after = [&] {
    if (pending.empty()) return;
    if (last_anchor >= 0) {
      auto& dst = lay.after[static_cast<std::size_t>(last_anchor)];
      dst.insert(dst.end(), pending.begin(), pending.end());
      pending.clear();
    }
  };
  for (const auto& l : rule.lines) {
    switch (l.mark) {
      case LineMark::Plus: pending.push_back(l.text); break;
      case LineMark::Dots: attach_after(); break;
      case LineMark::Context:
      case LineMark::Minus: {
        ++last_anchor;
        auto& dst = lay.before[static_cast<std::size_t>(last_anchor)];
        dst.insert(dst.end(), pending.begin(), pending.end());
        pending.clear();
        break;
      }
    }
  }
  attach_after();
  return lay;
}

inline bool is_primary(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Identifier:
    case ExprKind::Literal:
    case ExprKind::FieldAccess:
    case ExprKind::MethodCall:
    case ExprKind::Paren:
    case ExprKind::ArrayAccess:
    case ExprKind::New:
      return true;
    default:
      return false;
  }
}

// Token-aware substitution so strings and member names are left alone.
inline std::string instantiate(std::string_view tmpl, const Binding& b) {
  std::vector<Token> toks;
  try {
    toks = tokenize(tmpl);
  } catch (const ParseError&) {
    return std::string(tmpl);
  }
  std::string out;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind != TokenKind::Identifier) continue;
    if (i > 0 && toks[i - 1].is(".")) continue;
    auto it = b.values.find(std::string(t.text));
    if (it == b.values.end()) continue;
    out += tmpl.substr(pos, t.span.begin - pos);
    const Fragment& f = it->second;
    const bool wrap = f.expr && !is_primary(*f.expr);
    out += wrap ? "(" + f.text + ")" : f.text;
    pos = t.span.end;
  }
  out += tmpl.substr(pos);
  return out;
}

inline int brace_delta(std::string_view line) {
  int d = 0;
  try {
    for (const auto& t : tokenize(line)) {
      if (t.is("{")) ++d;
      if (t.is("}")) --d;
    }
  } catch (const ParseError&) {
  }
  return d;
}

inline bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

inline std::optional<std::string> guard_constant(const PatchRule& rule) {
  static const std::regex re(R"(VERSION_CODES\s*\.\s*([A-Za-z_][A-Za-z0-9_]*))");
  for (const auto& l : rule.lines) {
    if (l.mark != LineMark::Plus) continue;
    std::smatch m;
    if (std::regex_search(l.text, m, re)) return m[1].str();
  }
  return std::nullopt;
}

// An enclosing if whose condition compares SDK_INT against the same version.
inline bool already_guarded(const StmtEntry& e, const std::string& code, const SourceUnit& unit) {
  for (const Stmt* s : e.path) {
    if (s->kind != StmtKind::If) continue;
    bool hit = false;
    walk_expr(*s->expr, [&](const Expr& x) {
      if (hit) return;
      if (auto g = as_version_guard(x, unit.text); g && g->mentions(code)) hit = true;
    });
    if (hit) return true;
  }
  return false;
}

inline std::string leading_indent(std::string_view text, std::size_t offset) {
  std::size_t start = offset;
  while (start > 0 && text[start - 1] != '\n') --start;
  std::size_t end = start;
  while (end < text.size() && (text[end] == ' ' || text[end] == '\t')) ++end;
  return std::string(text.substr(start, end - start));
}

inline std::string indent_lines(const std::vector<std::string>& lines, const std::string& indent) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += "\n";
    out += indent + lines[i];
  }
  return out;
}

// Lines replacing one anchor, indentation relative to the anchor's own.
inline std::vector<std::string> anchor_replacement(const SourceUnit& unit, const Stmt& st, bool keep,
                                                   const std::vector<std::string>& before,
                                                   const std::vector<std::string>& after,
                                                   const Binding& b) {
  std::vector<std::string> out;
  int depth = 0;
  auto emit = [&](const std::string& raw) {
    const std::string text = trim(raw);
    const int d = std::max(0, depth - (!text.empty() && text[0] == '}' ? 1 : 0));
    out.push_back(std::string(static_cast<std::size_t>(4 * d), ' ') + text);
    depth = std::max(0, depth + brace_delta(text));
  };
  for (const auto& p : before) emit(instantiate(p, b));
  if (keep) {
    const std::string pad(static_cast<std::size_t>(4 * depth), ' ');
    std::string body(unit.slice(st.span));
    // continuation lines already carry their absolute indentation
    std::string shifted;
    for (char c : body) {
      shifted += c;
      if (c == '\n') shifted += pad;
    }
    out.push_back(pad + shifted);
  }
  for (const auto& p : after) emit(instantiate(p, b));
  return out;
}

inline std::size_t count_statements(const std::vector<std::string>& lines) {
  std::string joined;
  for (const auto& l : lines) joined += l + "\n";
  try {
    return parse_statements(joined).size();
  } catch (const ParseError&) {
    return 2;
  }
}

inline Edit anchor_edit(const SourceUnit& unit, const StmtEntry& e, bool keep,
                        const std::vector<std::string>& before, const std::vector<std::string>& after,
                        const Binding& b) {
  const Stmt& st = *e.stmt;
  const std::string& text = unit.text;
  const std::string indent = leading_indent(text, st.span.begin);
  auto lines = anchor_replacement(unit, st, keep, before, after, b);

  const Stmt* parent = e.path.empty() ? nullptr : e.path.back();
  const bool in_list = parent && parent->kind == StmtKind::Block;
  if (!in_list && count_statements(lines) != 1) {
    if (lines.empty()) return Edit{st.span, "{}"};
    std::string repl = "{\n" + indent_lines(lines, indent + "    ") + "\n" + indent + "}";
    return Edit{st.span, repl};
  }

  std::size_t line_start = st.span.begin;
  while (line_start > 0 && text[line_start - 1] != '\n') --line_start;
  std::size_t eol = st.span.end;
  while (eol < text.size() && text[eol] != '\n') ++eol;
  const bool whole_line = is_blank(std::string_view(text).substr(line_start, st.span.begin - line_start)) &&
                          is_blank(std::string_view(text).substr(st.span.end, eol - st.span.end));
  if (whole_line) {
    const bool has_nl = eol < text.size();
    const Span region{line_start, has_nl ? eol + 1 : eol};
    if (lines.empty()) return Edit{region, ""};
    return Edit{region, indent_lines(lines, indent) + (has_nl ? "\n" : "")};
  }
  if (lines.empty()) return Edit{st.span, ""};
  std::string repl = indent_lines(lines, indent);
  return Edit{st.span, repl.substr(indent.size())};
}

}  // namespace detail

/// Applies every rule in order. Each rule sees the output of the previous one.
/// Throws ReparseError if an intermediate result leaves the supported subset.
inline TransformResult apply_patch(const SemanticPatch& patch, const SourceUnit& unit) {
  TransformResult result;
  SourceUnit current = parse_unit(unit.text, unit.path);
  const std::size_t opaque_before = count_opaque(current);

  for (const auto& rule : patch.rules) {
    RuleStats stats;
    stats.rule = rule.name;
    const auto layout = detail::layout_plus_lines(rule);
    const auto code = detail::guard_constant(rule);

    std::vector<detail::MethodIndex> storage;
    const auto matches = detail::match_all(rule, current, storage);
    std::vector<Edit> edits;
    for (const auto& m : matches) {
      ++stats.matches;
      Binding b = detail::to_binding(m, current);
      MatchReport report;
      report.rule = rule.name;
      report.location = locate(current.text, m.anchors.front().entry->stmt->span.begin);
      for (const auto& [k, f] : b.values) report.bindings[k] = f.text;

      bool skip = false;
      if (code) {
        for (std::size_t a = 0; a < m.anchors.size() && !skip; ++a) {
          const bool touched = rule.lines[m.anchors[a].line].mark == LineMark::Minus ||
                               !layout.before[a].empty() || !layout.after[a].empty();
          if (touched && detail::already_guarded(*m.anchors[a].entry, *code, current)) skip = true;
        }
      }
      if (skip) {
        ++stats.skipped;
        report.skipped = true;
        report.reason = "already guarded by a check against VERSION_CODES." + *code;
        result.sites.push_back(std::move(report));
        continue;
      }
      for (std::size_t a = 0; a < m.anchors.size(); ++a) {
        const bool minus = rule.lines[m.anchors[a].line].mark == LineMark::Minus;
        if (!minus && layout.before[a].empty() && layout.after[a].empty()) continue;
        edits.push_back(detail::anchor_edit(current, *m.anchors[a].entry, !minus, layout.before[a],
                                            layout.after[a], b));
      }
      ++stats.applied;
      result.sites.push_back(std::move(report));
    }

    if (!edits.empty()) {
      std::string text = splice(current, std::move(edits));
      SourceUnit next;
      try {
        next = parse_unit(std::move(text), current.path);
      } catch (const ParseError& e) {
        throw ReparseError("rule '" + rule.name + "' produced unparsable code: " + e.what());
      }
      if (count_opaque(next) > opaque_before)
        throw ReparseError("rule '" + rule.name + "' produced a method body outside the supported subset");
      current = std::move(next);
    }
    result.rules.push_back(std::move(stats));
  }
  result.text = current.text;
  return result;
}

}  // namespace guardpatch
