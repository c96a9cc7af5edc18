#pragma once

#include <array>
#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "guardpatch/error.hpp"

namespace guardpatch {

/// Half-open byte range [begin, end) into a source buffer.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool empty() const noexcept { return begin == end; }
  bool contains(const Span& other) const noexcept {
    return begin <= other.begin && other.end <= end;
  }
  bool overlaps(const Span& other) const noexcept {
    return begin < other.end && other.begin < end;
  }
  std::string_view of(std::string_view text) const { return text.substr(begin, size()); }

  friend bool operator==(const Span&, const Span&) = default;
};

enum class TokenKind { Identifier, IntLiteral, FloatLiteral, StringLiteral, CharLiteral, Punct, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string_view text;
  Span span;

  bool is(std::string_view punct_or_word) const noexcept {
    return (kind == TokenKind::Punct || kind == TokenKind::Identifier) && text == punct_or_word;
  }
};

namespace detail {

inline bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$' ||
         static_cast<unsigned char>(c) >= 0x80;
}

inline bool is_ident_part(char c) {
  return is_ident_start(c) || std::isdigit(static_cast<unsigned char>(c));
}

// Longest match first.
inline constexpr std::array<std::string_view, 29> kPunctuators = {
    "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=", "+=",
    "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "(",  ")",  "{",  "}",  "[",
    "]",   ";",  ",",  ".",  "@"};

inline constexpr std::string_view kSingleOps = "=<>!~?:+-*/&|^%";

}  // namespace detail

/// Tokenizes object-language source. Comments and whitespace are dropped;
/// `>>` is deliberately produced as two `>` tokens so nested generics close.
inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();

  auto fail = [&](std::size_t at, const char* what) {
    throw ParseError(locate(text, at), what);
  };

  while (i < n) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && text[i + 1] == '/') {
      while (i < n && text[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && text[i + 1] == '*') {
      const std::size_t close = text.find("*/", i + 2);
      if (close == std::string_view::npos) fail(i, "end of block comment");
      i = close + 2;
      continue;
    }

    const std::size_t start = i;
    TokenKind kind = TokenKind::Punct;

    if (detail::is_ident_start(c)) {
      while (i < n && detail::is_ident_part(text[i])) ++i;
      kind = TokenKind::Identifier;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      kind = TokenKind::IntLiteral;
      if (c == '0' && i + 1 < n && (text[i + 1] == 'x' || text[i + 1] == 'X')) {
        i += 2;
        while (i < n && (std::isxdigit(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
      } else {
        while (i < n && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
        if (i < n && text[i] == '.' && !(i + 1 < n && text[i + 1] == '.')) {
          kind = TokenKind::FloatLiteral;
          ++i;
          while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        }
        if (i < n && (text[i] == 'e' || text[i] == 'E')) {
          kind = TokenKind::FloatLiteral;
          ++i;
          if (i < n && (text[i] == '+' || text[i] == '-')) ++i;
          while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        }
      }
      if (i < n && std::string_view("lLfFdD").find(text[i]) != std::string_view::npos) {
        if (text[i] != 'l' && text[i] != 'L') kind = TokenKind::FloatLiteral;
        ++i;
      }
    } else if (c == '"' || c == '\'') {
      kind = c == '"' ? TokenKind::StringLiteral : TokenKind::CharLiteral;
      ++i;
      while (i < n && text[i] != c) {
        if (text[i] == '\\') ++i;
        if (i < n && text[i] == '\n') fail(start, "closing quote");
        ++i;
      }
      if (i >= n) fail(start, "closing quote");
      ++i;
    } else {
      bool matched = false;
      for (std::string_view p : detail::kPunctuators) {
        if (text.substr(i, p.size()) == p) {
          i += p.size();
          matched = true;
          break;
        }
      }
      if (!matched) {
        if (detail::kSingleOps.find(c) == std::string_view::npos) fail(i, "a token");
        ++i;
      }
    }
    tokens.push_back(Token{kind, text.substr(start, i - start), Span{start, i}});
  }
  tokens.push_back(Token{TokenKind::End, {}, Span{n, n}});
  return tokens;
}

}  // namespace guardpatch
