#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace guardpatch {

/// 1-based position inside a text buffer.
struct Location {
  std::size_t line = 1;
  std::size_t column = 1;
};

inline Location locate(std::string_view text, std::size_t offset) {
  Location loc;
  if (offset > text.size()) offset = text.size();
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++loc.line;
      loc.column = 1;
    } else {
      ++loc.column;
    }
  }
  return loc;
}

/// Base of every error this library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(Location where, std::string expected)
      : Error(std::to_string(where.line) + ":" + std::to_string(where.column) +
              ": expected " + expected),
        where_(where),
        expected_(std::move(expected)) {}

  const Location& where() const noexcept { return where_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  Location where_;
  std::string expected_;
};

class OverlapError : public Error {
 public:
  using Error::Error;
};

class MappingError : public Error {
 public:
  MappingError(std::string field, std::string reason)
      : Error("mapping field '" + field + "': " + reason),
        field_(std::move(field)),
        reason_(std::move(reason)) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string field_;
  std::string reason_;
};

class NormalizeError : public Error {
 public:
  NormalizeError(Location where, const std::string& reason)
      : Error(std::to_string(where.line) + ":" + std::to_string(where.column) +
              ": " + reason),
        where_(where) {}

  const Location& where() const noexcept { return where_; }

 private:
  Location where_;
};

class NoValidBlock : public Error {
 public:
  using Error::Error;
};

class PatchParseError : public Error {
 public:
  PatchParseError(std::size_t line, const std::string& reason)
      : Error("patch line " + std::to_string(line) + ": " + reason), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UndeclaredMetavar : public Error {
 public:
  explicit UndeclaredMetavar(std::string name)
      : Error("undeclared metavariable '" + name + "'"), name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class ReparseError : public Error {
 public:
  using Error::Error;
};

class SynthesisError : public Error {
 public:
  using Error::Error;
};

}  // namespace guardpatch
