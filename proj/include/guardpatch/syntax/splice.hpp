#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "guardpatch/error.hpp"
#include "guardpatch/syntax/ast.hpp"

namespace guardpatch {

struct Edit {
  Span span;
  std::string replacement;
};

/// Applies non-overlapping edits to `unit.text`, right to left. Bytes outside
/// the edited spans are copied unchanged. A pure insertion (empty span) may
/// touch the boundary of a neighbouring edit; two insertions at the same
/// offset are ambiguous and rejected.
inline std::string splice(const SourceUnit& unit, std::vector<Edit> edits) {
  const std::string& text = unit.text;
  for (const auto& e : edits)
    if (e.span.begin > e.span.end || e.span.end > text.size())
      throw std::out_of_range("edit span outside source text");

  std::sort(edits.begin(), edits.end(), [](const Edit& a, const Edit& b) {
    if (a.span.begin != b.span.begin) return a.span.begin < b.span.begin;
    return a.span.end < b.span.end;
  });
  for (std::size_t i = 1; i < edits.size(); ++i) {
    const Span& a = edits[i - 1].span;
    const Span& b = edits[i].span;
    if (a.end > b.begin || (a.empty() && b.empty() && a.begin == b.begin)) {
      const Location where = locate(text, b.begin);
      throw OverlapError("overlapping edits at " + std::to_string(where.line) + ":" +
                         std::to_string(where.column));
    }
  }

  std::string out = text;
  for (auto it = edits.rbegin(); it != edits.rend(); ++it)
    out.replace(it->span.begin, it->span.size(), it->replacement);
  return out;
}

}  // namespace guardpatch
