#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

namespace guardpatch {

namespace detail {

inline std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      out.emplace_back(text.substr(start));
      break;
    }
    out.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

struct DiffOp {
  char tag;  // ' ', '-', '+'
  std::size_t a, b;  // line indices into old/new (a for ' ' and '-', b for '+')
};

// Plain LCS table after trimming the common prefix and suffix.
inline std::vector<DiffOp> diff_lines(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t pre = 0;
  while (pre < a.size() && pre < b.size() && a[pre] == b[pre]) ++pre;
  std::size_t suf = 0;
  while (suf < a.size() - pre && suf < b.size() - pre && a[a.size() - 1 - suf] == b[b.size() - 1 - suf]) ++suf;
  const std::size_t n = a.size() - pre - suf, m = b.size() - pre - suf;
  std::vector<std::vector<std::size_t>> lcs(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = m; j-- > 0;)
      lcs[i][j] = a[pre + i] == b[pre + j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);

  std::vector<DiffOp> ops;
  for (std::size_t k = 0; k < pre; ++k) ops.push_back({' ', k, k});
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a[pre + i] == b[pre + j]) {
      ops.push_back({' ', pre + i, pre + j});
      ++i, ++j;
    } else if (j < m && (i == n || lcs[i][j + 1] >= lcs[i + 1][j])) {
      ops.push_back({'+', pre + i, pre + j});
      ++j;
    } else {
      ops.push_back({'-', pre + i, pre + j});
      ++i;
    }
  }
  for (std::size_t k = 0; k < suf; ++k) ops.push_back({' ', pre + n + k, pre + m + k});
  return ops;
}

}  // namespace detail

/// Unified diff with three lines of context; empty when the texts are equal.
inline std::string unified_diff(std::string_view before, std::string_view after, const std::string& old_name,
                                const std::string& new_name, std::size_t context = 3) {
  if (before == after) return {};
  const auto a = detail::split_lines(before);
  const auto b = detail::split_lines(after);
  const auto ops = detail::diff_lines(a, b);

  std::string out = "--- " + old_name + "\n+++ " + new_name + "\n";
  std::size_t k = 0;
  while (k < ops.size()) {
    while (k < ops.size() && ops[k].tag == ' ') ++k;
    if (k == ops.size()) break;
    std::size_t start = k >= context ? k - context : 0;
    std::size_t end = k;
    // extend while the next change is within 2*context lines
    for (;;) {
      while (end < ops.size() && ops[end].tag != ' ') ++end;
      std::size_t gap = end;
      while (gap < ops.size() && ops[gap].tag == ' ') ++gap;
      if (gap < ops.size() && gap - end <= 2 * context) {
        end = gap;
        continue;
      }
      end = std::min(ops.size(), end + context);
      break;
    }
    std::size_t old_start = 0, new_start = 0, old_len = 0, new_len = 0;
    bool first = true;
    std::string body;
    for (std::size_t x = start; x < end; ++x) {
      const auto& op = ops[x];
      if (first) {
        old_start = op.a;
        new_start = op.b;
        first = false;
      }
      if (op.tag == ' ') {
        ++old_len, ++new_len;
        body += " " + a[op.a] + "\n";
      } else if (op.tag == '-') {
        ++old_len;
        body += "-" + a[op.a] + "\n";
      } else {
        ++new_len;
        body += "+" + b[op.b] + "\n";
      }
    }
    out += "@@ -" + std::to_string(old_len ? old_start + 1 : old_start) + "," + std::to_string(old_len) + " +" +
           std::to_string(new_len ? new_start + 1 : new_start) + "," + std::to_string(new_len) + " @@\n";
    out += body;
    k = end;
  }
  return out;
}

}  // namespace guardpatch
