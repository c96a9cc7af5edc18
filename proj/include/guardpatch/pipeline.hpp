#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "guardpatch/api_mapping.hpp"
#include "guardpatch/block_extractor.hpp"
#include "guardpatch/call_sites.hpp"
#include "guardpatch/diff.hpp"
#include "guardpatch/error.hpp"
#include "guardpatch/normalizer.hpp"
#include "guardpatch/patch_engine.hpp"
#include "guardpatch/synthesizer.hpp"

namespace guardpatch {

namespace fs = std::filesystem;

struct FileReport {
  std::string path;
  std::size_t call_sites = 0;
  std::size_t applied = 0;
  std::size_t skipped = 0;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
};

struct RunReport {
  std::vector<FileReport> files;
  std::vector<std::string> errors;  // not tied to one target file

  bool has_errors() const {
    if (!errors.empty()) return true;
    return std::any_of(files.begin(), files.end(), [](const FileReport& f) { return !f.errors.empty(); });
  }
  std::size_t total_applied() const {
    std::size_t n = 0;
    for (const auto& f : files) n += f.applied;
    return n;
  }
  std::size_t total_skipped() const {
    std::size_t n = 0;
    for (const auto& f : files) n += f.skipped;
    return n;
  }
  int exit_code() const {
    if (has_errors()) return 2;
    return total_applied() > 0 ? 0 : 1;
  }
};

/// Where rewritten files go.
struct OutputMode {
  enum Kind { InPlace, OutPath, DryRun } kind = DryRun;
  fs::path out;
};

/// Streams for diagnostics and diffs.
struct Console {
  std::ostream& out = std::cout;
  std::ostream& err = std::cerr;
};

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Writes through a temporary file in the destination directory and renames
/// it over the target, so readers never see a partial file.
inline void write_file_atomic(const fs::path& target, std::string_view content) {
  const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::random_device rd;
  const fs::path tmp = dir / ("." + target.filename().string() + ".tmp" + std::to_string(rd()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw Error("cannot write " + tmp.string());
    }
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot replace " + target.string());
  }
}

namespace detail {

inline std::string describe(const std::string& path, const std::exception& e) {
  return path + ": " + e.what();
}

inline fs::path destination(const OutputMode& mode, const fs::path& source, std::size_t target_count) {
  if (mode.kind == OutputMode::InPlace) return source;
  const bool dir_like = target_count > 1 || fs::is_directory(mode.out) ||
                        (!mode.out.empty() && mode.out.string().back() == '/');
  return dir_like ? mode.out / source.filename() : mode.out;
}

inline void emit(const OutputMode& mode, const fs::path& source, std::size_t target_count,
                 const std::string& before, const std::string& after, Console& io) {
  if (mode.kind == OutputMode::DryRun) {
    io.out << unified_diff(before, after, "a/" + source.generic_string(), "b/" + source.generic_string());
    return;
  }
  write_file_atomic(destination(mode, source, target_count), after);
}

inline void print_summary(const RunReport& report, Console& io) {
  for (const auto& e : report.errors) io.err << "error: " << e << "\n";
  for (const auto& f : report.files) {
    for (const auto& w : f.warnings) io.err << "warning: " << w << "\n";
    for (const auto& e : f.errors) io.err << "error: " << e << "\n";
  }
}

inline std::vector<std::string> sorted_targets(std::vector<std::string> targets) {
  std::sort(targets.begin(), targets.end());
  return targets;
}

}  // namespace detail

/// Example file plus mapping to an update patch written at `out_path`.
inline RunReport cmd_create_patch(const std::string& mapping_path, const std::string& example_path,
                                  const std::string& out_path, Console io = {}) {
  RunReport report;
  FileReport file;
  file.path = example_path;
  try {
    const ApiMapping mapping = load_mapping(mapping_path);
    try {
      SourceUnit unit = parse_unit(read_file(example_path), example_path);
      file.call_sites = find_calls(unit, mapping).size();
      unit = normalize_version_conditions(normalize_unit(unit, mapping));
      const UpdatedBlock block = extract_update_block(unit, mapping);
      const std::string text = synthesize_patch_text(plan_synthesis(block, mapping), mapping);
      write_file_atomic(out_path, text);
      file.applied = 1;
      io.err << example_path << ":" << block.location.line << ": update block guarded by "
             << block.guard.to_string() << " (" << to_string(block.polarity) << "); patch written to "
             << out_path << "\n";
    } catch (const Error& e) {
      file.errors.push_back(detail::describe(example_path, e));
    }
  } catch (const Error& e) {
    report.errors.push_back(detail::describe(mapping_path, e));
  }
  report.files.push_back(std::move(file));
  detail::print_summary(report, io);
  return report;
}

/// Normalizes each target and applies the update patch to it.
inline RunReport cmd_apply_update(const std::string& mapping_path, const std::string& patch_path,
                                  const std::vector<std::string>& targets, const OutputMode& mode,
                                  Console io = {}) {
  RunReport report;
  if (targets.empty()) {
    report.errors.push_back("no target files given");
    detail::print_summary(report, io);
    return report;
  }
  ApiMapping mapping;
  SemanticPatch patch;
  try {
    mapping = load_mapping(mapping_path);
  } catch (const Error& e) {
    report.errors.push_back(detail::describe(mapping_path, e));
  }
  try {
    patch = parse_patch(read_file(patch_path));
  } catch (const Error& e) {
    report.errors.push_back(detail::describe(patch_path, e));
  }
  if (!report.errors.empty()) {
    detail::print_summary(report, io);
    return report;
  }

  for (const auto& path : detail::sorted_targets(targets)) {
    FileReport file;
    file.path = path;
    try {
      const std::string original = read_file(path);
      const SourceUnit unit = parse_unit(original, path);
      file.call_sites = find_calls(unit, mapping).size();
      for (const MethodDecl* m : opaque_methods_mentioning(unit, mapping))
        file.warnings.push_back(path + ": method '" + m->name + "' is outside the supported subset (" +
                                m->opaque_reason + "); its uses of " + mapping.deprecated_method +
                                " are not updated");
      const SourceUnit normalized = normalize_unit(unit, mapping);
      const TransformResult result = apply_patch(patch, normalized);
      file.applied = result.total_applied();
      file.skipped = result.total_skipped();
      for (const auto& site : result.sites)
        if (site.skipped)
          io.err << path << ": skipped match of rule " << site.rule << ": " << site.reason << "\n";
      if (file.applied > 0) detail::emit(mode, path, targets.size(), original, result.text, io);
      io.err << path << ": " << file.call_sites << " call site(s), " << file.applied << " updated, "
             << file.skipped << " already updated\n";
    } catch (const std::exception& e) {
      file.errors.push_back(detail::describe(path, e));
    }
    report.files.push_back(std::move(file));
  }
  detail::print_summary(report, io);
  return report;
}

/// Rewrites each target into normal form only.
inline RunReport cmd_normalize(const std::string& mapping_path, const std::vector<std::string>& targets,
                               const OutputMode& mode, Console io = {}) {
  RunReport report;
  if (targets.empty()) report.errors.push_back("no target files given");
  ApiMapping mapping;
  try {
    mapping = load_mapping(mapping_path);
  } catch (const Error& e) {
    report.errors.push_back(detail::describe(mapping_path, e));
  }
  if (!report.errors.empty()) {
    detail::print_summary(report, io);
    return report;
  }
  for (const auto& path : detail::sorted_targets(targets)) {
    FileReport file;
    file.path = path;
    try {
      const std::string original = read_file(path);
      const SourceUnit unit = parse_unit(original, path);
      const auto sites = find_calls(unit, mapping);
      file.call_sites = sites.size();
      const SourceUnit normalized = normalize_unit(unit, mapping);
      if (normalized.text != original) {
        file.applied = static_cast<std::size_t>(std::count_if(
            sites.begin(), sites.end(), [&](const CallSite& s) { return !in_normal_form(s, mapping); }));
        detail::emit(mode, path, targets.size(), original, normalized.text, io);
      }
    } catch (const std::exception& e) {
      file.errors.push_back(detail::describe(path, e));
    }
    report.files.push_back(std::move(file));
  }
  detail::print_summary(report, io);
  return report;
}

/// Lists deprecated call sites per file; never writes.
inline RunReport cmd_check(const std::string& mapping_path, const std::vector<std::string>& targets,
                           Console io = {}) {
  RunReport report;
  if (targets.empty()) report.errors.push_back("no target files given");
  ApiMapping mapping;
  try {
    mapping = load_mapping(mapping_path);
  } catch (const Error& e) {
    report.errors.push_back(detail::describe(mapping_path, e));
  }
  if (!report.errors.empty()) {
    detail::print_summary(report, io);
    return report;
  }
  for (const auto& path : detail::sorted_targets(targets)) {
    FileReport file;
    file.path = path;
    try {
      const SourceUnit unit = parse_unit(read_file(path), path);
      const auto sites = find_calls(unit, mapping);
      file.call_sites = sites.size();
      file.applied = sites.size();
      for (const auto& s : sites)
        io.out << path << ":" << s.location.line << ":" << s.location.column << ": " << to_string(s.role)
               << ": " << unit.slice(s.expr->span) << "\n";
      for (const MethodDecl* m : opaque_methods_mentioning(unit, mapping))
        file.warnings.push_back(path + ": method '" + m->name + "' is outside the supported subset (" +
                                m->opaque_reason + "); uses of " + mapping.deprecated_method +
                                " inside it are not listed");
    } catch (const std::exception& e) {
      file.errors.push_back(detail::describe(path, e));
    }
    report.files.push_back(std::move(file));
  }
  detail::print_summary(report, io);
  return report;
}

}  // namespace guardpatch
