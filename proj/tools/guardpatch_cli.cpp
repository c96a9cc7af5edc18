#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "guardpatch/pipeline.hpp"

namespace {

// Exactly one of --in-place, --out, --dry-run; anything else is a usage error.
bool pick_mode(bool in_place, const std::string& out, bool dry_run, guardpatch::OutputMode& mode) {
  const int chosen = int(in_place) + int(!out.empty()) + int(dry_run);
  if (chosen != 1) {
    std::cerr << "error: choose exactly one of --in-place, --out, --dry-run\n";
    return false;
  }
  if (in_place) mode.kind = guardpatch::OutputMode::InPlace;
  if (dry_run) mode.kind = guardpatch::OutputMode::DryRun;
  if (!out.empty()) {
    mode.kind = guardpatch::OutputMode::OutPath;
    mode.out = out;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learns Android API updates from one example and applies them as semantic patches"};
  app.require_subcommand(1);

  std::string mapping, example, patch, out;
  std::vector<std::string> targets;
  bool in_place = false, dry_run = false;

  auto* create = app.add_subcommand("create-patch", "Synthesize an update patch from an after-update example");
  create->add_option("--mapping", mapping, "API mapping JSON")->required();
  create->add_option("--example", example, "Source file containing a version-guarded update")->required();
  create->add_option("--out", out, "Patch file to write")->required();

  auto* apply = app.add_subcommand("apply-update", "Normalize target files and apply an update patch");
  apply->add_option("--mapping", mapping, "API mapping JSON")->required();
  apply->add_option("--patch", patch, "Update patch file")->required();
  apply->add_option("targets", targets, "Target source files");
  apply->add_option("--out", out, "Output file, or directory for several targets");
  apply->add_flag("--in-place", in_place, "Rewrite targets in place");
  apply->add_flag("--dry-run", dry_run, "Print a unified diff, write nothing");

  auto* normalize = app.add_subcommand("normalize", "Rewrite deprecated calls into normal form");
  normalize->add_option("--mapping", mapping, "API mapping JSON")->required();
  normalize->add_option("targets", targets, "Target source files");
  normalize->add_option("--out", out, "Output file, or directory for several targets");
  normalize->add_flag("--in-place", in_place, "Rewrite targets in place");
  normalize->add_flag("--dry-run", dry_run, "Print a unified diff, write nothing");

  auto* check = app.add_subcommand("check", "List deprecated call sites");
  check->add_option("--mapping", mapping, "API mapping JSON")->required();
  check->add_option("targets", targets, "Target source files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  guardpatch::RunReport report;
  guardpatch::OutputMode mode;
  if (*create) {
    report = guardpatch::cmd_create_patch(mapping, example, out);
  } else if (*apply) {
    if (!pick_mode(in_place, out, dry_run, mode)) return 2;
    report = guardpatch::cmd_apply_update(mapping, patch, targets, mode);
  } else if (*normalize) {
    if (!pick_mode(in_place, out, dry_run, mode)) return 2;
    report = guardpatch::cmd_normalize(mapping, targets, mode);
  } else if (*check) {
    report = guardpatch::cmd_check(mapping, targets);
  }
  return report.exit_code();
}
