#include <gtest/gtest.h>

#include "goldens.hpp"
#include "guardpatch/patch_engine.hpp"

using namespace guardpatch;

namespace {

const char* kTarget =
    "        TimePicker classNameVar = findPicker();\n"
    "        int tempFunctionReturnValue;\n"
    "        tempFunctionReturnValue = classNameVar.getCurrentMinute();\n";

SourceUnit target_unit() { return parse_unit(goldens::wrap("", kTarget)); }

// Token-level matcher used as an independent reference: `$E` matches any
// balanced, non-empty token run, `$I` one identifier; everything else must
// match literally.
struct TokenPattern {
  std::vector<std::string> toks;
};

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& t : tokenize(text))
    if (t.kind != TokenKind::End) out.emplace_back(t.text);
  return out;
}

bool match_tokens(const std::vector<std::string>& p, std::size_t pi, const std::vector<std::string>& t,
                  std::size_t ti, std::map<std::string, std::string>& env,
                  const std::map<std::string, char>& kinds) {
  if (pi == p.size()) return ti == t.size();
  auto kind = kinds.find(p[pi]);
  if (kind == kinds.end()) return ti < t.size() && p[pi] == t[ti] && match_tokens(p, pi + 1, t, ti + 1, env, kinds);
  for (std::size_t end = ti + 1; end <= t.size(); ++end) {
    if (kind->second == 'I' && end != ti + 1) break;
    if (kind->second == 'I' && !(std::isalpha(static_cast<unsigned char>(t[ti][0])) || t[ti][0] == '_')) break;
    int depth = 0;
    std::string joined;
    bool balanced = true;
    for (std::size_t k = ti; k < end; ++k) {
      if (t[k] == "(" || t[k] == "[") ++depth;
      if (t[k] == ")" || t[k] == "]") --depth;
      if (depth < 0) balanced = false;
      joined += t[k] + " ";
    }
    if (!balanced || depth != 0) continue;
    auto prior = env.find(p[pi]);
    if (prior != env.end() && prior->second != joined) continue;
    auto saved = env;
    env[p[pi]] = joined;
    if (match_tokens(p, pi + 1, t, end, env, kinds)) return true;
    env = saved;
  }
  return false;
}

std::vector<const Stmt*> preorder(const SourceUnit& u) {
  std::vector<const Stmt*> out;
  for_each_method(u, [&](const MethodDecl& m) {
    walk_stmts(*m.body, [&](const Stmt& s, const std::vector<const Stmt*>&) {
      if (s.kind != StmtKind::Block) out.push_back(&s);
    });
  });
  return out;
}

// Every (i < j) statement pair where i matches the declaration anchor and j
// the call anchor under one consistent environment.
std::vector<std::map<std::string, std::string>> brute_force(const SourceUnit& u, const std::string& first,
                                                            const std::string& second) {
  const std::map<std::string, char> kinds = {{"exp0", 'E'}, {"classIden", 'I'}};
  const auto stmts = preorder(u);
  std::vector<std::map<std::string, std::string>> out;
  for (std::size_t i = 0; i < stmts.size(); ++i)
    for (std::size_t j = i + 1; j < stmts.size(); ++j) {
      std::map<std::string, std::string> env;
      if (match_tokens(words(first), 0, words(u.slice(stmts[i]->span)), 0, env, kinds) &&
          match_tokens(words(second), 0, words(u.slice(stmts[j]->span)), 0, env, kinds))
        out.push_back(env);
    }
  return out;
}

std::string squash(std::string_view s) {
  std::string out;
  for (const auto& w : words(s)) out += w + " ";
  return out;
}

}  // namespace

TEST(ParsePatch, SimpleRule) {
  const auto p = parse_patch(goldens::kSimplePatch);
  ASSERT_EQ(p.rules.size(), 1u);
  const auto& r = p.rules[0];
  EXPECT_TRUE(r.name.empty());
  ASSERT_EQ(r.metavars.size(), 1u);
  EXPECT_EQ(r.metavars[0].kind, MetaKind::Expression);
  EXPECT_EQ(r.metavars[0].name, "timepicker");
  ASSERT_EQ(r.lines.size(), 2u);
  EXPECT_EQ(r.lines[0].mark, LineMark::Minus);
  EXPECT_EQ(squash(r.lines[0].text), squash("timepicker.getCurrentHour();"));
  EXPECT_EQ(r.lines[1].mark, LineMark::Plus);
  EXPECT_EQ(squash(r.lines[1].text), squash("timepicker.getHour();"));
}

TEST(ParsePatch, TwoRuleUpdatePatch) {
  const auto p = parse_patch(goldens::kUpdatePatch);
  ASSERT_EQ(p.rules.size(), 2u);
  EXPECT_EQ(p.rules[0].name, "bottomupper");
  EXPECT_EQ(p.rules[1].name, "bottomupper_assignment");
  for (const auto& r : p.rules) {
    EXPECT_EQ(r.metavars, (std::vector<MetaVar>{{MetaKind::Expression, "exp0"}, {MetaKind::Identifier, "classIden"}}));
    std::vector<LineMark> marks;
    for (const auto& l : r.lines) marks.push_back(l.mark);
    EXPECT_EQ(marks, (std::vector<LineMark>{LineMark::Context, LineMark::Dots, LineMark::Plus, LineMark::Plus,
                                            LineMark::Plus, LineMark::Context, LineMark::Plus}));
    EXPECT_EQ(r.anchor_count(), 2u);
  }
}

TEST(ParsePatch, FormatIsStableAndEquivalent) {
  const auto p = parse_patch(goldens::kUpdatePatch);
  const std::string text = format_patch(p);
  EXPECT_TRUE(patches_equivalent(parse_patch(text), p));
  EXPECT_EQ(format_patch(parse_patch(text)), text);
}

TEST(ParsePatch, Errors) {
  EXPECT_THROW(parse_patch("@r@\nexpression e;\n@@\n- e.f();\n+ foo.g();\n"), UndeclaredMetavar);
  try {
    parse_patch("@r@\nexpression e;\n@@\n- e.f();\n+ foo.g();\n");
  } catch (const UndeclaredMetavar& e) {
    EXPECT_EQ(e.name(), "foo");
  }
  EXPECT_THROW(parse_patch("@r@\nexpression e;\n@@\n- e.f();\n...\n...\ne.g();\n"), PatchParseError);
  EXPECT_THROW(parse_patch("@r@\nexpression e;\n@@\n+ e.f();\n"), PatchParseError);
  EXPECT_THROW(parse_patch("@r@\nwidget e;\n@@\n- e.f();\n"), PatchParseError);
  EXPECT_THROW(parse_patch("@r@\nexpression e, e;\n@@\n- e.f();\n"), PatchParseError);
  EXPECT_THROW(parse_patch("@r@\nexpression e;\n@@\n- e.f();\n@r@\nexpression e;\n@@\n- e.g();\n"), PatchParseError);
  EXPECT_THROW(parse_patch("@r@\nexpression e;\n@@\n- e.f(;\n"), PatchParseError);
  EXPECT_THROW(parse_patch("no header\n"), PatchParseError);
  try {
    parse_patch("@r@\nexpression e;\n@@\n- e.f();\n- e.g(;\n");
  } catch (const PatchParseError& e) {
    EXPECT_EQ(e.line(), 5u);
  }
}

TEST(ParsePatch, MultiLineStatementAndTypeMetavar) {
  const auto p = parse_patch("@r@\ntype T;\nidentifier x;\nexpression e;\n@@\n- T x =\n-   e.make();\n+ T x = e.build();\n");
  ASSERT_EQ(p.rules[0].lines.size(), 2u);
  const auto u = parse_unit(goldens::wrap("Factory f", "        Widget w = f.make();\n"));
  const auto bindings = match_rule(p.rules[0], u);
  ASSERT_EQ(bindings.size(), 1u);
  EXPECT_EQ(bindings[0].values.at("T").text, "Widget");
  EXPECT_EQ(bindings[0].values.at("x").text, "w");
  EXPECT_EQ(bindings[0].values.at("e").text, "f");
  EXPECT_EQ(apply_patch(p, u).text, goldens::wrap("Factory f", "        Widget w = f.build();\n"));
}

TEST(MatchRule, SimpleRuleBindsReceiver) {
  const auto p = parse_patch(goldens::kSimplePatch);
  const auto u = parse_unit(goldens::wrap("TimePicker timepicker", "        timepicker.getCurrentHour();\n"));
  const auto b = match_rule(p.rules[0], u);
  ASSERT_EQ(b.size(), 1u);
  const auto& f = b[0].values.at("timepicker");
  EXPECT_EQ(f.text, "timepicker");
  ASSERT_TRUE(f.expr);
  EXPECT_EQ(f.expr->kind, ExprKind::Identifier);
}

TEST(MatchRule, AssignmentRuleBindingsAgreeWithBruteForce) {
  const auto p = parse_patch(goldens::kUpdatePatch);
  const auto u = target_unit();
  const auto assign = match_rule(*p.find_rule("bottomupper_assignment"), u);
  ASSERT_EQ(assign.size(), 1u);
  EXPECT_EQ(assign[0].values.at("classIden").text, "classNameVar");
  EXPECT_EQ(assign[0].values.at("exp0").text, "findPicker()");
  EXPECT_EQ(match_rule(*p.find_rule("bottomupper"), u).size(), 0u);

  const auto ref_assign = brute_force(u, "TimePicker classIden = exp0;",
                                      "tempFunctionReturnValue = classIden.getCurrentMinute();");
  ASSERT_EQ(ref_assign.size(), 1u);
  EXPECT_EQ(ref_assign[0].at("classIden"), "classNameVar ");
  EXPECT_EQ(ref_assign[0].at("exp0"), "findPicker ( ) ");
  EXPECT_TRUE(brute_force(u, "TimePicker classIden = exp0;", "classIden.getCurrentMinute();").empty());
}

TEST(MatchRule, BruteForceAgreesOnVariants) {
  const auto p = parse_patch(goldens::kUpdatePatch);
  const std::vector<std::string> bodies = {
      "        TimePicker classNameVar = a.b;\n        log(1);\n        classNameVar.getCurrentMinute();\n",
      "        TimePicker classNameVar = (TimePicker) v;\n        if (x) {\n"
      "            classNameVar.getCurrentMinute();\n        }\n",
      "        TimePicker p = q;\n        TimePicker classNameVar = r;\n        p.getCurrentMinute();\n",
      "        TimePicker p = q;\n        p.getCurrentMinute();\n        TimePicker r = s;\n"
      "        r.getCurrentMinute();\n",
      "        TimePicker classNameVar = this.picker;\n        classNameVar.getCurrentMinute(1);\n",
      "        classNameVar.getCurrentMinute();\n        TimePicker classNameVar = q;\n",
  };
  for (const auto& body : bodies) {
    const auto u = parse_unit(goldens::wrap("Object v, boolean x", body));
    const auto got = match_rule(*p.find_rule("bottomupper"), u);
    const auto want = brute_force(u, "TimePicker classIden = exp0;", "classIden.getCurrentMinute();");
    ASSERT_EQ(got.size(), want.size()) << body;
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(squash(got[i].values.at("exp0").text), want[i].at("exp0")) << body;
      EXPECT_EQ(squash(got[i].values.at("classIden").text), want[i].at("classIden")) << body;
    }
  }
}

TEST(MatchRule, AdjacentAnchorsNeedConsecutiveStatements) {
  const auto p = parse_patch("@r@\nidentifier x;\n@@\nint x = 0;\n- x++;\n");
  EXPECT_EQ(match_rule(p.rules[0], parse_unit(goldens::wrap("", "        int a = 0;\n        a++;\n"))).size(), 1u);
  EXPECT_EQ(match_rule(p.rules[0], parse_unit(goldens::wrap("", "        int a = 0;\n        f();\n        a++;\n"))).size(),
            0u);
  EXPECT_EQ(match_rule(p.rules[0], parse_unit(goldens::wrap("", "        int a = 0;\n        b++;\n"))).size(), 0u);
}

TEST(MatchRule, IdentifierMetavarRejectsExpressions) {
  const auto p = parse_patch("@r@\nidentifier r;\n@@\n- r.getCurrentHour();\n+ r.getHour();\n");
  EXPECT_EQ(match_rule(p.rules[0], parse_unit(goldens::wrap("", "        this.p.getCurrentHour();\n"))).size(), 0u);
  EXPECT_EQ(match_rule(p.rules[0], parse_unit(goldens::wrap("", "        p.getCurrentHour();\n"))).size(), 1u);
}

TEST(ApplyPatch, SimpleRule) {
  const auto c = goldens::simple_patch();
  EXPECT_TRUE(c.ok) << c.detail;
}

TEST(ApplyPatch, AssignmentRuleWrapsTheCall) {
  const auto p = parse_patch(goldens::kUpdatePatch);
  const auto r = apply_patch(p, target_unit());
  EXPECT_EQ(r.total_applied(), 1u);
  const auto out = parse_unit(r.text);
  const auto& stmts = out.decls[0].methods[0].body->statements;
  ASSERT_EQ(stmts.size(), 3u);
  const auto expected = parse_statement(
      "if (Build.VERSION.SDK_INT >= Build.VERSION_CODES.M) { tempFunctionReturnValue = classNameVar.getMinute(); } "
      "else { tempFunctionReturnValue = classNameVar.getCurrentMinute(); }");
  EXPECT_TRUE(structurally_equal(*stmts[2], *expected)) << r.text;
  EXPECT_EQ(r.text, goldens::wrap("",
                                  "        TimePicker classNameVar = findPicker();\n"
                                  "        int tempFunctionReturnValue;\n"
                                  "        if (Build.VERSION.SDK_INT >= Build.VERSION_CODES.M) {\n"
                                  "            tempFunctionReturnValue = classNameVar.getMinute();\n"
                                  "        } else {\n"
                                  "            tempFunctionReturnValue = classNameVar.getCurrentMinute();\n"
                                  "        }\n"));
}

TEST(ApplyPatch, ZeroMatchesIsIdentity) {
  const auto p = parse_patch(goldens::kUpdatePatch);
  const auto u = parse_unit(goldens::wrap("", "        int  x = 1 ;  // untouched\n"));
  const auto r = apply_patch(p, u);
  EXPECT_EQ(r.text, u.text);
  EXPECT_EQ(r.total_matches(), 0u);
  EXPECT_FALSE(r.changed(u.text));
}

TEST(ApplyPatch, SkipGuardReportsAndLeavesText) {
  const auto p = parse_patch(goldens::kUpdatePatch);
  const auto once = apply_patch(p, target_unit());
  const auto twice = apply_patch(p, parse_unit(once.text));
  EXPECT_EQ(twice.text, once.text);
  EXPECT_EQ(twice.total_applied(), 0u);
  EXPECT_EQ(twice.total_skipped(), 1u);
  ASSERT_FALSE(twice.sites.empty());
  EXPECT_TRUE(twice.sites[0].skipped);
  EXPECT_FALSE(twice.sites[0].reason.empty());
}

TEST(ApplyPatch, NumericGuardAlsoCountsAsUpdated) {
  const auto p = parse_patch(goldens::kUpdatePatch);
  const auto u = parse_unit(goldens::wrap("", "        TimePicker classNameVar = q;\n"
                                              "        if (android.os.Build.VERSION.SDK_INT >= 23) {\n"
                                              "            classNameVar.getMinute();\n"
                                              "        } else {\n"
                                              "            classNameVar.getCurrentMinute();\n"
                                              "        }\n"));
  const auto r = apply_patch(p, u);
  EXPECT_EQ(r.text, u.text);
  EXPECT_EQ(r.total_skipped(), 1u);
}

TEST(ApplyPatch, BrokenPlusLinesRaiseReparseError) {
  const auto p = parse_patch("@r@\nidentifier r;\n@@\n+ if (true) {\n r.getCurrentHour();\n");
  EXPECT_THROW(apply_patch(p, parse_unit(goldens::wrap("", "        p.getCurrentHour();\n"))), ReparseError);
}

TEST(ApplyPatch, MultipleSitesInOneRun) {
  const auto p = parse_patch(goldens::kSimplePatch);
  const auto u = parse_unit(goldens::wrap("", "        a.getCurrentHour();\n        if (x) {\n"
                                              "            b.c.getCurrentHour();\n        }\n"
                                              "        a.getCurrentHour();\n"));
  const auto r = apply_patch(p, u);
  EXPECT_EQ(r.total_applied(), 3u);
  EXPECT_EQ(r.text.find("getCurrentHour"), std::string::npos);
}

TEST(ApplyPatch, MinusOnlyDeletesStatement) {
  const auto p = parse_patch("@r@\nexpression e;\n@@\n- e.debug();\n");
  const auto u = parse_unit(goldens::wrap("", "        log.debug();\n        work();\n"));
  EXPECT_EQ(apply_patch(p, u).text, goldens::wrap("", "        work();\n"));
}
