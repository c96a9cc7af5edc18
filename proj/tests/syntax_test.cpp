#include <gtest/gtest.h>

#include "guardpatch/syntax/lexer.hpp"
#include "guardpatch/syntax/parser.hpp"
#include "guardpatch/syntax/splice.hpp"

using namespace guardpatch;

namespace {

const char* kClock = R"(package demo;

import android.os.Build;

public class Clock {
    private TimePicker picker;

    int hour() {
        int hour;
        if (android.os.Build.VERSION.SDK_INT >= android.os.Build.VERSION_CODES.M) {
            hour = picker.getHour();
        } else {
            hour = picker.getCurrentHour();
        }
        return hour;
    }
}
)";

const Stmt& first_body_statement(const SourceUnit& u, std::size_t i = 0) {
  return *u.decls.at(0).methods.at(0).body->statements.at(i);
}

}  // namespace

TEST(Lexer, SkipsCommentsAndKeepsSpans) {
  const std::string text = "a /* x */ .b(\"s\\\"t\") // tail\n + 0x1F;";
  const auto toks = tokenize(text);
  std::vector<std::string> words;
  for (const auto& t : toks)
    if (t.kind != TokenKind::End) words.emplace_back(t.text);
  EXPECT_EQ(words, (std::vector<std::string>{"a", ".", "b", "(", "\"s\\\"t\"", ")", "+", "0x1F", ";"}));
  for (const auto& t : toks)
    if (t.kind != TokenKind::End) EXPECT_EQ(t.span.of(text), t.text);
}

TEST(Lexer, LongestOperatorWins) {
  const auto toks = tokenize("a >= b -> c ++ d");
  EXPECT_EQ(toks[1].text, ">=");
  EXPECT_EQ(toks[3].text, "->");
  EXPECT_EQ(toks[5].text, "++");
}

TEST(Lexer, ShiftSplitsSoGenericsClose) {
  const auto toks = tokenize("Map<String, List<Integer>> m");
  EXPECT_EQ(toks[7].text, ">");
  EXPECT_EQ(toks[8].text, ">");
}

TEST(Lexer, UnterminatedStringIsAParseError) {
  EXPECT_THROW(tokenize("x = \"abc"), ParseError);
}

TEST(Parser, GuardedAssignmentShape) {
  const auto u = parse_unit(kClock);
  ASSERT_EQ(u.decls.size(), 1u);
  const Stmt& iff = first_body_statement(u, 1);
  ASSERT_EQ(iff.kind, StmtKind::If);
  ASSERT_EQ(iff.expr->kind, ExprKind::Binary);
  EXPECT_EQ(iff.expr->op, ">=");
  EXPECT_EQ(dotted_name(iff.expr->lhs()), "android.os.Build.VERSION.SDK_INT");
  EXPECT_EQ(dotted_name(iff.expr->rhs()), "android.os.Build.VERSION_CODES.M");

  const Stmt& then_stmt = *iff.then_branch->statements.at(0);
  ASSERT_EQ(then_stmt.kind, StmtKind::ExprStmt);
  ASSERT_EQ(then_stmt.expr->kind, ExprKind::Assign);
  EXPECT_EQ(then_stmt.expr->lhs().name, "hour");
  EXPECT_EQ(then_stmt.expr->rhs().kind, ExprKind::MethodCall);
  EXPECT_EQ(then_stmt.expr->rhs().name, "getHour");
  const Stmt& else_stmt = *iff.else_branch->statements.at(0);
  EXPECT_EQ(else_stmt.expr->rhs().name, "getCurrentHour");
}

TEST(Parser, SpansSliceBackToSource) {
  const auto u = parse_unit(kClock);
  const Stmt& iff = first_body_statement(u, 1);
  EXPECT_EQ(u.slice(iff.expr->span),
            "android.os.Build.VERSION.SDK_INT >= android.os.Build.VERSION_CODES.M");
  EXPECT_EQ(u.slice(iff.then_branch->statements.at(0)->span), "hour = picker.getHour();");
  EXPECT_EQ(u.slice(first_body_statement(u, 2).span), "return hour;");
}

TEST(Parser, OperatorPrecedence) {
  const auto e = parse_expression("a + b * c == d && !e || f");
  ASSERT_EQ(e->op, "||");
  EXPECT_EQ(e->lhs().op, "&&");
  EXPECT_EQ(e->lhs().lhs().op, "==");
  EXPECT_EQ(e->lhs().lhs().lhs().op, "+");
  EXPECT_EQ(e->lhs().lhs().lhs().rhs().op, "*");
}

TEST(Parser, CastsGenericsAndArrays) {
  EXPECT_EQ(parse_expression("((TimePicker) v).getCurrentHour()")->name, "getCurrentHour");
  EXPECT_EQ(parse_expression("(a) + b")->op, "+");
  const auto decl = parse_statement("List<String> xs = new ArrayList<>();");
  EXPECT_EQ(decl->kind, StmtKind::LocalVarDecl);
  EXPECT_EQ(decl->name, "xs");
  const auto arr = parse_statement("NetworkInfo[] all = cm.getAllNetworkInfo();");
  EXPECT_EQ(arr->type, "NetworkInfo[]");
}

TEST(Parser, StatementsOfEveryKind) {
  const auto stmts = parse_statements(R"(
    int i = 0;
    while (i < 3) { i++; }
    for (int k = 0; k < 2; k++) { continue; }
    for (String s : names) { break; }
    try { risky(); } catch (IOException e) { log(e); } finally { done(); }
    throw new IllegalStateException("x");
    ;
  )");
  ASSERT_EQ(stmts.size(), 7u);
  EXPECT_EQ(stmts[1]->kind, StmtKind::While);
  EXPECT_EQ(stmts[2]->kind, StmtKind::For);
  EXPECT_EQ(stmts[3]->kind, StmtKind::ForEach);
  EXPECT_EQ(stmts[4]->kind, StmtKind::Try);
  EXPECT_EQ(stmts[4]->catches.size(), 1u);
  EXPECT_TRUE(stmts[4]->else_branch);
  EXPECT_EQ(stmts[5]->kind, StmtKind::Throw);
  EXPECT_EQ(stmts[6]->kind, StmtKind::Empty);
}

TEST(Parser, ErrorCarriesLocation) {
  try {
    parse_unit("package p;\nclass {\n}\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.where().line, 2u);
    EXPECT_EQ(e.where().column, 7u);
  }
  EXPECT_THROW(parse_expression("a +"), ParseError);
  EXPECT_THROW(parse_statement("int x = ;"), ParseError);
}

TEST(Parser, UnsupportedBodyBecomesOpaque) {
  const auto u = parse_unit("class A {\n    void f() {\n        int x = ;\n    }\n}\n");
  ASSERT_EQ(u.decls[0].methods.size(), 1u);
  EXPECT_TRUE(u.decls[0].methods[0].opaque);
  EXPECT_NE(u.decls[0].methods[0].opaque_reason.find("3:17"), std::string::npos)
      << u.decls[0].methods[0].opaque_reason;
}

TEST(Parser, LambdaBodyMakesMethodOpaque) {
  const auto u = parse_unit(R"(class A {
    void f(Button b) {
        b.setOnClickListener(v -> go());
    }
    void g() { go(); }
})");
  ASSERT_EQ(u.decls[0].methods.size(), 2u);
  EXPECT_TRUE(u.decls[0].methods[0].opaque);
  EXPECT_FALSE(u.decls[0].methods[0].body);
  EXPECT_FALSE(u.decls[0].methods[1].opaque);
  EXPECT_EQ(count_opaque(u), 1u);
}

TEST(Parser, NestedAndAnonymousTypesAreVisited) {
  const auto u = parse_unit(R"(class Outer {
    static class Inner {
        void a() {}
    }
    void b() {}
})");
  std::vector<std::string> names;
  for_each_method(u, [&](const MethodDecl& m) { names.push_back(m.name); });
  EXPECT_EQ(names, (std::vector<std::string>{"b", "a"}));
}

TEST(Splice, ReplacesOnlyEditedBytes) {
  const auto u = parse_unit(kClock);
  const Stmt& iff = first_body_statement(u, 1);
  const Stmt& then_stmt = *iff.then_branch->statements.at(0);
  const std::string out = splice(u, {{then_stmt.span, "hour = 1;"}});
  std::string expected = kClock;
  expected.replace(then_stmt.span.begin, then_stmt.span.size(), "hour = 1;");
  EXPECT_EQ(out, expected);
}

TEST(Splice, GetCurrentHourCallSpan) {
  const auto u = parse_unit("class A {\n    void f() {\n        timepicker.getCurrentHour();\n    }\n}\n");
  const Stmt& s = first_body_statement(u);
  EXPECT_EQ(splice(u, {{s.span, "timepicker.getHour();"}}),
            "class A {\n    void f() {\n        timepicker.getHour();\n    }\n}\n");
}

TEST(Splice, RejectsOverlapAndOutOfRange) {
  const auto u = parse_unit("class A { void f() { a(); b(); } }");
  EXPECT_THROW(splice(u, {{{21, 25}, "x"}, {{23, 27}, "y"}}), OverlapError);
  EXPECT_THROW(splice(u, {{{5, 5}, "x"}, {{5, 5}, "y"}}), OverlapError);
  EXPECT_THROW(splice(u, {{{0, 1000}, "x"}}), std::out_of_range);
  EXPECT_EQ(splice(u, {}), u.text);
}

TEST(Splice, AdjacentInsertionAndReplacement) {
  const auto u = parse_unit("class A { void f() { a(); } }");
  EXPECT_EQ(splice(u, {{{21, 21}, "z(); "}, {{21, 25}, "b();"}}), "class A { void f() { z(); b(); } }");
}
