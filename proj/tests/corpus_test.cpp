#include <gtest/gtest.h>

#include "corpus_check.hpp"

namespace {

class CorpusApi : public ::testing::TestWithParam<std::string> {};

std::vector<std::string> api_names() {
  std::vector<std::string> out;
  for (const auto& d : corpus::list_apis(GUARDPATCH_CORPUS_DIR)) out.push_back(d.filename().string());
  return out;
}

}  // namespace

TEST_P(CorpusApi, BehavesAsExpected) {
  const auto r = corpus::check_api(std::filesystem::path(GUARDPATCH_CORPUS_DIR) / GetParam());
  EXPECT_GE(r.targets.size(), 3u);
  if (!r.expect.synthesis_ok) {
    EXPECT_FALSE(r.synthesized);
    EXPECT_NE(r.synthesis_error.find("cannot be taken"), std::string::npos) << r.synthesis_error;
    return;
  }
  ASSERT_TRUE(r.synthesized) << r.synthesis_error;
  for (const auto& t : r.targets) {
    EXPECT_GT(t.sites, 0u) << t.path;
    for (const auto& f : t.failures) ADD_FAILURE() << t.path << ": " << f;
  }
}

INSTANTIATE_TEST_SUITE_P(Apis, CorpusApi, ::testing::ValuesIn(api_names()),
                         [](const auto& info) { return info.param; });

TEST(Corpus, TenApisEightSupported) {
  const auto names = api_names();
  EXPECT_EQ(names.size(), 10u);
  std::size_t supported = 0;
  for (const auto& n : names)
    supported += corpus::load_expectation(std::filesystem::path(GUARDPATCH_CORPUS_DIR) / n / "expect.json").synthesis_ok;
  EXPECT_EQ(supported, 8u);
}
