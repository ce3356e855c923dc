#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "generators.hpp"

using namespace lambfence;
namespace gen = lftest::gen;

TEST(ScannerOracle, ExploratoryMatchesRegexEnumeration) {
  auto r = gen::check_scanner(1000, 101);
  EXPECT_EQ(r.mismatches, 0) << r.first_mismatch;
  EXPECT_GT(r.interesting, 10);
  EXPECT_LT(r.interesting, 900);
}

TEST(ParserOracle, RandomGrammarsMatchTopDownEnumeration) {
  auto r = gen::check_parser(200, 202);
  EXPECT_EQ(r.mismatches, 0) << r.first_mismatch;
  EXPECT_GT(r.interesting, 60);
}

TEST(EnforcerOracle, EarlyPruningEqualsFilteringOnRandomGrammars) {
  auto r = gen::check_pruning(300, 303, {gen::operator_grammar()});
  EXPECT_EQ(r.cases, 300);
  EXPECT_EQ(r.mismatches, 0) << r.first_mismatch;
  EXPECT_GT(r.interesting, 40);
}

TEST(EnforcerOracle, EarlyPruningEqualsFilteringOnSampleSpecs) {
  std::vector<gen::CorpusEntry> corpus;
  for (const auto& entry : std::filesystem::directory_iterator(LAMBFENCE_SPECS)) {
    std::ifstream in(entry.path());
    auto spec = lftest::must_parse({std::istreambuf_iterator<char>(in), {}});
    gen::CorpusEntry e{entry.path().filename().string(), spec.normalized_grammar(), {}, spec.constraints};
    for (const auto& p : spec.grammar.productions) e.productions.push_back(p.id);
    corpus.push_back(std::move(e));
  }
  ASSERT_GE(corpus.size(), 6u);
  auto declared = gen::check_pruning(200, 404, corpus, false);
  EXPECT_EQ(declared.mismatches, 0) << declared.first_mismatch;
  EXPECT_GT(declared.cases, 50);
  auto mixed = gen::check_pruning(200, 405, corpus, true);
  EXPECT_EQ(mixed.mismatches, 0) << mixed.first_mismatch;
}
