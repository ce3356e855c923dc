#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace lambfence;

namespace {

LexicalAnalysisGraph price_reference() {
  return build_lexical_graph("5.2 $ 8.4", lftest::product_tokens(), {ScanPolicy::greedy, default_ignore_pattern()});
}

Grammar product_grammar() { return lftest::must_parse(lftest::product_spec_text()).normalized_grammar(); }

std::set<std::string> texts_of(const ElaGraph& g, const std::vector<std::size_t>& ids) {
  std::set<std::string> out;
  for (auto i : ids) out.insert(g.tokens[i].type + ":" + g.tokens[i].text);
  return out;
}

// Fixpoint recognizer over the lexical graph: item (A, i, j) for token
// indices i (first token) and j (last token), with every path of tokens
// from the input graph. Exponential in nothing, cubic in tokens.
std::set<std::tuple<std::string, std::size_t, std::size_t>> reference_nodes(const LexicalAnalysisGraph& la,
                                                                             const Grammar& g) {
  std::set<std::tuple<std::string, std::size_t, std::size_t>> known;  // symbol, start pos, end pos
  // Spans reachable as a token path: set of (first token, last token).
  for (std::size_t i = 0; i < la.tokens.size(); ++i) known.insert({la.tokens[i].type, la.tokens[i].start, la.tokens[i].end});
  // positions where a path may continue: for an end position e, tokens following any token ending at e
  auto next_tokens = [&](std::size_t end) {
    std::set<std::size_t> out;
    for (std::size_t i = 0; i < la.tokens.size(); ++i)
      if (la.tokens[i].end == end)
        for (auto f : la.following[i]) out.insert(f);
    return out;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& p : g.productions) {
      // ways to match rhs: (start, end) spans
      std::function<void(std::size_t, std::size_t, std::size_t, bool)> go = [&](std::size_t k, std::size_t start,
                                                                                 std::size_t end, bool any) {
        if (k == p.rhs.size()) {
          if (any && known.insert({p.lhs, start, end}).second) changed = true;
          return;
        }
        const auto& sym = p.rhs[k].symbol;
        if (g.epsilon_symbols.count(sym)) go(k + 1, start, end, any);
        std::vector<std::size_t> starts;
        if (!any) {
          for (std::size_t i = 0; i < la.tokens.size(); ++i) starts.push_back(la.tokens[i].start);
        } else {
          for (auto t : next_tokens(end)) starts.push_back(la.tokens[t].start);
        }
        std::sort(starts.begin(), starts.end());
        starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
        auto snapshot = known;
        for (const auto& [s, a, b] : snapshot)
          if (s == sym && std::binary_search(starts.begin(), starts.end(), a)) go(k + 1, any ? start : a, b, true);
      };
      go(0, 0, 0, false);
    }
  }
  return known;
}

}  // namespace

TEST(Ela, PriceReferenceCores) {
  auto g = build_ela_graph(price_reference());
  EXPECT_EQ(texts_of(g, g.cores[g.starting_core].following_tokens),
            (std::set<std::string>{"Integer:5", "Decimal:5.2"}));
  EXPECT_EQ(texts_of(g, g.cores[g.final_core].preceding_tokens), (std::set<std::string>{"Integer:4", "Decimal:8.4"}));
  // Point after "5" and the Dollar after "5.2"/"2" each get a core of their own.
  for (std::size_t i = 0; i < g.tokens.size(); ++i) {
    const auto& c = g.cores[g.token_preceding_core[i]];
    EXPECT_EQ(std::count(c.following_tokens.begin(), c.following_tokens.end(), i), 1);
  }
  const auto dollar = std::find_if(g.tokens.begin(), g.tokens.end(), [](const Token& t) { return t.type == "Dollar"; });
  const auto& before_dollar = g.cores[g.token_preceding_core[dollar - g.tokens.begin()]];
  EXPECT_EQ(texts_of(g, before_dollar.preceding_tokens), (std::set<std::string>{"Integer:2", "Decimal:5.2"}));
}

TEST(Ela, EmptyGraphHasOneCore) {
  auto g = build_ela_graph({});
  EXPECT_EQ(g.cores.size(), 1u);
  EXPECT_EQ(g.starting_core, g.final_core);
}

TEST(Ela, SingleToken) {
  auto g = build_ela_graph(compute_adjacency({{"A", 0, 1, "a"}}));
  ASSERT_EQ(g.cores.size(), 2u);
  EXPECT_EQ(g.cores[g.starting_core].following_tokens, (std::vector<std::size_t>{0}));
  EXPECT_EQ(g.cores[g.final_core].preceding_tokens, (std::vector<std::size_t>{0}));
  EXPECT_EQ(g.token_following_cores[0], (std::vector<std::size_t>{g.final_core}));
}

TEST(AdvanceHandle, MatchesSymbolAfterDot) {
  GrammarTables g(lftest::grammar("S", {"a", "b"}, {{"S", {"a", "b"}}}));
  auto r = advance_handle({0, 0, 0, 0}, g.find("a"), 1, g);
  ASSERT_EQ(r.handles.size(), 1u);
  EXPECT_EQ(r.handles[0], (Handle{0, 1, 0, 1}));
  EXPECT_TRUE(r.reductions.empty());
  auto done = advance_handle(r.handles[0], g.find("b"), 2, g);
  EXPECT_TRUE(done.handles.empty());
  EXPECT_EQ(done.reductions, (std::vector<Reduction>{{0, 0, 2}}));
  EXPECT_FALSE(advance_handle({0, 0, 0, 0}, g.find("b"), 1, g).matched());
}

TEST(AdvanceHandle, SkipsEpsilonSymbols) {
  auto gr = lftest::grammar("S", {"a", "b"}, {{"S", {"E", "a", "E"}}, {"E", {"b"}}, {"E", {}}});
  gr = extract_epsilon_symbols(gr);
  gr = normalize_grammar(gr);
  GrammarTables g(gr);
  ASSERT_TRUE(g.is_epsilon(g.find("E")));
  const auto s = g.rules_for(g.find("S"))[0];
  auto r = advance_handle({s, 0, 3, 3}, g.find("a"), 4, g);
  // Dot after "a" and the reduction with the trailing E skipped.
  EXPECT_EQ(r.handles, (std::vector<Handle>{{s, 2, 3, 4}}));
  EXPECT_EQ(r.reductions, (std::vector<Reduction>{{s, 3, 4}}));
}

TEST(ChartParse, PriceReferenceStartingNode) {
  auto ig = chart_parse(build_ela_graph(price_reference()), product_grammar());
  ASSERT_EQ(ig.starting_nodes().size(), 1u);
  const auto& root = ig.nodes()[ig.starting_nodes()[0]];
  EXPECT_EQ(root.start, 0u);
  EXPECT_EQ(root.end, 9u);
  EXPECT_EQ(ig.grammar().name(root.symbol), "Product");
  auto price = ig.find(4, 9, "Price");
  ASSERT_TRUE(price);
  auto ds = ig.derivations(*price);
  ASSERT_EQ(ds.size(), 1u);
  ASSERT_EQ(ds[0].children.size(), 2u);
  EXPECT_EQ(ig.grammar().name(ig.nodes()[ds[0].children[0]].symbol), "Dollar");
  EXPECT_EQ(ig.grammar().name(ig.nodes()[ds[0].children[1]].symbol), "Decimal");
  EXPECT_TRUE(ig.find(0, 3, "Reference"));
  EXPECT_TRUE(ig.find(0, 3, "Price"));  // optional Dollar omitted
}

TEST(ChartParse, IncompleteInputRaisesNoParse) {
  auto la = build_lexical_graph("5.2", lftest::product_tokens(), {});
  try {
    chart_parse(build_ela_graph(la), product_grammar());
    FAIL();
  } catch (const NoParse& e) {
    EXPECT_FALSE(e.maximal_nodes().empty());
    for (const auto& n : e.maximal_nodes()) EXPECT_NE(n.find("[0,3)"), std::string::npos) << n;
  }
  ChartOptions lenient;
  lenient.require_parse = false;
  EXPECT_TRUE(chart_parse(build_ela_graph(la), product_grammar(), lenient).starting_nodes().empty());
}

TEST(ChartParse, EmptyInputHasNoParse) {
  EXPECT_THROW(chart_parse(build_ela_graph({}), product_grammar()), NoParse);
}

TEST(ChartParse, HandleCountWithinBound) {
  auto spec = lftest::must_parse("%start E\n%tokens\nNum /[0-9]/\nPlus /\\+/\n%productions\nE ::= E Plus E | Num ;\n");
  for (int k : {1, 4, 9, 16}) {
    auto la = build_lexical_graph(lftest::repeat_sum(k), spec.token_specs, spec.scan_config);
    auto g = spec.normalized_grammar();
    auto ig = chart_parse(build_ela_graph(la), g);
    std::size_t dots = 0;
    for (const auto& p : g.productions) dots += p.rhs.size() + 1;
    const std::size_t n = ig.stats().positions;
    EXPECT_LE(ig.stats().handles, dots * n * n);
    EXPECT_LE(ig.stats().nodes, (g.nonterminals.size() + g.terminals.size()) * n * n);
  }
}

TEST(ChartParse, DeterministicAcrossAgendaOrders) {
  auto spec = lftest::must_parse("%start E\n%tokens\nNum /[0-9]/\nPlus /\\+/\n%productions\nE ::= E Plus E | Num ;\n");
  auto la = build_lexical_graph(lftest::repeat_sum(7), spec.token_specs, spec.scan_config);
  auto ela = build_ela_graph(la);
  auto g = spec.normalized_grammar();
  auto base = chart_parse(ela, g);
  auto summary = [](const IGraph& ig) {
    std::set<std::string> s;
    for (std::uint32_t i = 0; i < ig.nodes().size(); ++i) {
      std::set<std::string> ds;
      for (const auto& der : ig.derivations(i)) {
        std::string d = std::to_string(der.production);
        for (auto c : der.children) d += "," + ig.describe(c);
        ds.insert(d);
      }
      std::string line = ig.describe(i) + ":";
      for (const auto& d : ds) line += " " + d;
      s.insert(line);
    }
    return s;
  };
  const auto expected = summary(base);
  EXPECT_EQ(summary(chart_parse(ela, g)), expected);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ChartOptions o;
    o.order = AgendaOrder::shuffled;
    o.shuffle_seed = seed;
    EXPECT_EQ(summary(chart_parse(ela, g, o)), expected) << seed;
  }
}

TEST(ChartParse, DeadlineAborts) {
  auto spec = lftest::must_parse("%start E\n%tokens\nNum /[0-9]/\nPlus /\\+/\n%productions\nE ::= E Plus E | Num ;\n");
  auto la = build_lexical_graph(lftest::repeat_sum(200), spec.token_specs, spec.scan_config);
  ChartOptions o;
  o.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
  EXPECT_THROW(chart_parse(build_ela_graph(la), spec.normalized_grammar(), o), ParseAborted);
}

TEST(ChartParse, LeftAndRightRecursion) {
  for (const auto& rows : std::vector<std::vector<std::pair<std::string, std::vector<std::string>>>>{
           {{"L", {"L", "a"}}, {"L", {"a"}}}, {{"L", {"a", "L"}}, {"L", {"a"}}}}) {
    auto g = normalize_grammar(lftest::grammar("L", {"a"}, rows));
    auto ig = chart_parse(build_ela_graph(make_linear_graph({"a", "a", "a", "a", "a"})), g);
    ASSERT_EQ(ig.starting_nodes().size(), 1u);
    // Every contiguous run of a's is an L.
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = i + 1; j <= 5; ++j) EXPECT_TRUE(ig.find(i, j, "L")) << i << " " << j;
  }
}

TEST(ChartParse, UnitCycleTerminates) {
  auto g = normalize_grammar(lftest::grammar("A", {"c"}, {{"A", {"c"}}, {"A", {"B"}}, {"B", {"A"}}}));
  auto ig = chart_parse(build_ela_graph(make_linear_graph({"c"})), g);
  auto a = ig.find(0, 1, "A");
  auto b = ig.find(0, 1, "B");
  ASSERT_TRUE(a && b);
  EXPECT_EQ(ig.derivations(*a).size(), 2u);
  EXPECT_EQ(ig.derivations(*b).size(), 1u);
}

TEST(ChartParse, AgreesWithFixpointRecognizer) {
  std::mt19937 rng(17);
  const std::vector<std::string> terms{"a", "b"};
  const std::vector<std::string> nts{"S", "X", "Y"};
  for (int round = 0; round < 150; ++round) {
    std::vector<std::pair<std::string, std::vector<std::string>>> rows;
    for (const auto& n : nts) {
      for (int k = 0, m = static_cast<int>(1 + rng() % 2); k < m; ++k) {
        std::vector<std::string> rhs;
        for (int s = 0, len = static_cast<int>(1 + rng() % 3); s < len; ++s) {
          auto pick = rng() % 5;
          rhs.push_back(pick < 2 ? terms[pick] : nts[pick - 2]);
        }
        rows.push_back({n, rhs});
      }
    }
    auto g = normalize_grammar(lftest::grammar("S", terms, rows));
    // Lexical graph with a fork: tokens "a" at [0,1), "b" at [0,2), then a/b tokens.
    std::vector<Token> toks{{"a", 0, 1, "a"}, {"b", 0, 2, "b"}};
    for (std::size_t p = 1; p < 5; ++p) toks.push_back({terms[rng() % 2], p, p + 1, "x"});
    auto la = compute_adjacency(toks);
    ChartOptions o;
    o.require_parse = false;
    auto ig = chart_parse(build_ela_graph(la), g, o);
    std::set<std::tuple<std::string, std::size_t, std::size_t>> got;
    for (std::uint32_t i = 0; i < ig.nodes().size(); ++i) {
      const auto& n = ig.nodes()[i];
      got.insert({ig.grammar().name(n.symbol), n.start, n.end});
    }
    ASSERT_EQ(got, reference_nodes(la, g)) << round;
  }
}
