#pragma once

// Random cases and differential checks shared by the property tests and the
// acceptance runner.

#include <functional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "support.hpp"

namespace lftest::gen {

using namespace lambfence;

struct CheckResult {
  int cases = 0;
  int mismatches = 0;
  int interesting = 0;  // scan errors, parsed inputs or pruned forests, per check
  std::string first_mismatch;

  void fail(std::string what) {
    if (mismatches++ == 0) first_mismatch = std::move(what);
  }
};

inline const std::vector<std::string>& scan_patterns() {
  static const std::vector<std::string> p{"a",   "b",     "ab",    "a+",  "b+",   "[ab]",
                                          "(ab)+", "a?b", "ba*", "[ab]+", "a|bb", "c"};
  return p;
}

inline std::vector<TokenTypeSpec> random_specs(std::mt19937& rng) {
  std::vector<TokenTypeSpec> specs;
  const int n = static_cast<int>(1 + rng() % 3);
  for (int i = 0; i < n; ++i)
    specs.push_back(make_token_type("T" + std::to_string(i), scan_patterns()[rng() % scan_patterns().size()],
                                    static_cast<int>(rng() % 3)));
  for (auto& s : specs)
    for (int j = 0; j < n; ++j)
      if (rng() % 3 == 0 && s.name != "T" + std::to_string(j)) s.overrides.insert("T" + std::to_string(j));
  return specs;
}

inline std::string random_input(std::mt19937& rng, std::size_t max_len) {
  std::string s;
  for (std::size_t i = 0, n = rng() % (max_len + 1); i < n; ++i) s += "aab b c"[rng() % 7];
  return s;
}

/// Exploratory scanning against regex enumeration; `interesting` counts the
/// cases where both sides report an uncovered position.
inline CheckResult check_scanner(int cases, std::uint32_t seed) {
  std::mt19937 rng(seed);
  CheckResult r;
  for (int round = 0; round < cases; ++round, ++r.cases) {
    auto specs = random_specs(rng);
    auto input = random_input(rng, 20);
    const std::optional<std::string> ignore =
        rng() % 2 ? std::optional<std::string>(default_ignore_pattern()) : std::nullopt;
    const auto expected = oracle_enumerate_scans(input, specs);
    const auto uncovered = oracle_uncovered_positions(input, expected, ignore);
    const std::string where = "scanner case " + std::to_string(round) + " input '" + input + "'";
    try {
      auto got = scan_exploratory(input, specs, {ScanPolicy::exploratory, ignore});
      if (!uncovered.empty())
        r.fail(where + ": expected an error at " + std::to_string(uncovered.front()));
      else if (std::set<Token>(got.begin(), got.end()) != expected)
        r.fail(where + ": token sets differ");
    } catch (const UnscannableRegion& e) {
      ++r.interesting;
      if (uncovered.empty() || e.position() != uncovered.front()) r.fail(where + ": unexpected " + e.what());
    }
  }
  return r;
}

struct RandomGrammar {
  Grammar normalized;
  std::vector<std::string> productions;  // ids before desugaring
};

inline const std::vector<std::string>& terms() {
  static const std::vector<std::string> t{"a", "b", "c"};
  return t;
}

/// Up to 4 nonterminals and 8 productions over {a, b, c}, with optional
/// elements and empty alternatives.
inline RandomGrammar random_grammar(std::mt19937& rng) {
  const int nts = static_cast<int>(1 + rng() % 4);
  const int prods = nts + static_cast<int>(rng() % (9 - nts));
  std::vector<std::pair<std::string, std::vector<std::string>>> rows;
  for (int p = 0; p < prods; ++p) {
    const std::string lhs = "N" + std::to_string(p < nts ? p : static_cast<int>(rng() % nts));
    std::vector<std::string> rhs;
    const int len = rng() % 8 == 0 ? 0 : static_cast<int>(1 + rng() % 3);
    for (int k = 0; k < len; ++k) {
      std::string sym = rng() % 2 ? terms()[rng() % terms().size()] : "N" + std::to_string(rng() % nts);
      if (rng() % 5 == 0) sym = "[" + sym + "]";
      rhs.push_back(sym);
    }
    rows.push_back({lhs, rhs});
  }
  auto g = grammar("N0", terms(), rows);
  RandomGrammar out;
  for (const auto& p : g.productions) out.productions.push_back(p.id);
  out.normalized = normalize_grammar(g);
  return out;
}

/// At most `max_len` terminals derived from the start symbol, or random ones
/// when the derivation attempt fails.
inline std::vector<std::string> random_sentence(std::mt19937& rng, const Grammar& g, std::size_t max_len = 10) {
  std::vector<std::string> out;
  std::function<bool(const std::string&, int)> derive = [&](const std::string& sym, int depth) {
    if (g.terminals.count(sym)) {
      out.push_back(sym);
      return out.size() <= max_len;
    }
    if (depth > 6) return false;
    std::vector<const Production*> alts;
    for (const auto& p : g.productions)
      if (p.lhs == sym) alts.push_back(&p);
    if (alts.empty()) return g.epsilon_symbols.count(sym) != 0;
    const auto* p = alts[rng() % alts.size()];
    for (const auto& e : p->rhs) {
      if (g.epsilon_symbols.count(e.symbol) && rng() % 2) continue;
      if (!derive(e.symbol, depth + 1)) return false;
    }
    return true;
  };
  if (!derive(g.start, 0) || out.empty()) {
    out.clear();
    std::vector<std::string> pool(g.terminals.begin(), g.terminals.end());
    for (std::size_t i = 0, n = 1 + rng() % max_len; i < n; ++i) out.push_back(pool[rng() % pool.size()]);
  }
  return out;
}

struct TooManyTrees : std::runtime_error {
  TooManyTrees() : std::runtime_error("too many trees") {}
};

/// Trees of the forest over a linear token graph; empty on NoParse or when
/// every tree is rejected.
inline std::set<std::string> forest(const std::vector<std::string>& seq, const Grammar& g, const ConstraintSet& cs,
                                    const EvaluatorRegistry& reg, bool enforce, EGraph* keep = nullptr) {
  PipelineOptions o;
  o.expand.enforce = enforce;
  o.expand.candidate_limit = 200000;
  try {
    auto r = run_on_graph(make_linear_graph(seq), g, cs, reg, o);
    if (r.egraph.tree_count() > 3000) throw TooManyTrees();
    auto trees = tree_set(r.egraph);
    if (keep) *keep = std::move(r.egraph);
    return trees;
  } catch (const ParseAborted&) {
    throw TooManyTrees();
  } catch (const NoParse&) {
    return {};
  } catch (const AllTreesRejected&) {
    return {};
  }
}

inline std::string join(const std::vector<std::string>& seq) {
  std::string s;
  for (const auto& t : seq) s += (s.empty() ? "" : " ") + t;
  return s;
}

/// Unconstrained pipeline against top-down enumeration; `interesting` counts
/// inputs with at least one tree. Forests above the tree cap are skipped.
inline CheckResult check_parser(int cases, std::uint32_t seed) {
  std::mt19937 rng(seed);
  CheckResult r;
  while (r.cases < cases) {
    auto rg = random_grammar(rng);
    auto seq = random_sentence(rng, rg.normalized);
    std::set<std::string> got;
    try {
      got = forest(seq, rg.normalized, {}, {}, true);
    } catch (const TooManyTrees&) {
      continue;
    }
    ++r.cases;
    if (!got.empty()) ++r.interesting;
    if (got != oracle_enumerate_parses(seq, rg.normalized))
      r.fail("grammar case " + std::to_string(r.cases) + " input '" + join(seq) + "'");
  }
  return r;
}

inline ConstraintSet random_constraints(std::mt19937& rng, const std::vector<std::string>& ids) {
  ConstraintSet cs;
  for (const auto& id : ids)
    if (rng() % 3 == 0) cs.associativity[id] = static_cast<Associativity>(rng() % 3);
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = 0; j < ids.size(); ++j) {
      if (rng() % 6 == 0) cs.composition_precedence.push_back({ids[i], ids[j]});
      // Forward pairs only, so preferences never form a cycle.
      if (i < j && rng() % 4 == 0) cs.selection_precedence.push_back({ids[i], ids[j]});
    }
  if (rng() % 3 == 0) cs.custom_evaluators[ids[rng() % ids.size()]] = "short";
  return cs;
}

inline EvaluatorRegistry short_spans() {
  return {{"short", [](const NodeView& v) { return v.end() - v.start() <= 3; }}};
}

/// A grammar with its constraints; `random_constraints` adds random ones on top.
struct CorpusEntry {
  std::string name;
  Grammar normalized;
  std::vector<std::string> productions;
  ConstraintSet constraints;
};

/// Constrained expansion against filtering the finished unconstrained trees.
/// Each round picks a corpus entry when given, else a random grammar, and a
/// sentence of at most 10 tokens. `interesting` counts forests that shrank.
inline CheckResult check_pruning(int cases, std::uint32_t seed, const std::vector<CorpusEntry>& corpus,
                                 bool add_random_constraints = true) {
  std::mt19937 rng(seed);
  CheckResult r;
  const auto reg = short_spans();
  for (int round = 0; r.cases < cases && round < cases * 20; ++round) {
    CorpusEntry e;
    if (!corpus.empty() && round % 2 == 0) {
      e = corpus[rng() % corpus.size()];
    } else {
      auto rg = random_grammar(rng);
      e = {"random", rg.normalized, rg.productions, {}};
    }
    auto cs = e.constraints;
    if (add_random_constraints) {
      auto extra = random_constraints(rng, e.productions);
      for (auto& [k, v] : extra.associativity) cs.associativity.emplace(k, v);
      for (auto& p : extra.composition_precedence) cs.composition_precedence.push_back(p);
      if (cs.selection_precedence.empty()) cs.selection_precedence = extra.selection_precedence;
      for (auto& [k, v] : extra.custom_evaluators) cs.custom_evaluators.emplace(k, v);
    }
    auto seq = random_sentence(rng, e.normalized);
    EGraph raw;
    std::set<std::string> unconstrained, constrained;
    try {
      unconstrained = forest(seq, e.normalized, cs, reg, false, &raw);
      if (unconstrained.empty()) continue;
      constrained = forest(seq, e.normalized, cs, reg, true);
    } catch (const TooManyTrees&) {
      continue;
    }
    ++r.cases;
    if (constrained.size() < unconstrained.size()) ++r.interesting;
    if (constrained != filter_after_expansion(raw, cs, reg))
      r.fail(e.name + " round " + std::to_string(round) + " input '" + join(seq) + "'");
  }
  return r;
}

/// Operator grammar with a duplicate alternative so that selection has work.
inline CorpusEntry operator_grammar() {
  auto g = grammar("E", {"n", "p", "t"},
                   {{"E", {"E", "p", "E"}}, {"E", {"E", "t", "E"}}, {"E", {"n"}}, {"E", {"E", "p", "E"}}});
  return {"operators", normalize_grammar(g), {"E.0", "E.1", "E.2", "E.3"}, {}};
}

}  // namespace lftest::gen
