#pragma once

// Brute-force reference implementations for differential tests. They share no
// matching or parsing code with the scanner and the chart parser.

#include <algorithm>
#include <functional>
#include <map>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lambfence/enforcer.hpp"
#include "lambfence/language_model.hpp"
#include "lambfence/scanner.hpp"

namespace lambfence {

/// Every (type, start, end) whose pattern fully matches input[start, end), minus
/// those whose start lies inside a span of a strictly higher tier type that
/// overrides them. Patterns go through std::regex (ECMAScript).
inline std::set<Token> oracle_enumerate_scans(std::string_view input, const std::vector<TokenTypeSpec>& specs) {
  const std::string text(input);
  std::vector<std::regex> res;
  for (const auto& s : specs) res.emplace_back(s.pattern, std::regex::ECMAScript);

  std::set<int> levels;
  for (const auto& s : specs) levels.insert(s.precedence);

  std::set<Token> out;
  // Tokens already accepted, by type name.
  std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> accepted;
  for (auto level = levels.rbegin(); level != levels.rend(); ++level) {
    std::vector<Token> tier;
    for (std::size_t t = 0; t < specs.size(); ++t) {
      if (specs[t].precedence != *level) continue;
      for (std::size_t s = 0; s < text.size(); ++s) {
        bool barred = false;
        for (std::size_t u = 0; u < specs.size() && !barred; ++u) {
          if (specs[u].precedence <= *level || !specs[u].overrides.count(specs[t].name)) continue;
          for (const auto& [a, b] : accepted[specs[u].name])
            if (a <= s && s < b) barred = true;
        }
        if (barred) continue;
        for (std::size_t e = s + 1; e <= text.size(); ++e)
          if (std::regex_match(text.begin() + static_cast<std::ptrdiff_t>(s), text.begin() + static_cast<std::ptrdiff_t>(e),
                               res[t]))
            tier.push_back({specs[t].name, s, e, text.substr(s, e - s)});
      }
    }
    for (auto& tok : tier) {
      accepted[tok.type].push_back({tok.start, tok.end});
      out.insert(std::move(tok));
    }
  }
  return out;
}

/// Positions covered by no oracle token and no ignore match, in ascending order.
inline std::vector<std::size_t> oracle_uncovered_positions(std::string_view input, const std::set<Token>& tokens,
                                                           const std::optional<std::string>& ignore_pattern) {
  const std::string text(input);
  std::vector<bool> covered(text.size(), false);
  for (const auto& t : tokens)
    for (std::size_t p = t.start; p < t.end; ++p) covered[p] = true;
  if (ignore_pattern && !ignore_pattern->empty()) {
    std::regex re(*ignore_pattern, std::regex::ECMAScript);
    for (std::size_t s = 0; s < text.size(); ++s)
      for (std::size_t e = s + 1; e <= text.size(); ++e)
        if (std::regex_match(text.begin() + static_cast<std::ptrdiff_t>(s), text.begin() + static_cast<std::ptrdiff_t>(e), re))
          for (std::size_t p = s; p < e; ++p) covered[p] = true;
  }
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < text.size(); ++p)
    if (!covered[p]) out.push_back(p);
  return out;
}

/// All derivation trees whose frontier is `sequence` (terminal names), top
/// down. A (symbol, span) already on the current path yields nothing, epsilon
/// symbols may be skipped inside a right-hand side, and every node consumes at
/// least one token. Trees render as `id(child child)` with terminals bare.
/// `grammar` must already be normalized.
inline std::set<std::string> oracle_enumerate_parses(const std::vector<std::string>& sequence, const Grammar& grammar,
                                                     std::size_t depth_bound = 64) {
  const std::size_t n = sequence.size();
  std::vector<std::tuple<std::string, std::size_t, std::size_t>> path;

  // Bottom-up fixpoint of derivable (symbol, i, j) so that the enumeration
  // below never explores spans that cannot be covered at all.
  std::set<std::tuple<std::string, std::size_t, std::size_t>> derivable;
  std::function<bool(const std::vector<RhsElement>&, std::size_t, std::size_t, std::size_t, bool)> fits =
      [&](const std::vector<RhsElement>& rhs, std::size_t k, std::size_t i, std::size_t j, bool consumed) {
        if (k == rhs.size()) return consumed && i == j;
        const std::string& sym = rhs[k].symbol;
        if (grammar.epsilon_symbols.count(sym) && fits(rhs, k + 1, i, j, consumed)) return true;
        if (grammar.is_terminal(sym)) return i < j && sequence[i] == sym && fits(rhs, k + 1, i + 1, j, true);
        for (std::size_t m = i + 1; m <= j; ++m)
          if (derivable.count({sym, i, m}) && fits(rhs, k + 1, m, j, true)) return true;
        return false;
      };
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& p : grammar.productions)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j <= n; ++j)
          if (!derivable.count({p.lhs, i, j}) && fits(p.rhs, 0, i, j, false)) {
            derivable.insert({p.lhs, i, j});
            changed = true;
          }
  }

  std::function<std::vector<std::string>(const std::string&, std::size_t, std::size_t)> trees;

  // Ways to spread rhs[k..] over tokens [i, j), as lists of rendered children.
  std::function<std::vector<std::vector<std::string>>(const std::vector<RhsElement>&, std::size_t, std::size_t,
                                                      std::size_t)>
      spread = [&](const std::vector<RhsElement>& rhs, std::size_t k, std::size_t i,
                   std::size_t j) -> std::vector<std::vector<std::string>> {
    if (k == rhs.size()) {
      if (i == j) return {{}};
      return {};
    }
    std::vector<std::vector<std::string>> out;
    const std::string& sym = rhs[k].symbol;
    if (grammar.epsilon_symbols.count(sym))
      for (auto& rest : spread(rhs, k + 1, i, j)) out.push_back(std::move(rest));
    if (grammar.is_terminal(sym)) {
      if (i < j && sequence[i] == sym)
        for (auto& rest : spread(rhs, k + 1, i + 1, j)) {
          rest.insert(rest.begin(), sym);
          out.push_back(std::move(rest));
        }
      return out;
    }
    for (std::size_t m = i + 1; m <= j; ++m) {
      auto tails = spread(rhs, k + 1, m, j);
      if (tails.empty()) continue;
      for (const auto& head : trees(sym, i, m))
        for (const auto& tail : tails) {
          std::vector<std::string> row{head};
          row.insert(row.end(), tail.begin(), tail.end());
          out.push_back(std::move(row));
        }
    }
    return out;
  };

  trees = [&](const std::string& sym, std::size_t i, std::size_t j) -> std::vector<std::string> {
    std::tuple<std::string, std::size_t, std::size_t> key{sym, i, j};
    if (!derivable.count(key)) return {};
    if (std::find(path.begin(), path.end(), key) != path.end() || path.size() >= depth_bound) return {};
    path.push_back(key);
    std::set<std::string> out;
    for (const auto& p : grammar.productions) {
      if (p.lhs != sym) continue;
      for (const auto& kids : spread(p.rhs, 0, i, j)) {
        if (kids.empty()) continue;
        std::string s = p.id + "(";
        for (std::size_t c = 0; c < kids.size(); ++c) s += (c ? " " : "") + kids[c];
        out.insert(s + ")");
      }
    }
    path.pop_back();
    return {out.begin(), out.end()};
  };

  if (n == 0 || !grammar.is_nonterminal(grammar.start)) return {};
  auto all = trees(grammar.start, 0, n);
  return {all.begin(), all.end()};
}

/// Renders the tree at `id` in the same notation as oracle_enumerate_parses.
inline std::string oracle_render(const EGraph& g, std::uint32_t id) {
  const auto& n = g.node(id);
  if (n.is_token()) return g.tokens()[static_cast<std::size_t>(n.token)].type;
  std::string s = g.production_id(n) + "(";
  for (std::size_t c = 0; c < n.children.size(); ++c) s += (c ? " " : "") + oracle_render(g, n.children[c]);
  return s + ")";
}

/// Every tree rooted at `id`, rendered; trees are enumerated, not shared.
inline std::vector<std::string> enumerate_trees(const EGraph& g, std::uint32_t id, std::size_t limit = 1000000) {
  std::map<std::uint32_t, std::vector<std::string>> memo;
  std::function<const std::vector<std::string>&(std::uint32_t)> go = [&](std::uint32_t x) -> const std::vector<std::string>& {
    if (auto it = memo.find(x); it != memo.end()) return it->second;
    const auto& n = g.node(x);
    std::vector<std::string> out;
    if (n.is_token()) {
      out.push_back(g.tokens()[static_cast<std::size_t>(n.token)].type);
    } else {
      std::vector<std::string> partial{g.production_id(n) + "("};
      for (std::size_t c = 0; c < n.children.size(); ++c) {
        const auto& sub = go(n.children[c]);
        std::vector<std::string> next;
        for (const auto& p : partial)
          for (const auto& s : sub) {
            if (next.size() >= limit) throw Error("tree enumeration limit exceeded");
            next.push_back(p + (c ? " " : "") + s);
          }
        partial = std::move(next);
      }
      for (auto& p : partial) out.push_back(p + ")");
    }
    return memo.emplace(x, std::move(out)).first->second;
  };
  return go(id);
}

/// Trees of an EGraph as a set of renderings.
inline std::set<std::string> tree_set(const EGraph& g) {
  std::set<std::string> out;
  for (auto r : g.starting_nodes())
    for (auto& t : enumerate_trees(g, r)) out.insert(std::move(t));
  return out;
}

/// Reference for constraint enforcement: walks every tree of an unconstrained
/// forest and keeps those in which no node violates a constraint. A node built
/// by q loses to p when p is preferred over q and p, with the same left-hand
/// side, can derive the same child sequence while passing the associativity and
/// composition checks.
inline std::set<std::string> filter_after_expansion(const EGraph& unconstrained, const ConstraintSet& constraints,
                                                    const EvaluatorRegistry& registry = {}) {
  const auto& g = unconstrained.grammar();
  CompiledConstraints cc(constraints, g, registry);

  auto derives = [&](std::uint32_t rule, const std::vector<SymbolId>& kids) {
    const auto& rhs = g.rule(rule).rhs;
    // reach[k] = rhs prefix positions that can account for kids[0..k)
    std::vector<std::set<std::size_t>> reach(kids.size() + 1);
    std::function<void(std::set<std::size_t>&)> close = [&](std::set<std::size_t>& s) {
      std::vector<std::size_t> work(s.begin(), s.end());
      while (!work.empty()) {
        auto d = work.back();
        work.pop_back();
        if (d < rhs.size() && g.is_epsilon(rhs[d]) && s.insert(d + 1).second) work.push_back(d + 1);
      }
    };
    reach[0].insert(0);
    close(reach[0]);
    for (std::size_t k = 0; k < kids.size(); ++k) {
      for (auto d : reach[k])
        if (d < rhs.size() && rhs[d] == kids[k]) reach[k + 1].insert(d + 1);
      close(reach[k + 1]);
    }
    return reach[kids.size()].count(rhs.size()) != 0;
  };

  std::map<std::uint32_t, bool> node_ok;
  auto ok = [&](std::uint32_t id) {
    if (auto it = node_ok.find(id); it != node_ok.end()) return it->second;
    const auto& n = unconstrained.node(id);
    bool good = true;
    if (!n.is_token()) {
      good = check_associativity(unconstrained, n, cc) && check_composition_precedence(unconstrained, n, cc);
      if (good) {
        std::vector<SymbolId> kids;
        for (auto c : n.children) kids.push_back(unconstrained.node(c).symbol);
        for (std::uint32_t p = 0; p < g.rules().size() && good; ++p) {
          if (g.rule(p).lhs != n.symbol || !cc.selection_prefers(static_cast<std::int32_t>(p), n.production)) continue;
          if (!derives(p, kids)) continue;
          ExplicitNode rival = n;
          rival.production = static_cast<std::int32_t>(p);
          if (check_associativity(unconstrained, rival, cc) && check_composition_precedence(unconstrained, rival, cc))
            good = false;
        }
      }
      if (good)
        if (const Evaluator* ev = cc.evaluator(n.production)) good = apply_custom_constraint(NodeView(unconstrained, n), *ev);
    }
    node_ok.emplace(id, good);
    return good;
  };

  // Enumerate trees keeping only those whose every node passes.
  std::map<std::uint32_t, std::vector<std::string>> memo;
  std::function<const std::vector<std::string>&(std::uint32_t)> go = [&](std::uint32_t x) -> const std::vector<std::string>& {
    if (auto it = memo.find(x); it != memo.end()) return it->second;
    const auto& n = unconstrained.node(x);
    std::vector<std::string> out;
    if (ok(x)) {
      if (n.is_token()) {
        out.push_back(unconstrained.tokens()[static_cast<std::size_t>(n.token)].type);
      } else {
        std::vector<std::string> partial{unconstrained.production_id(n) + "("};
        for (std::size_t c = 0; c < n.children.size() && !partial.empty(); ++c) {
          std::vector<std::string> next;
          for (const auto& p : partial)
            for (const auto& s : go(n.children[c])) next.push_back(p + (c ? " " : "") + s);
          partial = std::move(next);
        }
        for (auto& p : partial) out.push_back(p + ")");
      }
    }
    return memo.emplace(x, std::move(out)).first->second;
  };
  std::set<std::string> out;
  for (auto r : unconstrained.starting_nodes())
    for (const auto& t : go(r)) out.insert(t);
  return out;
}

}  // namespace lambfence
