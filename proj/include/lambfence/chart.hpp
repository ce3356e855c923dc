#pragma once

// Fence, phases one and two: the extended lexical-analysis graph and the
// agenda-driven chart parser that produces the implicit parse graph.


#include <algorithm>
#include <bit>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lambfence/error.hpp"
#include "lambfence/language_model.hpp"
#include "lambfence/scanner.hpp"

namespace lambfence {

// ---------------------------------------------------------------------------
// Extended lexical-analysis graph

struct Core {
  /// Start positions of the tokens this core precedes.
  std::vector<std::size_t> positions;
  std::vector<std::size_t> preceding_tokens;
  std::vector<std::size_t> following_tokens;
};

/// Tokens interleaved with cores. Since the adjacency rule only looks at
/// spans, every token starting at a position shares one preceding core.
struct ElaGraph {
  std::vector<Token> tokens;
  std::vector<Core> cores;
  std::size_t starting_core = 0;
  std::size_t final_core = 0;
  std::vector<std::size_t> token_preceding_core;
  std::vector<std::vector<std::size_t>> token_following_cores;
  /// One past the largest token end.
  std::size_t positions = 0;
};

inline ElaGraph build_ela_graph(const LexicalAnalysisGraph& la) {
  ElaGraph g;
  g.tokens = la.tokens;
  const std::size_t t = la.tokens.size();
  if (t == 0) {
    g.cores.emplace_back();
    return g;
  }
  for (const auto& tok : la.tokens) g.positions = std::max(g.positions, tok.end + 1);

  g.cores.resize(2);
  g.starting_core = 0;
  g.final_core = 1;
  g.token_preceding_core.assign(t, 0);
  g.token_following_cores.assign(t, {});

  std::vector<std::size_t> core_at(g.positions, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < t; ++i) {
    const auto start = la.tokens[i].start;
    if (la.preceding[i].empty()) {
      g.token_preceding_core[i] = g.starting_core;
      auto& pos = g.cores[g.starting_core].positions;
      if (pos.empty() || pos.back() != start) pos.push_back(start);
      g.cores[g.starting_core].following_tokens.push_back(i);
      core_at[start] = g.starting_core;
      continue;
    }
    if (core_at[start] == std::numeric_limits<std::size_t>::max()) {
      core_at[start] = g.cores.size();
      Core c;
      c.positions = {start};
      c.preceding_tokens = la.preceding[i];
      g.cores.push_back(std::move(c));
    }
    g.token_preceding_core[i] = core_at[start];
    g.cores[core_at[start]].following_tokens.push_back(i);
  }
  for (std::size_t i = 0; i < t; ++i) {
    auto& out = g.token_following_cores[i];
    if (la.following[i].empty()) {
      out.push_back(g.final_core);
      g.cores[g.final_core].preceding_tokens.push_back(i);
      continue;
    }
    for (auto j : la.following[i]) out.push_back(g.token_preceding_core[j]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return g;
}

// ---------------------------------------------------------------------------
// Compiled grammar

using SymbolId = std::uint32_t;
inline constexpr SymbolId kUnknownSymbol = std::numeric_limits<SymbolId>::max();

/// Integer-coded view of a normalized grammar used by the parser and enforcer.
class GrammarTables {
 public:
  struct Rule {
    SymbolId lhs;
    std::vector<SymbolId> rhs;
    std::string id;
    std::string origin;
  };

  explicit GrammarTables(const Grammar& grammar) {
    for (const auto& s : grammar.terminals) intern(s, true);
    for (const auto& s : grammar.nonterminals) intern(s, false);
    epsilon_.assign(names_.size(), false);
    for (const auto& s : grammar.epsilon_symbols) {
      const SymbolId id = intern(s, false);
      epsilon_.resize(names_.size(), false);
      epsilon_[id] = true;
    }
    start_ = find(grammar.start);
    by_lhs_.assign(names_.size(), {});
    for (const auto& p : grammar.productions) {
      if (p.rhs.empty()) throw Error("production " + p.id + " is empty; extract epsilon symbols first");
      Rule r{intern(p.lhs, false), {}, p.id, p.origin.empty() ? p.id : p.origin};
      for (const auto& e : p.rhs) {
        if (e.optional) throw Error("production " + p.id + " has optional elements; desugar first");
        SymbolId s = find(e.symbol);
        if (s == kUnknownSymbol) throw Error("production " + p.id + " references undeclared symbol " + e.symbol);
        r.rhs.push_back(s);
      }
      by_lhs_.resize(names_.size());
      by_lhs_[r.lhs].push_back(static_cast<std::uint32_t>(rules_.size()));
      rules_.push_back(std::move(r));
    }
    epsilon_.resize(names_.size(), false);
    by_lhs_.resize(names_.size());
    seeds_.assign(names_.size(), {});
    for (std::uint32_t p = 0; p < rules_.size(); ++p) {
      const auto& rhs = rules_[p].rhs;
      for (std::uint32_t d = 0; d < rhs.size(); ++d) {
        seeds_[rhs[d]].push_back({p, d});
        if (!epsilon_[rhs[d]]) break;
      }
    }
  }

  SymbolId find(const std::string& name) const {
    auto it = ids_.find(name);
    return it == ids_.end() ? kUnknownSymbol : it->second;
  }
  const std::string& name(SymbolId s) const {
    static const std::string unknown = "?";
    return s < names_.size() ? names_[s] : unknown;
  }
  std::size_t symbol_count() const noexcept { return names_.size(); }
  SymbolId start() const noexcept { return start_; }
  bool is_terminal(SymbolId s) const { return s < terminal_.size() && terminal_[s]; }
  bool is_epsilon(SymbolId s) const { return s < epsilon_.size() && epsilon_[s]; }

  const std::vector<Rule>& rules() const noexcept { return rules_; }
  const Rule& rule(std::uint32_t p) const { return rules_[p]; }
  const std::vector<std::uint32_t>& rules_for(SymbolId lhs) const { return by_lhs_[lhs]; }

  /// (production, dot) pairs whose dot can reach `symbol` from the start of the
  /// right-hand side by skipping epsilon symbols only.
  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& seeds(SymbolId symbol) const {
    return seeds_[symbol];
  }

 private:
  SymbolId intern(const std::string& name, bool terminal) {
    auto [it, inserted] = ids_.emplace(name, static_cast<SymbolId>(names_.size()));
    if (inserted) {
      names_.push_back(name);
      terminal_.push_back(terminal);
    }
    return it->second;
  }

  std::unordered_map<std::string, SymbolId> ids_;
  std::vector<std::string> names_;
  std::vector<bool> terminal_;
  std::vector<bool> epsilon_;
  SymbolId start_ = kUnknownSymbol;
  std::vector<Rule> rules_;
  std::vector<std::vector<std::uint32_t>> by_lhs_;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> seeds_;
};

// ---------------------------------------------------------------------------
// Handles and the advance step

/// A dotted production plus the span its matched prefix covers.
struct Handle {
  std::uint32_t production = 0;
  std::uint32_t dot = 0;
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Handle&) const = default;
};

struct Reduction {
  std::uint32_t production = 0;
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Reduction&) const = default;
};

struct AdvanceResult {
  std::vector<Handle> handles;
  std::vector<Reduction> reductions;

  bool matched() const noexcept { return !handles.empty() || !reductions.empty(); }
};

namespace detail {

// Consumes a node at `dot` and reports every resulting dot: dot+1 and each
// further position reachable by skipping epsilon symbols.
template <typename Sink>
void dots_after_consuming(const GrammarTables& g, std::uint32_t production, std::uint32_t dot, Sink&& sink) {
  const auto& rhs = g.rule(production).rhs;
  for (std::uint32_t d = dot + 1;; ++d) {
    sink(d, d == rhs.size());
    if (d == rhs.size() || !g.is_epsilon(rhs[d])) break;
  }
}

}  // namespace detail

/// Matches the symbol after the dot against a node spanning [node_start,
/// node_end). Epsilon symbols in front of the dot may be skipped first, and
/// trailing epsilon symbols may be skipped afterwards; every outcome is
/// reported. A handle whose dot reaches the end yields a reduction.
inline AdvanceResult advance_handle(const Handle& handle, SymbolId node_symbol, std::size_t node_end,
                                    const GrammarTables& g) {
  AdvanceResult out;
  const auto& rhs = g.rule(handle.production).rhs;
  for (std::uint32_t d = handle.dot; d < rhs.size(); ++d) {
    if (rhs[d] == node_symbol) {
      detail::dots_after_consuming(g, handle.production, d, [&](std::uint32_t next, bool complete) {
        if (complete)
          out.reductions.push_back({handle.production, handle.start, node_end});
        else
          out.handles.push_back({handle.production, next, handle.start, node_end});
      });
    }
    if (!g.is_epsilon(rhs[d])) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Implicit parse graph

/// A (start, end, symbol) triple; terminals also carry the token index.
struct ImplicitNode {
  std::uint32_t start = 0;
  std::uint32_t end = 0;
  SymbolId symbol = kUnknownSymbol;
  std::int32_t token = -1;

  bool is_token() const noexcept { return token >= 0; }
};

struct Derivation {
  std::uint32_t production = 0;
  std::vector<std::uint32_t> children;

  bool operator==(const Derivation&) const = default;
  bool operator<(const Derivation& o) const {
    return std::tie(production, children) < std::tie(o.production, o.children);
  }
};

struct ChartStats {
  std::uint64_t generated_entries = 0;
  std::size_t handles = 0;
  std::size_t nodes = 0;
  std::size_t positions = 0;
};

enum class AgendaOrder { lifo, shuffled };

struct ChartOptions {
  AgendaOrder order = AgendaOrder::lifo;
  std::uint64_t shuffle_seed = 0;
  /// Throw NoParse when no starting node is found.
  bool require_parse = true;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

namespace detail {

// Membership bits in lazily allocated rows of a fixed width.
class BitRows {
 public:
  BitRows() = default;
  BitRows(std::size_t rows, std::size_t width) : width_(width), rows_(rows) {}

  /// Sets the bit; false if it was already set.
  bool insert(std::size_t row, std::size_t column) {
    auto& r = rows_[row];
    if (r.empty()) r.assign((width_ + 63) / 64, 0);
    std::uint64_t& word = r[column >> 6];
    const std::uint64_t bit = std::uint64_t{1} << (column & 63);
    if (word & bit) return false;
    word |= bit;
    return true;
  }

  bool contains(std::size_t row, std::size_t column) const {
    const auto& r = rows_[row];
    return !r.empty() && (r[column >> 6] >> (column & 63) & 1) != 0;
  }

  /// Calls f(column) for each bit set in our `row` but not in other's
  /// `other_row`. Both must share the width.
  template <typename F>
  void each_missing(std::size_t row, const BitRows& other, std::size_t other_row, F&& f) const {
    const auto& a = rows_[row];
    if (a.empty()) return;
    const auto& b = other.rows_[other_row];
    for (std::size_t w = 0; w < a.size(); ++w) {
      std::uint64_t bits = b.empty() ? a[w] : a[w] & ~b[w];
      while (bits) {
        f(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
        bits &= bits - 1;
      }
    }
  }

 private:
  std::size_t width_ = 0;
  std::vector<std::vector<std::uint64_t>> rows_;
};

class ChartParser;

}  // namespace detail

/// The chart-parse result: every (start, end, symbol) node found, the nodes
/// that span the input with the start symbol, and on-demand access to the
/// reductions that produce each node.
class IGraph {
 public:
  const std::vector<ImplicitNode>& nodes() const noexcept { return nodes_; }
  const std::vector<std::uint32_t>& starting_nodes() const noexcept { return starting_; }
  const GrammarTables& grammar() const noexcept { return *tables_; }
  std::shared_ptr<const GrammarTables> grammar_ptr() const noexcept { return tables_; }
  const std::vector<Token>& tokens() const noexcept { return tokens_; }
  const ChartStats& stats() const noexcept { return stats_; }

  std::optional<std::uint32_t> find(std::size_t start, std::size_t end, SymbolId symbol) const {
    const auto& ids = starting_at(start, symbol);
    auto it = std::lower_bound(ids.begin(), ids.end(), end,
                               [&](std::uint32_t id, std::size_t e) { return nodes_[id].end < e; });
    if (it == ids.end() || nodes_[*it].end != end) return std::nullopt;
    return *it;
  }
  std::optional<std::uint32_t> find(std::size_t start, std::size_t end, const std::string& symbol) const {
    return find(start, end, tables_->find(symbol));
  }

  std::string describe(std::uint32_t node) const {
    const auto& n = nodes_[node];
    return tables_->name(n.symbol) + "[" + std::to_string(n.start) + "," + std::to_string(n.end) + ")";
  }

  /// Every (production, children) pair reducing to `node`, found by matching
  /// each right-hand side of the node's symbol against the graph with the
  /// node's bounds fixed. Children exclude skipped epsilon symbols.
  std::vector<Derivation> derivations(std::uint32_t node) const {
    std::vector<Derivation> out;
    const auto& n = nodes_[node];
    if (n.is_token() || n.symbol >= tables_->symbol_count()) return out;
    std::vector<std::uint32_t> children;
    for (auto p : tables_->rules_for(n.symbol)) match_rhs(n, p, 0, children, out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Nodes with this start and symbol, ordered by end.
  const std::vector<std::uint32_t>& starting_at(std::size_t start, SymbolId symbol) const {
    static const std::vector<std::uint32_t> none;
    if (start >= next_starts_.size() || symbol >= symbols_) return none;
    return by_start_[start * symbols_ + symbol];
  }

  /// Start positions of the tokens that may follow a node ending at `end`.
  const std::vector<std::uint32_t>& next_starts(std::size_t end) const {
    static const std::vector<std::uint32_t> none;
    return end < next_starts_.size() ? next_starts_[end] : none;
  }

 private:
  friend class detail::ChartParser;

  void match_rhs(const ImplicitNode& n, std::uint32_t production, std::uint32_t dot,
                 std::vector<std::uint32_t>& children, std::vector<Derivation>& out) const {
    const auto& rhs = tables_->rule(production).rhs;
    if (dot == rhs.size()) {
      if (!children.empty() && nodes_[children.back()].end == n.end) out.push_back({production, children});
      return;
    }
    const SymbolId sym = rhs[dot];
    if (tables_->is_epsilon(sym)) match_rhs(n, production, dot + 1, children, out);

    auto try_start = [&](std::uint32_t q) {
      if (q >= n.end) return;
      if (dot + 1 == rhs.size()) {
        if (auto m = find(q, n.end, sym)) {
          children.push_back(*m);
          match_rhs(n, production, dot + 1, children, out);
          children.pop_back();
        }
        return;
      }
      for (auto m : starting_at(q, sym)) {
        if (nodes_[m].end > n.end) break;
        children.push_back(m);
        match_rhs(n, production, dot + 1, children, out);
        children.pop_back();
      }
    };
    if (children.empty()) {
      try_start(n.start);
    } else {
      for (auto q : next_starts(nodes_[children.back()].end)) try_start(q);
    }
  }

  std::shared_ptr<const GrammarTables> tables_;
  std::vector<Token> tokens_;
  std::vector<ImplicitNode> nodes_;
  // Indexed by start * symbols_ + symbol; each list sorted by node end.
  std::vector<std::vector<std::uint32_t>> by_start_;
  std::size_t symbols_ = 0;
  std::vector<std::vector<std::uint32_t>> next_starts_;
  std::vector<std::uint32_t> starting_;
  ChartStats stats_;
};

namespace detail {

class ChartParser {
 public:
  ChartParser(const ElaGraph& ela, std::shared_ptr<const GrammarTables> tables, const ChartOptions& options)
      : ela_(ela), g_(*tables), options_(options), rng_(options.shuffle_seed) {
    if (ela.positions >= std::numeric_limits<std::uint32_t>::max())
      throw Error("input too long for the chart parser");
    out_.tables_ = std::move(tables);
    out_.tokens_ = ela.tokens;
    index_positions();
  }

  IGraph run() {
    for (std::size_t i = 0; i < ela_.tokens.size(); ++i) {
      const auto& tok = ela_.tokens[i];
      add_node(static_cast<std::uint32_t>(tok.start), static_cast<std::uint32_t>(tok.end), g_.find(tok.type),
               static_cast<std::int32_t>(i));
    }
    std::uint64_t steps = 0;
    while (!agenda_.empty() || !pending_.empty()) {
      if (options_.deadline && (steps++ & 0xFFFF) == 0 && std::chrono::steady_clock::now() > *options_.deadline)
        throw ParseAborted("chart parse exceeded its time budget");
      if (!pending_.empty()) {
        const auto n = pending_.back();
        pending_.pop_back();
        add_node(n.start, n.end, n.symbol, -1);
        continue;
      }
      if (options_.order == AgendaOrder::shuffled && agenda_.size() > 1) {
        std::uniform_int_distribution<std::size_t> pick(0, agenda_.size() - 1);
        std::swap(agenda_[pick(rng_)], agenda_.back());
      }
      Entry e = agenda_.back();
      agenda_.pop_back();
      process(e);
    }
    finish();
    return std::move(out_);
  }

 private:
  struct Entry {
    std::uint32_t production, dot, start, end, node;
  };
  struct WaitingHandle {
    std::uint32_t production, dot, start;
  };
  struct PendingNode {
    std::uint32_t start, end;
    SymbolId symbol;
  };

  void index_positions() {
    const std::size_t n = ela_.positions;
    core_at_start_.assign(n, std::numeric_limits<std::uint32_t>::max());
    out_.next_starts_.assign(n, {});
    ends_for_core_.assign(ela_.cores.size(), {});
    only_final_.assign(n, false);
    out_.symbols_ = g_.symbol_count();
    positions_ = n;
    std::size_t dotted = 0;
    for (const auto& r : g_.rules()) {
      dot_offset_.push_back(dotted);
      dotted += r.rhs.size();
      for (std::size_t d = 0; d < r.rhs.size(); ++d) completes_only_.push_back(d + 1 == r.rhs.size());
    }
    completing_by_symbol_.assign(out_.symbols_, {});
    for (std::uint32_t p = 0; p < g_.rules().size(); ++p)
      if (g_.rule(p).rhs.size() >= 2) completing_by_symbol_[g_.rule(p).rhs.back()].push_back(p);
    starts_seen_ = BitRows(out_.symbols_ * n, n + 1);
    completing_starts_ = BitRows(g_.rules().size() * n, n + 1);
    node_seen_ = BitRows(out_.symbols_ * n, n + 1);
    handle_seen_ = BitRows(dotted * n, n + 1);
    out_.by_start_.assign(n * out_.symbols_, {});
    waiting_.assign(n * out_.symbols_, {});
    std::vector<bool> end_done(n, false);
    for (std::size_t i = 0; i < ela_.tokens.size(); ++i) {
      const auto& tok = ela_.tokens[i];
      core_at_start_[tok.start] = static_cast<std::uint32_t>(ela_.token_preceding_core[i]);
      if (end_done[tok.end]) continue;
      // Following cores depend only on the end position.
      end_done[tok.end] = true;
      const auto& cores = ela_.token_following_cores[i];
      only_final_[tok.end] = cores.size() == 1 && cores[0] == ela_.final_core;
      auto& starts = out_.next_starts_[tok.end];
      for (auto c : cores) {
        ends_for_core_[c].push_back(static_cast<std::uint32_t>(tok.end));
        for (auto p : ela_.cores[c].positions) starts.push_back(static_cast<std::uint32_t>(p));
      }
      std::sort(starts.begin(), starts.end());
      starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
    }
  }

  void push(std::uint32_t production, std::uint32_t dot, std::uint32_t start, std::uint32_t end, std::uint32_t node) {
    // Entries that can only complete go straight to the pending nodes.
    if (completes_only_[dot_offset_[production] + dot]) {
      const SymbolId lhs = g_.rule(production).lhs;
      const std::uint32_t end_of_node = out_.nodes_[node].end;
      if (!node_seen_.contains(std::size_t{lhs} * positions_ + start, end_of_node))
        pending_.push_back({start, end_of_node, lhs});
      return;
    }
    ++out_.stats_.generated_entries;
    agenda_.push_back({production, dot, start, end, node});
  }

  void add_node(std::uint32_t start, std::uint32_t end, SymbolId symbol, std::int32_t token) {
    if (symbol == kUnknownSymbol) {
      out_.nodes_.push_back({start, end, symbol, token});
      return;
    }
    if (!node_seen_.insert(std::size_t{symbol} * positions_ + start, end)) return;
    const auto id = static_cast<std::uint32_t>(out_.nodes_.size());
    out_.nodes_.push_back({start, end, symbol, token});
    out_.by_start_[start * out_.symbols_ + symbol].push_back(id);
    starts_seen_.insert(std::size_t{symbol} * positions_ + end, start);

    if (token < 0 && symbol == g_.start() && core_at_start_[start] == ela_.starting_core && only_final_[end])
      out_.starting_.push_back(id);

    // Handles seeded lazily: production-initial handles at this node's core.
    for (auto [p, d] : g_.seeds(symbol)) push(p, d, start, start, id);
    // Handles already waiting in the core preceding this node.
    const auto core = core_at_start_[start];
    for (auto e : ends_for_core_[core]) {
      for (const auto& h : waiting_[e * out_.symbols_ + symbol]) push(h.production, h.dot, h.start, e, id);
      // Completing handles, a machine word of start positions at a time.
      for (auto p : completing_by_symbol_[symbol]) {
        const SymbolId lhs = g_.rule(p).lhs;
        completing_starts_.each_missing(p * positions_ + e, starts_seen_, std::size_t{lhs} * positions_ + end,
                                        [&](std::size_t s) {
                                          pending_.push_back({static_cast<std::uint32_t>(s), end, lhs});
                                        });
      }
    }
  }

  void add_handle(std::uint32_t production, std::uint32_t dot, std::uint32_t start, std::uint32_t end) {
    if (!handle_seen_.insert((dot_offset_[production] + dot) * positions_ + start, end)) return;
    ++handle_count_;
    const SymbolId next = g_.rule(production).rhs[dot];
    if (completes_only_[dot_offset_[production] + dot]) {
      completing_starts_.insert(std::size_t{production} * positions_ + end, start);
      const std::size_t target = std::size_t{g_.rule(production).lhs} * positions_ + start;
      for (auto q : out_.next_starts_[end])
        node_seen_.each_missing(std::size_t{next} * positions_ + q, node_seen_, target, [&](std::size_t j) {
          pending_.push_back({start, static_cast<std::uint32_t>(j), g_.rule(production).lhs});
        });
      return;
    }
    waiting_[end * out_.symbols_ + next].push_back({production, dot, start});
    // add_node never runs inside this loop, so the vectors stay put.
    for (auto q : out_.next_starts_[end])
      for (auto m : out_.by_start_[q * out_.symbols_ + next]) push(production, dot, start, end, m);
  }

  void process(const Entry& e) {
    const auto& node = out_.nodes_[e.node];
    const std::uint32_t node_end = node.end;
    detail::dots_after_consuming(g_, e.production, e.dot, [&](std::uint32_t next, bool complete) {
      if (complete)
        add_node(e.start, node_end, g_.rule(e.production).lhs, -1);
      else
        add_handle(e.production, next, e.start, node_end);
    });
  }

  void finish() {
    for (auto& ids : out_.by_start_)
      std::sort(ids.begin(), ids.end(), [&](std::uint32_t a, std::uint32_t b) {
        return out_.nodes_[a].end != out_.nodes_[b].end ? out_.nodes_[a].end < out_.nodes_[b].end : a < b;
      });
    std::sort(out_.starting_.begin(), out_.starting_.end(), [&](std::uint32_t a, std::uint32_t b) {
      const auto& x = out_.nodes_[a];
      const auto& y = out_.nodes_[b];
      return std::tie(x.start, x.end, x.symbol) < std::tie(y.start, y.end, y.symbol);
    });
    out_.stats_.handles = handle_count_;
    out_.stats_.nodes = out_.nodes_.size();
    out_.stats_.positions = ela_.positions;
  }

  const ElaGraph& ela_;
  const GrammarTables& g_;
  ChartOptions options_;
  std::mt19937_64 rng_;
  IGraph out_;
  std::vector<Entry> agenda_;
  std::size_t positions_ = 0;
  // Rows by symbol * positions + start, columns by end.
  BitRows node_seen_;
  // Rows by dotted position * positions + start, columns by end.
  BitRows handle_seen_;
  std::vector<std::size_t> dot_offset_;
  // Per dotted position: consuming the next symbol can only complete the rule.
  std::vector<bool> completes_only_;
  // Rules of length >= 2 by their last symbol.
  std::vector<std::vector<std::uint32_t>> completing_by_symbol_;
  // Rows by symbol * positions + end, columns by start: node_seen_ transposed.
  BitRows starts_seen_;
  // Rows by rule * positions + end, columns by the start of a handle waiting
  // for the rule's last symbol.
  BitRows completing_starts_;
  std::vector<PendingNode> pending_;
  std::size_t handle_count_ = 0;
  // Handles by end * symbols + symbol after the dot.
  std::vector<std::vector<WaitingHandle>> waiting_;
  std::vector<std::uint32_t> core_at_start_;
  std::vector<std::vector<std::uint32_t>> ends_for_core_;
  std::vector<bool> only_final_;
};

}  // namespace detail

/// Runs the chart-parsing phase to its fixpoint. Throws NoParse (unless
/// disabled in the options) when no node spans the input with the start symbol.
inline IGraph chart_parse(const ElaGraph& ela, std::shared_ptr<const GrammarTables> tables,
                          const ChartOptions& options = {}) {
  IGraph ig = detail::ChartParser(ela, std::move(tables), options).run();
  if (options.require_parse && ig.starting_nodes().empty()) {
    std::vector<std::string> widest;
    std::size_t best = 0;
    for (std::uint32_t i = 0; i < ig.nodes().size(); ++i) {
      const auto& n = ig.nodes()[i];
      if (n.is_token() || n.symbol == kUnknownSymbol) continue;
      const std::size_t w = n.end - n.start;
      if (w > best) {
        best = w;
        widest.clear();
      }
      if (w == best) widest.push_back(ig.describe(i));
    }
    throw NoParse(std::move(widest));
  }
  return ig;
}

inline IGraph chart_parse(const ElaGraph& ela, const Grammar& grammar, const ChartOptions& options = {}) {
  return chart_parse(ela, std::make_shared<const GrammarTables>(grammar), options);
}

}  // namespace lambfence
