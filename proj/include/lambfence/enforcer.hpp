#pragma once

// Fence, phase three: expands the implicit parse graph into an explicit
// parse forest, discarding candidates as soon as a constraint rejects them.

#include <absl/container/flat_hash_map.h>
#include <absl/container/flat_hash_set.h>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lambfence/chart.hpp"
#include "lambfence/error.hpp"
#include "lambfence/language_model.hpp"

namespace lambfence {

struct ExplicitNode {
  SymbolId symbol = kUnknownSymbol;
  std::uint32_t start = 0;
  std::uint32_t end = 0;
  /// Rule index in the grammar tables; -1 for tokens.
  std::int32_t production = -1;
  std::vector<std::uint32_t> children;
  /// Token index for terminals; -1 otherwise.
  std::int32_t token = -1;

  bool is_token() const noexcept { return token >= 0; }
};

/// Content-addressed store of explicit nodes plus the parse-tree roots.
/// A node reached through several parents is stored once.
class EGraph {
 public:
  EGraph() = default;
  EGraph(std::shared_ptr<const GrammarTables> tables, std::vector<Token> tokens)
      : tables_(std::move(tables)), tokens_(std::move(tokens)) {}

  const std::vector<ExplicitNode>& nodes() const noexcept { return nodes_; }
  const ExplicitNode& node(std::uint32_t id) const { return nodes_[id]; }
  const std::vector<std::uint32_t>& starting_nodes() const noexcept { return starting_; }
  std::size_t tree_count() const noexcept { return starting_.size(); }
  const GrammarTables& grammar() const noexcept { return *tables_; }
  const std::vector<Token>& tokens() const noexcept { return tokens_; }

  const std::string& symbol_name(const ExplicitNode& n) const { return tables_->name(n.symbol); }
  std::string production_id(const ExplicitNode& n) const {
    return n.production < 0 ? std::string() : tables_->rule(static_cast<std::uint32_t>(n.production)).id;
  }
  std::string production_origin(const ExplicitNode& n) const {
    return n.production < 0 ? std::string() : tables_->rule(static_cast<std::uint32_t>(n.production)).origin;
  }

  /// Returns the id of the structurally equal node, adding it when new.
  std::uint32_t intern(ExplicitNode n) {
    Key key{n.production, n.production < 0 ? std::vector<std::uint32_t>{static_cast<std::uint32_t>(n.token)}
                                            : n.children};
    auto [it, inserted] = index_.try_emplace(std::move(key), static_cast<std::uint32_t>(nodes_.size()));
    if (inserted) nodes_.push_back(std::move(n));
    return it->second;
  }

  void set_starting_nodes(std::vector<std::uint32_t> roots) {
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    starting_ = std::move(roots);
  }

  /// Nodes reachable from the roots, in ascending id order.
  std::vector<std::uint32_t> reachable() const {
    std::vector<bool> seen(nodes_.size(), false);
    std::vector<std::uint32_t> stack(starting_.begin(), starting_.end());
    while (!stack.empty()) {
      auto id = stack.back();
      stack.pop_back();
      if (seen[id]) continue;
      seen[id] = true;
      for (auto c : nodes_[id].children) stack.push_back(c);
    }
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < nodes_.size(); ++i)
      if (seen[i]) out.push_back(i);
    return out;
  }

 private:
  using Key = std::pair<std::int32_t, std::vector<std::uint32_t>>;

  std::shared_ptr<const GrammarTables> tables_;
  std::vector<Token> tokens_;
  std::vector<ExplicitNode> nodes_;
  std::vector<std::uint32_t> starting_;
  absl::flat_hash_map<Key, std::uint32_t> index_;
};

/// Tokens at the leaves of the tree rooted at `id`, left to right.
inline std::vector<Token> frontier(const EGraph& g, std::uint32_t id) {
  std::vector<Token> out;
  std::vector<std::uint32_t> stack{id};
  while (!stack.empty()) {
    const auto& n = g.node(stack.back());
    stack.pop_back();
    if (n.is_token()) {
      out.push_back(g.tokens()[static_cast<std::size_t>(n.token)]);
      continue;
    }
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

/// Bracketed rendering, e.g. `Price(Dollar"$" Decimal"8.4")`.
inline std::string bracketed(const EGraph& g, std::uint32_t id) {
  const auto& n = g.node(id);
  if (n.is_token()) {
    const auto& t = g.tokens()[static_cast<std::size_t>(n.token)];
    return t.type + "\"" + t.text + "\"";
  }
  std::string out = g.symbol_name(n) + "(";
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    if (i) out += ' ';
    out += bracketed(g, n.children[i]);
  }
  return out + ")";
}

/// Read-only view handed to custom evaluators.
class NodeView {
 public:
  NodeView(const EGraph& graph, const ExplicitNode& node) : graph_(&graph), node_(&node) {}

  const std::string& symbol() const { return graph_->symbol_name(*node_); }
  std::size_t start() const { return node_->start; }
  std::size_t end() const { return node_->end; }
  std::string production() const { return graph_->production_id(*node_); }
  std::string origin() const { return graph_->production_origin(*node_); }
  bool is_token() const { return node_->is_token(); }
  const Token* token() const {
    return node_->is_token() ? &graph_->tokens()[static_cast<std::size_t>(node_->token)] : nullptr;
  }
  std::size_t child_count() const { return node_->children.size(); }
  NodeView child(std::size_t i) const { return NodeView(*graph_, graph_->node(node_->children.at(i))); }
  const ExplicitNode& raw() const { return *node_; }

  /// Concatenated token texts below this node.
  std::string text() const {
    if (const Token* t = token()) return t->text;
    std::string out;
    for (std::size_t i = 0; i < child_count(); ++i) out += child(i).text();
    return out;
  }

 private:
  const EGraph* graph_;
  const ExplicitNode* node_;
};

/// Custom constraint: true accepts the node, false inhibits it. Throwing
/// reports an EvaluatorFailure.
using Evaluator = std::function<bool(const NodeView&)>;
using EvaluatorRegistry = std::map<std::string, Evaluator>;

/// Constraint set resolved against the rule indices of a grammar.
class CompiledConstraints {
 public:
  CompiledConstraints(const ConstraintSet& constraints, const GrammarTables& g, const EvaluatorRegistry& registry = {}) {
    std::map<std::string, std::int32_t> origin_index;
    for (const auto& r : g.rules()) origin_index.emplace(r.origin, static_cast<std::int32_t>(origin_index.size()));
    origin_of_.reserve(g.rules().size());
    for (const auto& r : g.rules()) origin_of_.push_back(origin_index.at(r.origin));
    auto origin = [&](const std::string& id) -> std::int32_t {
      auto it = origin_index.find(id);
      return it == origin_index.end() ? -1 : it->second;
    };

    assoc_.assign(g.rules().size(), std::nullopt);
    evaluators_.assign(g.rules().size(), nullptr);
    evaluator_ids_.assign(g.rules().size(), {});
    for (std::size_t p = 0; p < g.rules().size(); ++p) {
      const auto& o = g.rule(static_cast<std::uint32_t>(p)).origin;
      if (auto it = constraints.associativity.find(o); it != constraints.associativity.end()) assoc_[p] = it->second;
      if (auto it = constraints.custom_evaluators.find(o); it != constraints.custom_evaluators.end()) {
        evaluator_ids_[p] = it->second;
        auto ev = registry.find(it->second);
        if (ev == registry.end())
          throw EvaluatorFailure(g.rule(static_cast<std::uint32_t>(p)).id, "no evaluator registered as " + it->second);
        evaluators_[p] = &ev->second;
      }
    }
    for (const auto& [a, b] : constraints.composition_precedence)
      if (origin(a) >= 0 && origin(b) >= 0) composition_.insert({origin(a), origin(b)});
    for (const auto& [a, b] : detail::transitive_closure(constraints.selection_precedence))
      if (origin(a) >= 0 && origin(b) >= 0) selection_.insert({origin(a), origin(b)});
  }

  std::int32_t origin(std::int32_t production) const { return production < 0 ? -1 : origin_of_[production]; }
  std::optional<Associativity> associativity(std::int32_t production) const {
    return production < 0 ? std::nullopt : assoc_[production];
  }
  bool composition_inhibits(std::int32_t outer, std::int32_t inner) const {
    return outer >= 0 && inner >= 0 && composition_.count({origin(outer), origin(inner)});
  }
  bool selection_prefers(std::int32_t winner, std::int32_t loser) const {
    return winner >= 0 && loser >= 0 && selection_.count({origin(winner), origin(loser)});
  }
  bool has_selection() const noexcept { return !selection_.empty(); }
  const Evaluator* evaluator(std::int32_t production) const {
    return production < 0 ? nullptr : evaluators_[production];
  }

 private:
  std::vector<std::int32_t> origin_of_;
  std::vector<std::optional<Associativity>> assoc_;
  std::vector<const Evaluator*> evaluators_;
  std::vector<std::string> evaluator_ids_;
  std::set<std::pair<std::int32_t, std::int32_t>> composition_;
  std::set<std::pair<std::int32_t, std::int32_t>> selection_;
};

/// Rejects a candidate when a child built by the candidate's own production sits
/// where the declared direction forbids it: after a sibling for left-to-right,
/// before a sibling for right-to-left, anywhere for non-associative.
inline bool check_associativity(const EGraph& store, const ExplicitNode& candidate, const CompiledConstraints& c) {
  auto assoc = c.associativity(candidate.production);
  if (!assoc) return true;
  const auto own = c.origin(candidate.production);
  const std::size_t k = candidate.children.size();
  for (std::size_t i = 0; i < k; ++i) {
    const auto& child = store.node(candidate.children[i]);
    if (child.production < 0 || c.origin(child.production) != own) continue;
    switch (*assoc) {
      case Associativity::left_to_right:
        if (i > 0) return false;
        break;
      case Associativity::right_to_left:
        if (i + 1 < k) return false;
        break;
      case Associativity::non_associative:
        return false;
    }
  }
  return true;
}

/// Rejects a candidate whose production is declared to yield to the production
/// of any direct child.
inline bool check_composition_precedence(const EGraph& store, const ExplicitNode& candidate,
                                         const CompiledConstraints& c) {
  for (auto id : candidate.children)
    if (c.composition_inhibits(candidate.production, store.node(id).production)) return false;
  return true;
}

/// Among candidates for one implicit node, drops each candidate for which some
/// other candidate with an identical child sequence is built by a preferred
/// production.
inline std::vector<ExplicitNode> check_selection_precedence(std::vector<ExplicitNode> candidates,
                                                            const CompiledConstraints& c) {
  if (!c.has_selection() || candidates.size() < 2) return candidates;
  std::vector<bool> drop(candidates.size(), false);
  for (std::size_t i = 0; i < candidates.size(); ++i)
    for (std::size_t j = 0; j < candidates.size() && !drop[i]; ++j)
      if (i != j && candidates[i].production != candidates[j].production &&
          candidates[i].children == candidates[j].children &&
          c.selection_prefers(candidates[j].production, candidates[i].production))
        drop[i] = true;
  std::vector<ExplicitNode> out;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (!drop[i]) out.push_back(std::move(candidates[i]));
  return out;
}

/// Runs a custom evaluator; any exception it throws becomes EvaluatorFailure.
inline bool apply_custom_constraint(const NodeView& candidate, const Evaluator& evaluator) {
  if (!evaluator) return true;
  try {
    return evaluator(candidate);
  } catch (const EvaluatorFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw EvaluatorFailure(candidate.production(), e.what());
  } catch (...) {
    throw EvaluatorFailure(candidate.production(), "unknown exception");
  }
}

struct ExpandOptions {
  /// When false every candidate survives (the unconstrained forest).
  bool enforce = true;
  /// Throw AllTreesRejected when starting nodes exist but no tree survives.
  bool require_tree = true;
  /// Throw ParseAborted after this many candidates; 0 means no limit. The
  /// explicit forest grows with the number of trees, which is exponential for
  /// ambiguous grammars.
  std::uint64_t candidate_limit = 0;
};

struct EnforcementStats {
  std::map<std::string, std::uint64_t> rejected_by;
  std::uint64_t candidates = 0;
  std::uint64_t memo_hits = 0;
};

namespace detail {

class Expander {
 public:
  Expander(const IGraph& ig, const ConstraintSet& constraints, const EvaluatorRegistry& registry,
           const ExpandOptions& options)
      : ig_(ig),
        constraints_(constraints, ig.grammar(), registry),
        options_(options),
        out_(ig.grammar_ptr(), ig.tokens()) {}

  EGraph run(EnforcementStats* stats) {
    std::vector<std::uint32_t> roots;
    for (auto s : ig_.starting_nodes()) {
      root_reasons_ = &reasons_;
      const auto& result = expand(s);
      roots.insert(roots.end(), result.begin(), result.end());
    }
    out_.set_starting_nodes(std::move(roots));
    if (stats) *stats = stats_;
    if (options_.require_tree && !ig_.starting_nodes().empty() && out_.starting_nodes().empty()) {
      if (reasons_.empty()) {
        std::string why = "no starting node has a complete expansion";
        if (!stats_.rejected_by.empty()) {
          why += "; rejections below the root:";
          for (const auto& [kind, count] : stats_.rejected_by) why += " " + kind + "=" + std::to_string(count);
        }
        reasons_.push_back(std::move(why));
      }
      throw AllTreesRejected(reasons_);
    }
    return std::move(out_);
  }

 private:
  using MemoKey = std::pair<std::uint32_t, std::vector<std::uint32_t>>;

  const std::vector<Derivation>& derivations(std::uint32_t node) {
    auto it = derivations_.find(node);
    if (it == derivations_.end()) it = derivations_.emplace(node, ig_.derivations(node)).first;
    return it->second;
  }

  // Same-span nodes reachable from `node` through same-span children. Only
  // ancestors in this set can be met again below `node`.
  const absl::flat_hash_set<std::uint32_t>& same_span_reach(std::uint32_t node) {
    auto it = reach_.find(node);
    if (it != reach_.end()) return it->second;
    absl::flat_hash_set<std::uint32_t> seen;
    const auto& n = ig_.nodes()[node];
    std::vector<std::uint32_t> stack{node};
    while (!stack.empty()) {
      auto x = stack.back();
      stack.pop_back();
      for (const auto& d : derivations(x))
        for (auto c : d.children) {
          const auto& cn = ig_.nodes()[c];
          if (cn.start == n.start && cn.end == n.end && seen.insert(c).second) stack.push_back(c);
        }
    }
    return reach_.emplace(node, std::move(seen)).first->second;
  }

  void reject(const char* kind, const ExplicitNode& n) {
    ++stats_.rejected_by[kind];
    if (root_reasons_) {
      std::string desc = out_.production_id(n) + "[" + std::to_string(n.start) + "," + std::to_string(n.end) + ")";
      root_reasons_->push_back(desc + " rejected by " + kind);
    }
  }

  // Explicit expansions of an implicit node given the current history.
  std::vector<std::uint32_t> expand(std::uint32_t node) {
    const auto& n = ig_.nodes()[node];
    if (n.is_token()) {
      ExplicitNode t;
      t.symbol = n.symbol;
      t.start = n.start;
      t.end = n.end;
      t.token = n.token;
      return {out_.intern(std::move(t))};
    }
    if (history_.contains(node)) return {};

    MemoKey key{node, {}};
    const auto& reach = same_span_reach(node);
    if (!reach.empty())
      for (auto a : path_)
        if (reach.contains(a)) key.second.push_back(a);
    std::sort(key.second.begin(), key.second.end());
    if (auto it = memo_.find(key); it != memo_.end()) {
      ++stats_.memo_hits;
      return it->second;
    }

    std::vector<std::string>* reasons = root_reasons_;
    root_reasons_ = nullptr;
    history_.insert(node);
    path_.push_back(node);

    std::vector<ExplicitNode> candidates;
    for (const auto& d : derivations(node)) {
      std::vector<std::vector<std::uint32_t>> options;
      options.reserve(d.children.size());
      bool dead = false;
      for (auto c : d.children) {
        options.push_back(expand(c));
        if (options.back().empty()) {
          dead = true;
          break;
        }
      }
      if (dead) continue;
      // Cartesian product of the child expansions.
      std::vector<std::size_t> pick(options.size(), 0);
      while (true) {
        ExplicitNode cand;
        cand.symbol = n.symbol;
        cand.start = n.start;
        cand.end = n.end;
        cand.production = static_cast<std::int32_t>(d.production);
        cand.children.reserve(options.size());
        for (std::size_t i = 0; i < options.size(); ++i) cand.children.push_back(options[i][pick[i]]);
        if (++stats_.candidates > options_.candidate_limit && options_.candidate_limit != 0)
          throw ParseAborted("constraint enforcement exceeded its candidate budget");
        root_reasons_ = reasons;
        if (!options_.enforce) {
          candidates.push_back(std::move(cand));
        } else if (!check_associativity(out_, cand, constraints_)) {
          reject("associativity", cand);
        } else if (!check_composition_precedence(out_, cand, constraints_)) {
          reject("composition", cand);
        } else {
          candidates.push_back(std::move(cand));
        }
        root_reasons_ = nullptr;
        std::size_t i = 0;
        for (; i < pick.size(); ++i) {
          if (++pick[i] < options[i].size()) break;
          pick[i] = 0;
        }
        if (i == pick.size()) break;
      }
    }

    root_reasons_ = reasons;
    std::vector<std::uint32_t> result;
    if (options_.enforce) {
      const std::size_t before = candidates.size();
      std::vector<ExplicitNode> all = reasons ? candidates : std::vector<ExplicitNode>{};
      candidates = check_selection_precedence(std::move(candidates), constraints_);
      if (candidates.size() != before) {
        stats_.rejected_by["selection"] += before - candidates.size();
        if (reasons)
          for (const auto& c : all)
            if (std::none_of(candidates.begin(), candidates.end(),
                             [&](const ExplicitNode& k) { return k.production == c.production && k.children == c.children; }))
              reasons->push_back(out_.production_id(c) + " rejected by selection");
      }
    }
    for (auto& cand : candidates) {
      if (options_.enforce) {
        if (const Evaluator* ev = constraints_.evaluator(cand.production)) {
          if (!apply_custom_constraint(NodeView(out_, cand), *ev)) {
            reject("custom", cand);
            continue;
          }
        }
      }
      result.push_back(out_.intern(std::move(cand)));
    }
    root_reasons_ = nullptr;
    std::sort(result.begin(), result.end());
    result.erase(std::unique(result.begin(), result.end()), result.end());

    path_.pop_back();
    history_.erase(node);
    return memo_.emplace(std::move(key), std::move(result)).first->second;
  }

  const IGraph& ig_;
  CompiledConstraints constraints_;
  ExpandOptions options_;
  EGraph out_;
  EnforcementStats stats_;
  absl::flat_hash_map<std::uint32_t, std::vector<Derivation>> derivations_;
  absl::flat_hash_map<std::uint32_t, absl::flat_hash_set<std::uint32_t>> reach_;
  absl::flat_hash_set<std::uint32_t> history_;
  std::vector<std::uint32_t> path_;
  absl::flat_hash_map<MemoKey, std::vector<std::uint32_t>> memo_;
  std::vector<std::string> reasons_;
  std::vector<std::string>* root_reasons_ = nullptr;
};

}  // namespace detail

/// Expands every starting implicit node into explicit trees. Implicit nodes
/// already being expanded higher up the same chain contribute nothing, which
/// cuts grammar cycles. Results are memoized per node and per the relevant part
/// of the chain.
inline EGraph expand(const IGraph& igraph, const ConstraintSet& constraints, const EvaluatorRegistry& registry = {},
                     const ExpandOptions& options = {}, EnforcementStats* stats = nullptr) {
  return detail::Expander(igraph, constraints, registry, options).run(stats);
}

}  // namespace lambfence
