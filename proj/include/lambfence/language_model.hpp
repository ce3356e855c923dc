#pragma once

// Token-type specifications, grammars and disambiguation constraints, plus
// the load-time normalization that Fence expects: optional elements are
// desugared into production variants, and empty productions are folded into
// the epsilon-symbol set.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lambfence/error.hpp"
#include "lambfence/regex.hpp"

namespace lambfence {

struct Token;

/// Accept/reject hook applied to every scanned token of a type.
using TokenValidator = std::function<bool(const Token&)>;

struct TokenTypeSpec {
  std::string name;
  /// Regular expression text, or "@id" naming a custom matcher.
  std::string pattern;
  Matcher matcher;
  /// Higher tiers run first.
  int precedence = 0;
  /// Token types barred from starting inside spans this type matches.
  std::set<std::string> overrides;
  std::optional<std::string> validator_id;
  TokenValidator validator;

  bool operator==(const TokenTypeSpec& o) const {
    return name == o.name && pattern == o.pattern && precedence == o.precedence && overrides == o.overrides &&
           validator_id == o.validator_id;
  }
};

/// Builds a regex-backed token type.
inline TokenTypeSpec make_token_type(std::string name, std::string pattern, int precedence = 0,
                                     std::set<std::string> overrides = {}) {
  TokenTypeSpec spec;
  spec.name = std::move(name);
  spec.matcher = compile_matcher(pattern);
  spec.pattern = std::move(pattern);
  spec.precedence = precedence;
  spec.overrides = std::move(overrides);
  return spec;
}

struct RhsElement {
  std::string symbol;
  bool optional = false;

  auto operator<=>(const RhsElement&) const = default;
};

struct Production {
  /// Stable identifier. Alternatives read from a spec file are "Lhs.k"; the
  /// variants produced by desugaring are "Lhs.k#m" where m is the bitmask of
  /// omitted optional elements.
  std::string id;
  /// Identifier of the user-level production this one derives from. Constraints
  /// name origins, so they apply to every desugared variant.
  std::string origin;
  std::string lhs;
  std::vector<RhsElement> rhs;

  bool operator==(const Production&) const = default;
};

struct Grammar {
  std::set<std::string> nonterminals;
  std::set<std::string> terminals;
  std::vector<Production> productions;
  std::string start;
  /// Nonterminals whose empty productions were removed.
  std::set<std::string> epsilon_symbols;

  bool operator==(const Grammar&) const = default;

  bool is_terminal(const std::string& s) const { return terminals.count(s) != 0; }
  bool is_nonterminal(const std::string& s) const { return nonterminals.count(s) != 0; }
};

enum class Associativity { left_to_right, right_to_left, non_associative };

inline const char* to_string(Associativity a) {
  switch (a) {
    case Associativity::left_to_right: return "left";
    case Associativity::right_to_left: return "right";
    case Associativity::non_associative: return "non";
  }
  return "?";
}

/// Declarative disambiguation filters, keyed by production origin id.
struct ConstraintSet {
  std::map<std::string, Associativity> associativity;
  /// (winner, loser): the loser is dropped when both build the same children.
  std::vector<std::pair<std::string, std::string>> selection_precedence;
  /// (inhibited, inner): the first may not have a direct child built by the second.
  std::vector<std::pair<std::string, std::string>> composition_precedence;
  /// production origin -> evaluator id
  std::map<std::string, std::string> custom_evaluators;

  bool operator==(const ConstraintSet&) const = default;

  bool empty() const {
    return associativity.empty() && selection_precedence.empty() && composition_precedence.empty() &&
           custom_evaluators.empty();
  }
};

/// Expands each production with k optional elements into its (deduplicated)
/// 2^k variants. Productions without optional elements pass through untouched.
inline std::vector<Production> desugar_optionals(const std::vector<Production>& productions) {
  std::vector<Production> out;
  for (const auto& p : productions) {
    std::vector<std::size_t> optional_at;
    for (std::size_t i = 0; i < p.rhs.size(); ++i)
      if (p.rhs[i].optional) optional_at.push_back(i);
    if (optional_at.empty()) {
      out.push_back(p);
      if (out.back().origin.empty()) out.back().origin = p.id;
      continue;
    }
    if (optional_at.size() >= 20) throw Error("production " + p.id + " has too many optional elements");

    const std::string origin = p.origin.empty() ? p.id : p.origin;
    std::set<std::vector<RhsElement>> seen;
    const std::size_t variants = std::size_t{1} << optional_at.size();
    for (std::size_t mask = 0; mask < variants; ++mask) {
      std::vector<RhsElement> rhs;
      std::size_t k = 0;
      for (std::size_t i = 0; i < p.rhs.size(); ++i) {
        bool omitted = false;
        if (k < optional_at.size() && optional_at[k] == i) {
          omitted = (mask >> k) & 1U;
          ++k;
        }
        if (!omitted) rhs.push_back({p.rhs[i].symbol, false});
      }
      if (!seen.insert(rhs).second) continue;
      out.push_back({p.id + "#" + std::to_string(mask), origin, p.lhs, std::move(rhs)});
    }
  }
  return out;
}

/// Removes empty productions, recording their left-hand sides as epsilon
/// symbols. Only direct empty productions count; indirect nullability is not
/// propagated.
inline Grammar extract_epsilon_symbols(Grammar grammar) {
  std::vector<Production> kept;
  kept.reserve(grammar.productions.size());
  for (auto& p : grammar.productions) {
    if (p.rhs.empty())
      grammar.epsilon_symbols.insert(p.lhs);
    else
      kept.push_back(std::move(p));
  }
  grammar.productions = std::move(kept);
  return grammar;
}

/// desugar_optionals followed by extract_epsilon_symbols.
inline Grammar normalize_grammar(Grammar grammar) {
  grammar.productions = desugar_optionals(grammar.productions);
  return extract_epsilon_symbols(std::move(grammar));
}

namespace detail {

inline Diagnostic make_diag(Severity sev, DiagnosticKind kind, std::string subject, std::string message) {
  Diagnostic d;
  d.severity = sev;
  d.kind = kind;
  d.subject = std::move(subject);
  d.message = std::move(message);
  return d;
}

/// Transitive closure of a relation over strings.
inline std::set<std::pair<std::string, std::string>> transitive_closure(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::set<std::pair<std::string, std::string>> closure(pairs.begin(), pairs.end());
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::pair<std::string, std::string>> added;
    for (const auto& [a, b] : closure)
      for (const auto& [c, d] : closure)
        if (b == c && !closure.count({a, d})) added.push_back({a, d});
    for (auto& p : added) changed |= closure.insert(std::move(p)).second;
  }
  return closure;
}

}  // namespace detail

/// Checks the grammar and constraint invariants. Invariant violations are
/// errors; symbols unreachable from the start symbol are warnings.
inline std::vector<Diagnostic> validate_grammar(const Grammar& grammar, const ConstraintSet& constraints) {
  using detail::make_diag;
  std::vector<Diagnostic> out;

  if (grammar.start.empty()) {
    out.push_back(make_diag(Severity::error, DiagnosticKind::missing_start, "", "no start symbol"));
  } else if (!grammar.is_nonterminal(grammar.start)) {
    out.push_back(make_diag(Severity::error, DiagnosticKind::invariant, grammar.start,
                            "start symbol " + grammar.start + " is not a nonterminal"));
  }
  for (const auto& s : grammar.terminals)
    if (grammar.is_nonterminal(s))
      out.push_back(make_diag(Severity::error, DiagnosticKind::invariant, s,
                              s + " is declared both as a terminal and as a nonterminal"));

  std::set<std::string> ids;
  std::set<std::string> origins;
  for (const auto& p : grammar.productions) {
    if (!ids.insert(p.id).second)
      out.push_back(make_diag(Severity::error, DiagnosticKind::invariant, p.id, "duplicate production id " + p.id));
    origins.insert(p.origin.empty() ? p.id : p.origin);
    if (!grammar.is_nonterminal(p.lhs))
      out.push_back(make_diag(Severity::error, DiagnosticKind::unknown_symbol, p.lhs,
                              "production " + p.id + ": left-hand side " + p.lhs + " is not a nonterminal"));
    if (p.rhs.empty())
      out.push_back(make_diag(Severity::error, DiagnosticKind::invariant, p.id,
                              "production " + p.id + " has an empty right-hand side"));
    for (const auto& e : p.rhs)
      if (!grammar.is_terminal(e.symbol) && !grammar.is_nonterminal(e.symbol))
        out.push_back(make_diag(Severity::error, DiagnosticKind::unknown_symbol, e.symbol,
                                "production " + p.id + " references undeclared symbol " + e.symbol));
  }
  for (const auto& s : grammar.epsilon_symbols)
    if (!grammar.is_nonterminal(s))
      out.push_back(make_diag(Severity::error, DiagnosticKind::invariant, s, "epsilon symbol " + s + " is not a nonterminal"));

  auto known = [&](const std::string& id) { return origins.count(id) != 0 || ids.count(id) != 0; };
  auto check_ref = [&](const std::string& id, const char* what) {
    if (!known(id))
      out.push_back(make_diag(Severity::error, DiagnosticKind::unknown_symbol, id,
                              std::string(what) + " constraint references unknown production " + id));
  };
  for (const auto& [id, assoc] : constraints.associativity) check_ref(id, "associativity");
  for (const auto& [a, b] : constraints.selection_precedence) {
    check_ref(a, "selection precedence");
    check_ref(b, "selection precedence");
    if (a == b)
      out.push_back(make_diag(Severity::error, DiagnosticKind::invariant, a,
                              "selection precedence pair (" + a + ", " + a + ") is reflexive"));
  }
  for (const auto& [a, b] : constraints.composition_precedence) {
    check_ref(a, "composition precedence");
    check_ref(b, "composition precedence");
    if (a == b)
      out.push_back(make_diag(Severity::error, DiagnosticKind::invariant, a,
                              "composition precedence pair (" + a + ", " + a + ") is reflexive"));
  }
  {
    bool direct_reflexive = false;
    for (const auto& [a, b] : constraints.selection_precedence) direct_reflexive |= a == b;
    if (!direct_reflexive)
      for (const auto& [a, b] : detail::transitive_closure(constraints.selection_precedence))
        if (a == b)
          out.push_back(make_diag(Severity::error, DiagnosticKind::invariant, a,
                                  "selection precedence is cyclic through " + a));
  }
  for (const auto& [id, evaluator] : constraints.custom_evaluators) {
    check_ref(id, "custom");
    if (evaluator.empty())
      out.push_back(make_diag(Severity::error, DiagnosticKind::invariant, id, "empty evaluator id for " + id));
  }

  // Reachability from the start symbol.
  if (grammar.is_nonterminal(grammar.start)) {
    std::set<std::string> reached{grammar.start};
    std::vector<std::string> work{grammar.start};
    while (!work.empty()) {
      std::string s = std::move(work.back());
      work.pop_back();
      for (const auto& p : grammar.productions) {
        if (p.lhs != s) continue;
        for (const auto& e : p.rhs)
          if (reached.insert(e.symbol).second) work.push_back(e.symbol);
      }
    }
    for (const auto* set : {&grammar.nonterminals, &grammar.terminals})
      for (const auto& s : *set)
        if (!reached.count(s))
          out.push_back(make_diag(Severity::warning, DiagnosticKind::unreachable, s,
                                  "symbol " + s + " is unreachable from " + grammar.start));
  }
  return out;
}

/// Checks the token-type invariants: unique names, overrides naming declared
/// types only, and no type overriding itself.
inline std::vector<Diagnostic> validate_token_specs(const std::vector<TokenTypeSpec>& specs) {
  using detail::make_diag;
  std::vector<Diagnostic> out;
  std::set<std::string> names;
  for (const auto& s : specs)
    if (!names.insert(s.name).second)
      out.push_back(make_diag(Severity::error, DiagnosticKind::duplicate_token, s.name, "duplicate token type " + s.name));
  for (const auto& s : specs) {
    if (!s.matcher.valid())
      out.push_back(make_diag(Severity::error, DiagnosticKind::invariant, s.name, "token type " + s.name + " has no matcher"));
    for (const auto& o : s.overrides) {
      if (o == s.name)
        out.push_back(make_diag(Severity::error, DiagnosticKind::invariant, s.name, "token type " + s.name + " overrides itself"));
      else if (!names.count(o))
        out.push_back(make_diag(Severity::error, DiagnosticKind::unknown_symbol, o,
                                "token type " + s.name + " overrides undeclared type " + o));
    }
  }
  return out;
}

}  // namespace lambfence
