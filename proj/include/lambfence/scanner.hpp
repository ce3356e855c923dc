#pragma once

// Lamb: the ambiguity-preserving scanner.
//
// Scanning emits every token any type can produce under the chosen policy;
// graph generation then links each token to the tokens that may follow it.
// Spans are half-open [start, end) byte ranges.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "lambfence/error.hpp"
#include "lambfence/language_model.hpp"
#include "lambfence/regex.hpp"

namespace lambfence {

struct Token {
  std::string type;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;

  // Identity is (type, start, end); the text follows from the span.
  friend bool operator==(const Token& a, const Token& b) {
    return a.start == b.start && a.end == b.end && a.type == b.type;
  }
  friend bool operator<(const Token& a, const Token& b) {
    return std::tie(a.start, a.end, a.type) < std::tie(b.start, b.end, b.type);
  }
};

enum class ScanPolicy { greedy, exploratory };

inline const char* to_string(ScanPolicy p) { return p == ScanPolicy::greedy ? "greedy" : "exploratory"; }

inline const std::string& default_ignore_pattern() {
  static const std::string pattern = "[ \\t\\r\\n]+";
  return pattern;
}

struct ScanConfig {
  ScanPolicy policy = ScanPolicy::greedy;
  /// Gap filler between tokens; nullopt means every character must belong to a token.
  std::optional<std::string> ignore_pattern = default_ignore_pattern();

  bool operator==(const ScanConfig&) const = default;
};

/// Tokens plus FOLLOWING/PRECEDING adjacency. Tokens are sorted by (start, end, type)
/// and adjacency lists hold indices into `tokens`.
struct LexicalAnalysisGraph {
  std::vector<Token> tokens;
  std::vector<std::vector<std::size_t>> following;
  std::vector<std::vector<std::size_t>> preceding;
  std::vector<std::size_t> start_tokens;

  bool empty() const noexcept { return tokens.empty(); }

  std::vector<std::size_t> end_tokens() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < tokens.size(); ++i)
      if (following[i].empty()) out.push_back(i);
    return out;
  }

  std::size_t edge_count() const {
    std::size_t n = 0;
    for (const auto& f : following) n += f.size();
    return n;
  }

  /// Number of start-to-end token paths, saturating at UINT64_MAX.
  std::uint64_t path_count() const {
    constexpr auto cap = std::numeric_limits<std::uint64_t>::max();
    // Edges always point to later start positions, so reverse index order is topological.
    std::vector<std::uint64_t> paths(tokens.size(), 0);
    for (std::size_t i = tokens.size(); i-- > 0;) {
      if (following[i].empty()) {
        paths[i] = 1;
        continue;
      }
      std::uint64_t sum = 0;
      for (auto j : following[i]) sum = (cap - sum < paths[j]) ? cap : sum + paths[j];
      paths[i] = sum;
    }
    std::uint64_t total = 0;
    for (auto s : start_tokens) total = (cap - total < paths[s]) ? cap : total + paths[s];
    return total;
  }
};

namespace detail {

inline std::string excerpt_at(std::string_view input, std::size_t pos) {
  std::size_t line_start = input.rfind('\n', pos == 0 ? 0 : pos - 1);
  line_start = (line_start == std::string_view::npos || pos == 0) ? 0 : line_start + 1;
  if (pos < input.size() && input[pos] == '\n') line_start = pos;
  std::size_t line_end = input.find('\n', pos);
  if (line_end == std::string_view::npos) line_end = input.size();
  std::size_t from = std::max(line_start, pos >= 20 ? pos - 20 : std::size_t{0});
  std::size_t to = std::min(line_end, pos + 20);
  return std::string(input.substr(from, to - from));
}

// Precedence tiers in descending order; ties keep declaration order.
inline std::vector<std::vector<std::size_t>> precedence_tiers(const std::vector<TokenTypeSpec>& specs) {
  std::vector<std::size_t> order(specs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return specs[a].precedence > specs[b].precedence; });
  std::vector<std::vector<std::size_t>> tiers;
  for (std::size_t i : order) {
    if (tiers.empty() || specs[tiers.back().front()].precedence != specs[i].precedence) tiers.emplace_back();
    tiers.back().push_back(i);
  }
  return tiers;
}

// Resolves every override name to a type index; unknown names are ignored here
// (validate_token_specs reports them).
inline std::vector<std::vector<std::size_t>> override_indices(const std::vector<TokenTypeSpec>& specs) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < specs.size(); ++i) index.emplace(specs[i].name, i);
  std::vector<std::vector<std::size_t>> out(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i)
    for (const auto& o : specs[i].overrides)
      if (auto it = index.find(o); it != index.end()) out[i].push_back(it->second);
  return out;
}

// Per-position forbidden token lists.
class ForbiddenLists {
 public:
  ForbiddenLists(std::size_t positions, std::size_t types) : types_(types), bits_(positions * types, 0) {}

  bool forbidden(std::size_t pos, std::size_t type) const { return bits_[pos * types_ + type] != 0; }

  void forbid(std::size_t from, std::size_t to, const std::vector<std::size_t>& types) {
    for (std::size_t p = from; p < to; ++p)
      for (auto t : types) bits_[p * types_ + t] = 1;
  }

 private:
  std::size_t types_;
  std::vector<std::uint8_t> bits_;
};

struct PendingOverride {
  std::size_t start, end, type;
};

inline std::optional<Matcher> ignore_matcher(const ScanConfig& config) {
  if (!config.ignore_pattern || config.ignore_pattern->empty()) return std::nullopt;
  return compile_matcher(*config.ignore_pattern);
}

inline std::vector<Token> sorted_unique(std::vector<Token> tokens) {
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return tokens;
}

}  // namespace detail

/// Greedy policy: only MATCH positions start tokens, and each type emits its
/// single longest match there. Position 0 starts in MATCH; the position after
/// each token or ignored gap becomes MATCH.
inline std::vector<Token> scan_greedy(std::string_view input, const std::vector<TokenTypeSpec>& specs,
                                      const ScanConfig& config) {
  const std::size_t n = input.size();
  const auto tiers = detail::precedence_tiers(specs);
  const auto overrides = detail::override_indices(specs);
  const auto ignore = detail::ignore_matcher(config);
  detail::ForbiddenLists forbidden(n, specs.size());
  std::vector<bool> match(n + 1, false);
  if (n > 0) match[0] = true;

  std::vector<Token> tokens;
  std::vector<detail::PendingOverride> pending;
  for (std::size_t pos = 0; pos < n; ++pos) {
    if (!match[pos]) continue;
    bool consumed = false;
    for (const auto& tier : tiers) {
      pending.clear();
      for (std::size_t t : tier) {
        if (forbidden.forbidden(pos, t)) continue;
        auto len = specs[t].matcher.longest(input, pos);
        if (!len) continue;
        consumed = true;
        tokens.push_back({specs[t].name, pos, pos + *len, std::string(input.substr(pos, *len))});
        match[pos + *len] = true;
        pending.push_back({pos, pos + *len, t});
      }
      // Same-tier overrides take effect only once the tier has finished.
      for (const auto& p : pending) forbidden.forbid(p.start, p.end, overrides[p.type]);
    }
    if (ignore) {
      if (auto len = ignore->longest(input, pos)) {
        consumed = true;
        match[pos + *len] = true;
      }
    }
    if (!consumed) throw UnscannableRegion(pos, detail::excerpt_at(input, pos));
  }
  return detail::sorted_unique(std::move(tokens));
}

/// Exploratory policy: every position may start a token and each type emits
/// every match length. Tiers run one after another over the whole input.
inline std::vector<Token> scan_exploratory(std::string_view input, const std::vector<TokenTypeSpec>& specs,
                                           const ScanConfig& config) {
  const std::size_t n = input.size();
  const auto tiers = detail::precedence_tiers(specs);
  const auto overrides = detail::override_indices(specs);
  const auto ignore = detail::ignore_matcher(config);
  detail::ForbiddenLists forbidden(n, specs.size());
  // reach[p] = furthest end of any token or ignored gap starting at p.
  std::vector<std::size_t> reach(n + 1, 0);

  std::vector<Token> tokens;
  std::vector<detail::PendingOverride> pending;
  for (const auto& tier : tiers) {
    pending.clear();
    for (std::size_t t : tier) {
      for (std::size_t pos = 0; pos < n; ++pos) {
        if (forbidden.forbidden(pos, t)) continue;
        std::size_t longest = 0;
        for (auto len : specs[t].matcher.all_lengths(input, pos)) {
          tokens.push_back({specs[t].name, pos, pos + len, std::string(input.substr(pos, len))});
          longest = len;
        }
        if (longest != 0) {
          reach[pos] = std::max(reach[pos], pos + longest);
          pending.push_back({pos, pos + longest, t});
        }
      }
    }
    for (const auto& p : pending) forbidden.forbid(p.start, p.end, overrides[p.type]);
  }
  if (ignore)
    for (std::size_t pos = 0; pos < n; ++pos)
      if (auto len = ignore->longest(input, pos)) reach[pos] = std::max(reach[pos], pos + *len);

  std::size_t covered = 0;
  for (std::size_t pos = 0; pos < n; ++pos) {
    covered = std::max(covered, reach[pos]);
    if (covered <= pos) throw UnscannableRegion(pos, detail::excerpt_at(input, pos));
  }
  return detail::sorted_unique(std::move(tokens));
}

inline std::vector<Token> scan(std::string_view input, const std::vector<TokenTypeSpec>& specs,
                               const ScanConfig& config) {
  return config.policy == ScanPolicy::greedy ? scan_greedy(input, specs, config)
                                             : scan_exploratory(input, specs, config);
}

/// Links tokens by the adjacency rule: b follows a iff a.end <= b.start and no
/// third token lies entirely within [a.end, b.start].
inline LexicalAnalysisGraph compute_adjacency(std::vector<Token> tokens) {
  LexicalAnalysisGraph g;
  g.tokens = detail::sorted_unique(std::move(tokens));
  const auto& ts = g.tokens;
  const std::size_t t = ts.size();
  g.following.assign(t, {});
  g.preceding.assign(t, {});

  // min_end[i] = smallest end among tokens[i..]; tokens are sorted by start.
  std::vector<std::size_t> min_end(t + 1, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = t; i-- > 0;) min_end[i] = std::min(min_end[i + 1], ts[i].end);

  for (std::size_t a = 0; a < t; ++a) {
    auto first = std::lower_bound(ts.begin(), ts.end(), ts[a].end,
                                  [](const Token& tok, std::size_t pos) { return tok.start < pos; });
    auto i = static_cast<std::size_t>(first - ts.begin());
    // Any candidate starting at or beyond this bound has a token wedged in front of it.
    const std::size_t bound = min_end[i];
    for (std::size_t b = i; b < t && ts[b].start < bound; ++b) {
      g.following[a].push_back(b);
      g.preceding[b].push_back(a);
    }
  }
  for (std::size_t b = 0; b < t; ++b)
    if (g.preceding[b].empty()) g.start_tokens.push_back(b);
  return g;
}

/// Scans with the configured policy, drops tokens rejected by their type's
/// validator, and links the survivors.
inline LexicalAnalysisGraph build_lexical_graph(std::string_view input, const std::vector<TokenTypeSpec>& specs,
                                                const ScanConfig& config) {
  auto tokens = scan(input, specs, config);
  std::map<std::string, const TokenValidator*> validators;
  for (const auto& s : specs)
    if (s.validator) validators.emplace(s.name, &s.validator);
  if (!validators.empty()) {
    std::erase_if(tokens, [&](const Token& tok) {
      auto it = validators.find(tok.type);
      return it != validators.end() && !(*it->second)(tok);
    });
  }
  return compute_adjacency(std::move(tokens));
}

}  // namespace lambfence
