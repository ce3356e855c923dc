#pragma once

// DOT and JSON renderings of the three graphs. Output is deterministic: nodes
// are emitted by span, then symbol.

#include <algorithm>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "lambfence/chart.hpp"
#include "lambfence/enforcer.hpp"
#include "lambfence/scanner.hpp"

namespace lambfence {

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string token_label(const Token& t) {
  return dot_escape(t.type + " \"" + t.text + "\" [" + std::to_string(t.start) + "," + std::to_string(t.end) + ")");
}

inline nlohmann::json token_json(const Token& t) {
  return {{"type", t.type}, {"start", t.start}, {"end", t.end}, {"text", t.text}};
}

}  // namespace detail

inline std::string export_dot(const LexicalAnalysisGraph& g) {
  std::ostringstream out;
  out << "digraph la {\n";
  if (!g.tokens.empty()) out << "  rankdir=LR;\n  node [shape=ellipse];\n";
  for (std::size_t i = 0; i < g.tokens.size(); ++i)
    out << "  t" << i << " [label=\"" << detail::token_label(g.tokens[i]) << "\"];\n";
  for (std::size_t i = 0; i < g.tokens.size(); ++i)
    for (auto j : g.following[i]) out << "  t" << i << " -> t" << j << ";\n";
  out << "}\n";
  return out.str();
}

inline std::string export_dot(const ElaGraph& g) {
  std::ostringstream out;
  out << "digraph ela {\n";
  if (!g.tokens.empty()) out << "  rankdir=LR;\n";
  for (std::size_t c = 0; c < g.cores.size(); ++c) {
    std::string label = c == g.starting_core ? "start" : c == g.final_core ? "final" : "core " + std::to_string(c);
    out << "  c" << c << " [shape=box, label=\"" << label << "\"];\n";
  }
  for (std::size_t i = 0; i < g.tokens.size(); ++i)
    out << "  t" << i << " [shape=ellipse, label=\"" << detail::token_label(g.tokens[i]) << "\"];\n";
  for (std::size_t i = 0; i < g.tokens.size(); ++i) {
    out << "  c" << g.token_preceding_core[i] << " -> t" << i << ";\n";
    for (auto c : g.token_following_cores[i]) out << "  t" << i << " -> c" << c << ";\n";
  }
  out << "}\n";
  return out.str();
}

namespace detail {

inline std::vector<std::uint32_t> egraph_order(const EGraph& g) {
  std::vector<std::uint32_t> ids = g.reachable();
  std::stable_sort(ids.begin(), ids.end(), [&](std::uint32_t a, std::uint32_t b) {
    const auto& x = g.node(a);
    const auto& y = g.node(b);
    return std::tie(x.start, x.end, g.symbol_name(x)) < std::tie(y.start, y.end, g.symbol_name(y));
  });
  return ids;
}

}  // namespace detail

/// Explicit forest reachable from the roots. Shared subtrees appear once.
inline std::string export_dot(const EGraph& g) {
  std::ostringstream out;
  out << "digraph forest {\n";
  auto ids = detail::egraph_order(g);
  std::vector<bool> root(g.nodes().size(), false);
  for (auto r : g.starting_nodes()) root[r] = true;
  for (auto id : ids) {
    const auto& n = g.node(id);
    out << "  n" << id << " [";
    if (n.is_token()) {
      out << "shape=ellipse, label=\"" << detail::token_label(g.tokens()[static_cast<std::size_t>(n.token)]) << "\"";
    } else {
      out << "shape=box, label=\""
          << detail::dot_escape(g.symbol_name(n) + " [" + std::to_string(n.start) + "," + std::to_string(n.end) +
                                ")\\n" + g.production_id(n))
          << "\"";
      if (root[id]) out << ", peripheries=2";
    }
    out << "];\n";
  }
  for (auto id : ids) {
    const auto& n = g.node(id);
    for (std::size_t i = 0; i < n.children.size(); ++i)
      out << "  n" << id << " -> n" << n.children[i] << " [label=\"" << i << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

inline nlohmann::json to_json(const LexicalAnalysisGraph& g) {
  nlohmann::json tokens = nlohmann::json::array();
  for (std::size_t i = 0; i < g.tokens.size(); ++i) {
    auto t = detail::token_json(g.tokens[i]);
    t["id"] = i;
    t["following"] = g.following[i];
    tokens.push_back(std::move(t));
  }
  return {{"tokens", std::move(tokens)},
          {"start_tokens", g.start_tokens},
          {"end_tokens", g.end_tokens()},
          {"summary", {{"token_count", g.tokens.size()}, {"edge_count", g.edge_count()}, {"path_count", g.path_count()}}}};
}

inline nlohmann::json to_json(const ElaGraph& g) {
  nlohmann::json cores = nlohmann::json::array();
  for (std::size_t c = 0; c < g.cores.size(); ++c)
    cores.push_back({{"id", c},
                     {"positions", g.cores[c].positions},
                     {"preceding_tokens", g.cores[c].preceding_tokens},
                     {"following_tokens", g.cores[c].following_tokens}});
  nlohmann::json tokens = nlohmann::json::array();
  for (const auto& t : g.tokens) tokens.push_back(detail::token_json(t));
  return {{"tokens", std::move(tokens)},
          {"cores", std::move(cores)},
          {"starting_core", g.starting_core},
          {"final_core", g.final_core}};
}

/// Node table plus roots; children refer to node ids so sharing is visible.
inline nlohmann::json to_json(const EGraph& g) {
  nlohmann::json nodes = nlohmann::json::array();
  for (auto id : detail::egraph_order(g)) {
    const auto& n = g.node(id);
    nlohmann::json j = {{"id", id}, {"symbol", g.symbol_name(n)}, {"span", {n.start, n.end}}};
    if (n.is_token()) {
      j["token"] = detail::token_json(g.tokens()[static_cast<std::size_t>(n.token)]);
    } else {
      j["production"] = g.production_id(n);
      j["origin"] = g.production_origin(n);
      j["children"] = n.children;
    }
    nodes.push_back(std::move(j));
  }
  return {{"nodes", std::move(nodes)}, {"roots", g.starting_nodes()}, {"tree_count", g.tree_count()}};
}

}  // namespace lambfence
