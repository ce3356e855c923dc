#pragma once

// scan -> ELA graph -> chart parse -> constraint enforcement, with timings.

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lambfence/chart.hpp"
#include "lambfence/enforcer.hpp"
#include "lambfence/scanner.hpp"
#include "lambfence/spec_format.hpp"

namespace lambfence {

struct RunReport {
  std::size_t token_count = 0;
  std::uint64_t path_count = 0;
  std::size_t implicit_node_count = 0;
  std::size_t tree_count = 0;
  std::map<std::string, std::uint64_t> rejected_by_constraint;
  /// Milliseconds per phase: scan, ela, chart, enforce.
  std::map<std::string, double> elapsed_ms;
};

struct PipelineOptions {
  std::optional<ScanPolicy> policy;
  ChartOptions chart;
  ExpandOptions expand;
};

struct PipelineResult {
  LexicalAnalysisGraph la;
  ElaGraph ela;
  std::optional<IGraph> igraph;
  EGraph egraph;
  RunReport report;
};

namespace detail {

class PhaseTimer {
 public:
  explicit PhaseTimer(double& slot) : slot_(slot), begin_(std::chrono::steady_clock::now()) {}
  ~PhaseTimer() {
    slot_ = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - begin_).count();
  }
  PhaseTimer(const PhaseTimer&) = delete;
  PhaseTimer& operator=(const PhaseTimer&) = delete;

 private:
  double& slot_;
  std::chrono::steady_clock::time_point begin_;
};

}  // namespace detail

/// Parses an already-built lexical graph. Throws NoParse, AllTreesRejected or
/// EvaluatorFailure.
inline PipelineResult run_on_graph(LexicalAnalysisGraph la, const Grammar& normalized, const ConstraintSet& constraints,
                                   const EvaluatorRegistry& evaluators = {}, const PipelineOptions& options = {}) {
  PipelineResult r;
  r.la = std::move(la);
  r.report.token_count = r.la.tokens.size();
  r.report.path_count = r.la.path_count();
  {
    detail::PhaseTimer t(r.report.elapsed_ms["ela"]);
    r.ela = build_ela_graph(r.la);
  }
  {
    detail::PhaseTimer t(r.report.elapsed_ms["chart"]);
    r.igraph = chart_parse(r.ela, std::make_shared<const GrammarTables>(normalized), options.chart);
  }
  r.report.implicit_node_count = r.igraph->nodes().size();
  EnforcementStats stats;
  {
    detail::PhaseTimer t(r.report.elapsed_ms["enforce"]);
    r.egraph = expand(*r.igraph, constraints, evaluators, options.expand, &stats);
  }
  r.report.rejected_by_constraint = stats.rejected_by;
  r.report.tree_count = r.egraph.tree_count();
  return r;
}

/// Full pipeline from input text. Throws UnscannableRegion, NoParse,
/// AllTreesRejected or EvaluatorFailure.
inline PipelineResult run_pipeline(const LanguageSpec& spec, std::string_view input, const Registry& registry = {},
                                   const PipelineOptions& options = {}) {
  ScanConfig config = spec.scan_config;
  if (options.policy) config.policy = *options.policy;
  double scan_ms = 0;
  LexicalAnalysisGraph la;
  {
    detail::PhaseTimer t(scan_ms);
    la = build_lexical_graph(input, spec.token_specs, config);
  }
  auto r = run_on_graph(std::move(la), spec.normalized_grammar(), spec.constraints, registry.evaluators, options);
  r.report.elapsed_ms["scan"] = scan_ms;
  return r;
}

/// A single-path lexical graph over the given token types; token i spans
/// [i, i + 1) and its text is the type name.
inline LexicalAnalysisGraph make_linear_graph(const std::vector<std::string>& types) {
  std::vector<Token> tokens;
  for (std::size_t i = 0; i < types.size(); ++i) tokens.push_back({types[i], i, i + 1, types[i]});
  return compute_adjacency(std::move(tokens));
}

}  // namespace lambfence
