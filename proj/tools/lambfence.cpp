// lambfence scan|parse <spec> <input> [--format dot|json] [--policy greedy|exploratory]
//                                    [--count-trees] [--report]
// Exit codes: 0 ok, 1 spec error, 2 scan error, 3 no valid tree.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "lambfence/lambfence.hpp"

namespace {

enum Exit { kOk = 0, kSpecError = 1, kScanError = 2, kNoTree = 3 };

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

nlohmann::json report_json(const lambfence::RunReport& r) {
  return {{"token_count", r.token_count},
          {"path_count", r.path_count},
          {"implicit_node_count", r.implicit_node_count},
          {"tree_count", r.tree_count},
          {"rejected_by_constraint", r.rejected_by_constraint},
          {"elapsed_ms", r.elapsed_ms}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lexical and syntactic analysis with ambiguity-tolerant scanning and constraint-based disambiguation"};
  app.require_subcommand(1);

  std::string spec_path, input_path, format = "json", policy;
  bool count_trees = false, report = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("spec", spec_path, "language spec file")->required();
    cmd->add_option("input", input_path, "input text file")->required();
    cmd->add_option("--format", format, "output format")->check(CLI::IsMember({"dot", "json"}));
    cmd->add_option("--policy", policy, "override the spec's scan policy")
        ->check(CLI::IsMember({"greedy", "exploratory"}));
    cmd->add_flag("--report", report, "print the run report on stderr");
  };
  auto* scan_cmd = app.add_subcommand("scan", "print the lexical analysis graph");
  add_common(scan_cmd);
  auto* parse_cmd = app.add_subcommand("parse", "print the constrained parse forest");
  add_common(parse_cmd);
  parse_cmd->add_flag("--count-trees", count_trees, "print only the number of trees");

  CLI11_PARSE(app, argc, argv);

  std::string spec_text, input;
  if (!read_file(spec_path, spec_text)) {
    std::cerr << "cannot read spec file " << spec_path << "\n";
    return kSpecError;
  }
  if (!read_file(input_path, input)) {
    std::cerr << "cannot read input file " << input_path << "\n";
    return kSpecError;
  }

  auto parsed = lambfence::parse_language_spec(spec_text);
  for (const auto& d : parsed.diagnostics) std::cerr << spec_path << ":" << d.to_string() << "\n";
  if (!parsed.ok()) return kSpecError;
  const lambfence::LanguageSpec& spec = *parsed.spec;

  lambfence::PipelineOptions options;
  if (policy == "greedy") options.policy = lambfence::ScanPolicy::greedy;
  if (policy == "exploratory") options.policy = lambfence::ScanPolicy::exploratory;

  try {
    if (scan_cmd->parsed()) {
      auto config = spec.scan_config;
      if (options.policy) config.policy = *options.policy;
      auto la = lambfence::build_lexical_graph(input, spec.token_specs, config);
      if (format == "dot")
        std::cout << lambfence::export_dot(la);
      else
        std::cout << lambfence::to_json(la).dump(2) << "\n";
      if (report)
        std::cerr << nlohmann::json{{"token_count", la.tokens.size()}, {"path_count", la.path_count()}}.dump(2) << "\n";
      return kOk;
    }

    auto result = lambfence::run_pipeline(spec, input, {}, options);
    if (count_trees) {
      std::cout << result.report.tree_count << "\n";
    } else if (format == "dot") {
      std::cout << lambfence::export_dot(result.egraph);
    } else {
      auto j = lambfence::to_json(result.egraph);
      j["report"] = report_json(result.report);
      std::cout << j.dump(2) << "\n";
    }
    if (report) std::cerr << report_json(result.report).dump(2) << "\n";
    return kOk;
  } catch (const lambfence::UnscannableRegion& e) {
    std::cerr << "scan error: " << e.what() << "\n";
    return kScanError;
  } catch (const lambfence::NoParse& e) {
    std::cerr << "no parse: " << e.what() << "\n";
    return kNoTree;
  } catch (const lambfence::AllTreesRejected& e) {
    std::cerr << "all trees rejected: " << e.what() << "\n";
    return kNoTree;
  } catch (const lambfence::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSpecError;
  }
}
