#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lambfence {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A regular expression outside the supported subset.
class BadPattern : public Error {
 public:
  BadPattern(std::string pattern, std::size_t position, const std::string& what)
      : Error("bad pattern /" + pattern + "/ at " + std::to_string(position) + ": " + what),
        pattern_(std::move(pattern)),
        position_(position) {}

  const std::string& pattern() const noexcept { return pattern_; }
  std::size_t position() const noexcept { return position_; }

 private:
  std::string pattern_;
  std::size_t position_;
};

/// The scanner reached a position that no token type and no ignore pattern can consume.
class UnscannableRegion : public Error {
 public:
  UnscannableRegion(std::size_t position, std::string excerpt)
      : Error("unscannable input at position " + std::to_string(position) + ": \"" + excerpt + "\""),
        position_(position),
        excerpt_(std::move(excerpt)) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& excerpt() const noexcept { return excerpt_; }

 private:
  std::size_t position_;
  std::string excerpt_;
};

/// Chart parsing finished without a node spanning the whole input with the start symbol.
class NoParse : public Error {
 public:
  explicit NoParse(std::vector<std::string> maximal_nodes)
      : Error(make_message(maximal_nodes)), maximal_nodes_(std::move(maximal_nodes)) {}

  /// Nodes with the widest span found, rendered as "Symbol[start,end)".
  const std::vector<std::string>& maximal_nodes() const noexcept { return maximal_nodes_; }

 private:
  static std::string make_message(const std::vector<std::string>& nodes) {
    std::string msg = "no parse";
    if (!nodes.empty()) {
      msg += "; widest nodes:";
      for (const auto& n : nodes) msg += " " + n;
    }
    return msg;
  }

  std::vector<std::string> maximal_nodes_;
};

/// Starting nodes existed but constraint enforcement discarded every tree.
class AllTreesRejected : public Error {
 public:
  explicit AllTreesRejected(std::vector<std::string> reasons)
      : Error(make_message(reasons)), reasons_(std::move(reasons)) {}

  const std::vector<std::string>& reasons() const noexcept { return reasons_; }

 private:
  static std::string make_message(const std::vector<std::string>& reasons) {
    std::string msg = "all parse trees rejected";
    for (const auto& r : reasons) msg += "\n  " + r;
    return msg;
  }

  std::vector<std::string> reasons_;
};

/// A custom evaluator raised an error (or is not registered).
class EvaluatorFailure : public Error {
 public:
  EvaluatorFailure(std::string production, const std::string& what)
      : Error("evaluator for " + production + " failed: " + what), production_(std::move(production)) {}

  const std::string& production() const noexcept { return production_; }

 private:
  std::string production_;
};

/// Chart parsing ran past its deadline, or enforcement past its candidate budget.
class ParseAborted : public Error {
 public:
  using Error::Error;
};

enum class Severity { warning, error };

enum class DiagnosticKind {
  syntax_error,
  unknown_symbol,
  duplicate_token,
  bad_pattern,
  invariant,
  unreachable,
  missing_start,
};

/// Errors reported as data by validation and by the spec-file frontend.
struct Diagnostic {
  Severity severity = Severity::error;
  DiagnosticKind kind = DiagnosticKind::invariant;
  std::string message;
  std::size_t line = 0;    // 1-based; 0 when not tied to a file
  std::size_t column = 0;  // 1-based
  std::string subject;     // symbol or production id involved, if any

  std::string to_string() const {
    std::string out;
    if (line != 0) out += std::to_string(line) + ":" + std::to_string(column) + ": ";
    out += severity == Severity::error ? "error: " : "warning: ";
    out += message;
    return out;
  }
};

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags)
    if (d.severity == Severity::error) return true;
  return false;
}

}  // namespace lambfence
