#pragma once

// Reader and writer for the declarative language-spec file format:
//
//   %policy greedy|exploratory
//   %ignore /regex/ | none
//   %tokens
//   Name /regex/ [prec=N] [overrides=A,B] [validator=id]
//   Name @matcher-id ...
//   %start Symbol
//   %productions
//   Lhs ::= A [B] C | D ;
//   %constraints
//   assoc Lhs.0 left|right|non ;
//   prefer Lhs.0 over Lhs.1 ;
//   compose Lhs.1 over Lhs.0 ;
//   custom Lhs.0 evaluator-id ;
//
// '#' starts a comment outside regex literals.

#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lambfence/enforcer.hpp"
#include "lambfence/error.hpp"
#include "lambfence/language_model.hpp"
#include "lambfence/regex.hpp"
#include "lambfence/scanner.hpp"

namespace lambfence {

/// Named host-language hooks a spec file may refer to.
struct Registry {
  std::map<std::string, CustomMatchFn> matchers;
  std::map<std::string, TokenValidator> validators;
  EvaluatorRegistry evaluators;
};

struct LanguageSpec {
  std::vector<TokenTypeSpec> token_specs;
  /// As written: alternatives split, optionals and empty alternatives kept.
  Grammar grammar;
  ConstraintSet constraints;
  ScanConfig scan_config;

  bool operator==(const LanguageSpec&) const = default;

  Grammar normalized_grammar() const { return normalize_grammar(grammar); }
};

struct SpecParseResult {
  std::optional<LanguageSpec> spec;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return spec.has_value(); }
  std::string error_text() const {
    std::string out;
    for (const auto& d : diagnostics) out += d.to_string() + "\n";
    return out;
  }
};

namespace detail {

struct Lexeme {
  enum class Kind { word, directive, regex, matcher_ref, symbol, newline, end };
  Kind kind = Kind::end;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

inline bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-' || c == '+';
}

class SpecLexer {
 public:
  explicit SpecLexer(std::string_view text) : text_(text) {}

  std::vector<Lexeme> run(std::vector<Diagnostic>& diags) {
    std::vector<Lexeme> out;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        out.push_back(make(Lexeme::Kind::newline, "\n"));
        advance();
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
        continue;
      }
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
        continue;
      }
      if (c == '/') {
        Lexeme l = make(Lexeme::Kind::regex, "");
        advance();
        bool in_class = false;
        bool closed = false;
        while (pos_ < text_.size() && text_[pos_] != '\n') {
          char d = text_[pos_];
          if (d == '\\' && pos_ + 1 < text_.size() && text_[pos_ + 1] != '\n') {
            l.text += d;
            advance();
            l.text += text_[pos_];
            advance();
            continue;
          }
          if (d == '[') in_class = true;
          if (d == ']') in_class = false;
          if (d == '/' && !in_class) {
            closed = true;
            advance();
            break;
          }
          l.text += d;
          advance();
        }
        if (!closed) {
          diags.push_back(at(l, DiagnosticKind::syntax_error, "unterminated regex literal"));
          continue;
        }
        out.push_back(std::move(l));
        continue;
      }
      if (c == '%' || c == '@') {
        Lexeme l = make(c == '%' ? Lexeme::Kind::directive : Lexeme::Kind::matcher_ref, "");
        advance();
        while (pos_ < text_.size() && is_word_char(text_[pos_])) {
          l.text += text_[pos_];
          advance();
        }
        if (l.text.empty()) diags.push_back(at(l, DiagnosticKind::syntax_error, std::string("expected a name after '") + c + "'"));
        out.push_back(std::move(l));
        continue;
      }
      if (text_.substr(pos_, 3) == "::=") {
        out.push_back(make(Lexeme::Kind::symbol, "::="));
        for (int i = 0; i < 3; ++i) advance();
        continue;
      }
      if (c == '|' || c == '[' || c == ']' || c == ';' || c == '=' || c == ',') {
        out.push_back(make(Lexeme::Kind::symbol, std::string(1, c)));
        advance();
        continue;
      }
      if (is_word_char(c)) {
        Lexeme l = make(Lexeme::Kind::word, "");
        while (pos_ < text_.size() && is_word_char(text_[pos_])) {
          l.text += text_[pos_];
          advance();
        }
        out.push_back(std::move(l));
        continue;
      }
      Lexeme bad = make(Lexeme::Kind::symbol, std::string(1, c));
      diags.push_back(at(bad, DiagnosticKind::syntax_error, std::string("unexpected character '") + c + "'"));
      advance();
    }
    out.push_back(make(Lexeme::Kind::end, ""));
    return out;
  }

  static Diagnostic at(const Lexeme& l, DiagnosticKind kind, std::string message, std::string subject = {}) {
    Diagnostic d;
    d.kind = kind;
    d.message = std::move(message);
    d.line = l.line;
    d.column = l.column;
    d.subject = std::move(subject);
    return d;
  }

 private:
  Lexeme make(Lexeme::Kind k, std::string text) const { return Lexeme{k, std::move(text), line_, column_}; }
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

class SpecParser {
 public:
  SpecParser(std::vector<Lexeme> lexemes, const Registry& registry, std::vector<Diagnostic>& diags)
      : lx_(std::move(lexemes)), registry_(registry), diags_(diags) {}

  LanguageSpec run() {
    enum class Section { none, tokens, productions, constraints } section = Section::none;
    while (peek().kind != Lexeme::Kind::end) {
      const Lexeme& l = peek();
      if (l.kind == Lexeme::Kind::newline) {
        ++i_;
        continue;
      }
      if (l.kind == Lexeme::Kind::directive) {
        Lexeme d = take();
        if (d.text == "tokens") {
          section = Section::tokens;
        } else if (d.text == "productions") {
          section = Section::productions;
        } else if (d.text == "constraints") {
          section = Section::constraints;
        } else if (d.text == "policy") {
          parse_policy(d);
        } else if (d.text == "ignore") {
          parse_ignore(d);
        } else if (d.text == "start") {
          parse_start(d);
        } else {
          error(d, DiagnosticKind::syntax_error, "unknown directive %" + d.text);
          skip_line();
        }
        continue;
      }
      switch (section) {
        case Section::tokens: parse_token_line(); break;
        case Section::productions: parse_production(); break;
        case Section::constraints: parse_constraint(); break;
        case Section::none:
          error(l, DiagnosticKind::syntax_error, "statement outside any section");
          skip_line();
          break;
      }
    }
    if (spec_.grammar.start.empty()) {
      Diagnostic d;
      d.kind = DiagnosticKind::missing_start;
      d.message = "missing %start";
      diags_.push_back(std::move(d));
    } else {
      locate(spec_.grammar.start, start_lexeme_);
    }
    return std::move(spec_);
  }

  const std::map<std::string, Lexeme>& locations() const { return where_; }

 private:
  const Lexeme& peek() const { return lx_[i_]; }
  Lexeme take() { return lx_[i_ < lx_.size() - 1 ? i_++ : i_]; }
  bool at_line_end() const {
    auto k = peek().kind;
    return k == Lexeme::Kind::newline || k == Lexeme::Kind::end;
  }
  void skip_line() {
    while (!at_line_end()) ++i_;
  }
  void skip_statement() {
    while (peek().kind != Lexeme::Kind::end && peek().kind != Lexeme::Kind::directive && !is_symbol(";")) ++i_;
    if (is_symbol(";")) ++i_;
  }
  bool is_symbol(std::string_view s) const { return peek().kind == Lexeme::Kind::symbol && peek().text == s; }
  void skip_newlines() {
    while (peek().kind == Lexeme::Kind::newline) ++i_;
  }
  void error(const Lexeme& l, DiagnosticKind kind, std::string message, std::string subject = {}) {
    diags_.push_back(SpecLexer::at(l, kind, std::move(message), std::move(subject)));
  }
  void locate(const std::string& name, const Lexeme& l) { where_.try_emplace(name, l); }

  std::optional<Lexeme> expect_word(const char* what) {
    if (peek().kind != Lexeme::Kind::word) {
      error(peek(), DiagnosticKind::syntax_error, std::string("expected ") + what);
      return std::nullopt;
    }
    return take();
  }

  void parse_policy(const Lexeme& d) {
    auto w = expect_word("greedy or exploratory");
    if (w && w->text == "greedy") {
      spec_.scan_config.policy = ScanPolicy::greedy;
    } else if (w && w->text == "exploratory") {
      spec_.scan_config.policy = ScanPolicy::exploratory;
    } else if (w) {
      error(*w, DiagnosticKind::syntax_error, "unknown policy " + w->text);
    }
    (void)d;
    finish_line();
  }

  void parse_ignore(const Lexeme&) {
    if (peek().kind == Lexeme::Kind::regex) {
      Lexeme r = take();
      if (check_pattern(r)) spec_.scan_config.ignore_pattern = r.text;
    } else if (peek().kind == Lexeme::Kind::word && peek().text == "none") {
      take();
      spec_.scan_config.ignore_pattern = std::nullopt;
    } else {
      error(peek(), DiagnosticKind::syntax_error, "expected /regex/ or none after %ignore");
    }
    finish_line();
  }

  void parse_start(const Lexeme& d) {
    if (auto w = expect_word("start symbol")) {
      if (!spec_.grammar.start.empty()) error(*w, DiagnosticKind::syntax_error, "%start given twice");
      spec_.grammar.start = w->text;
      start_lexeme_ = *w;
    }
    (void)d;
    finish_line();
  }

  void finish_line() {
    if (!at_line_end()) {
      error(peek(), DiagnosticKind::syntax_error, "unexpected '" + peek().text + "'");
      skip_line();
    }
  }

  bool check_pattern(const Lexeme& r) {
    try {
      compile_matcher(r.text);
      return true;
    } catch (const BadPattern& e) {
      Lexeme at = r;
      at.column += 1 + e.position();
      error(at, DiagnosticKind::bad_pattern, e.what(), r.text);
      return false;
    }
  }

  void parse_token_line() {
    auto name = expect_word("token name");
    if (!name) {
      skip_line();
      return;
    }
    TokenTypeSpec spec;
    spec.name = name->text;
    locate(spec.name, *name);
    if (peek().kind == Lexeme::Kind::regex) {
      Lexeme r = take();
      spec.pattern = r.text;
      if (check_pattern(r)) spec.matcher = compile_matcher(r.text);
    } else if (peek().kind == Lexeme::Kind::matcher_ref) {
      Lexeme m = take();
      spec.pattern = "@" + m.text;
      auto it = registry_.matchers.find(m.text);
      if (it == registry_.matchers.end())
        error(m, DiagnosticKind::unknown_symbol, "no custom matcher registered as " + m.text, m.text);
      else
        spec.matcher = Matcher(it->second);
    } else {
      error(peek(), DiagnosticKind::syntax_error, "expected /regex/ or @matcher for token " + spec.name);
      skip_line();
      return;
    }
    while (!at_line_end()) {
      auto key = expect_word("prec=, overrides= or validator=");
      if (!key) {
        skip_line();
        break;
      }
      if (!is_symbol("=")) {
        error(peek(), DiagnosticKind::syntax_error, "expected '=' after " + key->text);
        skip_line();
        break;
      }
      take();
      if (key->text == "prec") {
        auto v = expect_word("integer precedence");
        if (!v) break;
        try {
          std::size_t used = 0;
          spec.precedence = std::stoi(v->text, &used);
          if (used != v->text.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
          error(*v, DiagnosticKind::syntax_error, "bad precedence " + v->text);
        }
      } else if (key->text == "overrides") {
        while (true) {
          auto v = expect_word("token name");
          if (!v) break;
          spec.overrides.insert(v->text);
          locate(v->text, *v);
          if (!is_symbol(",")) break;
          take();
        }
      } else if (key->text == "validator") {
        auto v = expect_word("validator id");
        if (!v) break;
        spec.validator_id = v->text;
        auto it = registry_.validators.find(v->text);
        if (it == registry_.validators.end())
          error(*v, DiagnosticKind::unknown_symbol, "no validator registered as " + v->text, v->text);
        else
          spec.validator = it->second;
      } else {
        error(*key, DiagnosticKind::syntax_error, "unknown token attribute " + key->text);
        skip_line();
        break;
      }
    }
    for (const auto& t : spec_.token_specs)
      if (t.name == spec.name) error(*name, DiagnosticKind::duplicate_token, "duplicate token type " + spec.name, spec.name);
    spec_.grammar.terminals.insert(spec.name);
    spec_.token_specs.push_back(std::move(spec));
  }

  void parse_production() {
    auto lhs = expect_word("left-hand side");
    if (!lhs) {
      skip_statement();
      return;
    }
    skip_newlines();
    if (!is_symbol("::=")) {
      error(peek(), DiagnosticKind::syntax_error, "expected '::=' after " + lhs->text);
      skip_statement();
      return;
    }
    take();
    locate(lhs->text, *lhs);
    spec_.grammar.nonterminals.insert(lhs->text);
    std::size_t k = alternatives_[lhs->text];
    std::vector<RhsElement> rhs;
    auto flush = [&] {
      Production p;
      p.id = lhs->text + "." + std::to_string(k++);
      p.origin = p.id;
      p.lhs = lhs->text;
      p.rhs = std::move(rhs);
      rhs.clear();
      locate(p.id, *lhs);
      spec_.grammar.productions.push_back(std::move(p));
    };
    while (true) {
      skip_newlines();
      const Lexeme& l = peek();
      if (l.kind == Lexeme::Kind::word) {
        Lexeme w = take();
        locate(w.text, w);
        rhs.push_back({w.text, false});
      } else if (is_symbol("[")) {
        take();
        skip_newlines();
        auto w = expect_word("symbol inside [ ]");
        skip_newlines();
        if (!w || !is_symbol("]")) {
          if (w) error(peek(), DiagnosticKind::syntax_error, "expected ']'");
          skip_statement();
          break;
        }
        take();
        locate(w->text, *w);
        rhs.push_back({w->text, true});
      } else if (is_symbol("|")) {
        take();
        flush();
      } else if (is_symbol(";")) {
        take();
        flush();
        break;
      } else {
        error(l, DiagnosticKind::syntax_error,
              l.kind == Lexeme::Kind::end ? "missing ';' at end of file" : "unexpected '" + l.text + "' in production");
        if (l.kind != Lexeme::Kind::end && l.kind != Lexeme::Kind::directive) skip_statement();
        break;
      }
    }
    alternatives_[lhs->text] = k;
  }

  void parse_constraint() {
    auto kw = expect_word("assoc, prefer, compose or custom");
    if (!kw) {
      skip_statement();
      return;
    }
    auto id = [&]() -> std::optional<Lexeme> {
      skip_newlines();
      auto w = expect_word("production id");
      if (w) locate(w->text, *w);
      return w;
    };
    auto keyword = [&](const char* expected) {
      skip_newlines();
      if (peek().kind == Lexeme::Kind::word && peek().text == expected) {
        take();
        return true;
      }
      error(peek(), DiagnosticKind::syntax_error, std::string("expected '") + expected + "'");
      return false;
    };
    bool ok = true;
    if (kw->text == "assoc") {
      auto p = id();
      skip_newlines();
      auto dir = p ? expect_word("left, right or non") : std::nullopt;
      if (p && dir) {
        if (dir->text == "left")
          spec_.constraints.associativity[p->text] = Associativity::left_to_right;
        else if (dir->text == "right")
          spec_.constraints.associativity[p->text] = Associativity::right_to_left;
        else if (dir->text == "non")
          spec_.constraints.associativity[p->text] = Associativity::non_associative;
        else
          error(*dir, DiagnosticKind::syntax_error, "unknown associativity " + dir->text), ok = false;
      } else {
        ok = false;
      }
    } else if (kw->text == "prefer" || kw->text == "compose") {
      auto a = id();
      bool over = a && keyword("over");
      auto b = over ? id() : std::nullopt;
      if (a && b) {
        auto& list = kw->text == "prefer" ? spec_.constraints.selection_precedence
                                          : spec_.constraints.composition_precedence;
        list.emplace_back(a->text, b->text);
      } else {
        ok = false;
      }
    } else if (kw->text == "custom") {
      auto p = id();
      skip_newlines();
      auto ev = p ? expect_word("evaluator id") : std::nullopt;
      if (p && ev) {
        spec_.constraints.custom_evaluators[p->text] = ev->text;
        locate(ev->text, *ev);
        if (!registry_.evaluators.count(ev->text))
          error(*ev, DiagnosticKind::unknown_symbol, "no evaluator registered as " + ev->text, ev->text);
      } else {
        ok = false;
      }
    } else {
      error(*kw, DiagnosticKind::syntax_error, "unknown constraint " + kw->text);
      ok = false;
    }
    skip_newlines();
    if (ok && !is_symbol(";")) error(peek(), DiagnosticKind::syntax_error, "expected ';'");
    skip_statement();
  }

  std::vector<Lexeme> lx_;
  std::size_t i_ = 0;
  const Registry& registry_;
  std::vector<Diagnostic>& diags_;
  LanguageSpec spec_;
  std::map<std::string, std::size_t> alternatives_;
  std::map<std::string, Lexeme> where_;
  Lexeme start_lexeme_;
};

}  // namespace detail

/// Parses spec-file text. On success `spec` is set and `diagnostics` holds only
/// warnings; otherwise `spec` is empty and the errors carry line and column.
inline SpecParseResult parse_language_spec(std::string_view text, const Registry& registry = {}) {
  SpecParseResult result;
  auto lexemes = detail::SpecLexer(text).run(result.diagnostics);
  detail::SpecParser parser(std::move(lexemes), registry, result.diagnostics);
  LanguageSpec spec = parser.run();

  if (!has_errors(result.diagnostics)) {
    std::vector<Diagnostic> semantic = validate_token_specs(spec.token_specs);
    Grammar normalized;
    try {
      normalized = spec.normalized_grammar();
    } catch (const Error& e) {
      Diagnostic d;
      d.message = e.what();
      semantic.push_back(std::move(d));
    }
    auto more = validate_grammar(normalized, spec.constraints);
    semantic.insert(semantic.end(), more.begin(), more.end());
    for (auto& d : semantic) {
      if (d.line == 0 && !d.subject.empty()) {
        auto it = parser.locations().find(d.subject);
        if (it != parser.locations().end()) {
          d.line = it->second.line;
          d.column = it->second.column;
        }
      }
      result.diagnostics.push_back(std::move(d));
    }
  }
  if (!has_errors(result.diagnostics)) result.spec = std::move(spec);
  return result;
}

/// Writes a spec back out in the file format. Parsing the output yields an
/// equal LanguageSpec given the same registry.
inline std::string serialize_language_spec(const LanguageSpec& spec) {
  std::ostringstream out;
  out << "%policy " << to_string(spec.scan_config.policy) << "\n";
  if (spec.scan_config.ignore_pattern)
    out << "%ignore /" << *spec.scan_config.ignore_pattern << "/\n";
  else
    out << "%ignore none\n";
  out << "%tokens\n";
  for (const auto& t : spec.token_specs) {
    out << t.name << ' ';
    if (!t.pattern.empty() && t.pattern[0] == '@')
      out << t.pattern;
    else
      out << '/' << t.pattern << '/';
    out << " prec=" << t.precedence;
    if (!t.overrides.empty()) {
      out << " overrides=";
      bool first = true;
      for (const auto& o : t.overrides) {
        out << (first ? "" : ",") << o;
        first = false;
      }
    }
    if (t.validator_id) out << " validator=" << *t.validator_id;
    out << "\n";
  }
  if (!spec.grammar.start.empty()) out << "%start " << spec.grammar.start << "\n";
  out << "%productions\n";
  // One statement per alternative keeps both the order and the Lhs.k numbering.
  for (const auto& p : spec.grammar.productions) {
    out << p.lhs << " ::=";
    for (const auto& e : p.rhs) out << ' ' << (e.optional ? "[" + e.symbol + "]" : e.symbol);
    out << " ;\n";
  }
  out << "%constraints\n";
  for (const auto& [id, a] : spec.constraints.associativity) out << "assoc " << id << ' ' << to_string(a) << " ;\n";
  for (const auto& [a, b] : spec.constraints.selection_precedence) out << "prefer " << a << " over " << b << " ;\n";
  for (const auto& [a, b] : spec.constraints.composition_precedence) out << "compose " << a << " over " << b << " ;\n";
  for (const auto& [id, ev] : spec.constraints.custom_evaluators) out << "custom " << id << ' ' << ev << " ;\n";
  return out.str();
}

}  // namespace lambfence
