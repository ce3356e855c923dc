#pragma once

#include <string>
#include <vector>

#include "lambfence/lambfence.hpp"

namespace lftest {

inline std::vector<lambfence::TokenTypeSpec> product_tokens() {
  using lambfence::make_token_type;
  return {make_token_type("Integer", "(-|\\+)?[0-9]+", 1), make_token_type("Decimal", "(-|\\+)?[0-9]+\\.[0-9]+", 1),
          make_token_type("Point", "\\.", 1), make_token_type("Hash", "\\#", 1), make_token_type("Dollar", "\\$", 1)};
}

inline const char* product_spec_text() {
  return R"(%policy greedy
%ignore /[ \t\r\n]+/
%tokens
Integer  /(-|\+)?[0-9]+/        prec=1
Decimal  /(-|\+)?[0-9]+\.[0-9]+/ prec=1
Point    /\./                    prec=1
Hash     /\#/                    prec=1
Dollar   /\$/                    prec=1
%start Product
%productions
Product   ::= Reference Price | Price Reference ;
Reference ::= [Hash] Integer Point Integer ;
Price     ::= [Dollar] Decimal ;
)";
}

inline lambfence::LanguageSpec must_parse(const std::string& text, const lambfence::Registry& reg = {}) {
  auto r = lambfence::parse_language_spec(text, reg);
  if (!r.ok()) throw std::runtime_error(r.error_text());
  return *r.spec;
}

/// Builds a grammar from (lhs, rhs symbols) rows; ids are Lhs.k.
inline lambfence::Grammar grammar(const std::string& start, const std::vector<std::string>& terminals,
                                  const std::vector<std::pair<std::string, std::vector<std::string>>>& rows) {
  lambfence::Grammar g;
  g.start = start;
  g.terminals.insert(terminals.begin(), terminals.end());
  std::map<std::string, int> k;
  for (const auto& [lhs, rhs] : rows) {
    g.nonterminals.insert(lhs);
    lambfence::Production p;
    p.id = lhs + "." + std::to_string(k[lhs]++);
    p.origin = p.id;
    p.lhs = lhs;
    for (const auto& s : rhs) {
      bool opt = s.size() > 2 && s.front() == '[' && s.back() == ']';
      p.rhs.push_back({opt ? s.substr(1, s.size() - 2) : s, opt});
    }
    g.productions.push_back(std::move(p));
  }
  return g;
}

inline std::vector<std::string> token_texts(const std::vector<lambfence::Token>& ts) {
  std::vector<std::string> out;
  for (const auto& t : ts) out.push_back(t.type + ":" + t.text);
  return out;
}

inline std::string repeat_sum(int k) {
  std::string s;
  for (int i = 0; i < k; ++i) s += (i ? "+" : "") + std::to_string(i % 10);
  return s;
}

inline std::uint64_t catalan(unsigned n) {
  std::uint64_t c = 1;
  for (unsigned i = 0; i < n; ++i) c = c * 2 * (2 * i + 1) / (i + 2);
  return c;
}

}  // namespace lftest
