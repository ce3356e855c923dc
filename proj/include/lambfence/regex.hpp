#pragma once

// All-match-lengths regular expressions.
//
// The exploratory scanning policy needs every length at which a pattern
// matches from a given position, which longest-match engines cannot report.
// Patterns compile to a Thompson NFA that is simulated one character at a
// time; every step whose state set contains the accepting state contributes a
// match length.
//
// Supported syntax: concatenation, alternation `|`, groups `( )`, classes
// `[...]` / `[^...]` with ranges, `.`, quantifiers `? * +`, and escapes
// (`\d \D \w \W \s \S \t \n \r \f \v` and any escaped punctuation).
// Anchors, counted repetition, backreferences and lookaround are rejected.

#include <algorithm>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lambfence/error.hpp"

namespace lambfence {

namespace detail {

using CharSet = std::bitset<256>;

struct NfaState {
  enum class Kind : std::uint8_t { chars, split, accept };
  Kind kind = Kind::accept;
  CharSet chars;
  int out = -1;
  int out2 = -1;
};

class RegexCompiler {
 public:
  explicit RegexCompiler(std::string_view pattern) : pattern_(pattern) {}

  std::vector<NfaState> compile() {
    Fragment f = parse_alternation();
    if (pos_ != pattern_.size()) fail(pattern_[pos_] == ')' ? "unbalanced ')'" : "unexpected character");
    int accept = add_state(NfaState::Kind::accept);
    patch(f, accept);
    // The entry state is stored at index 0 of the result.
    std::vector<NfaState> out;
    out.reserve(states_.size() + 1);
    NfaState entry;
    entry.kind = NfaState::Kind::split;
    entry.out = f.start + 1;
    entry.out2 = -1;
    out.push_back(entry);
    for (auto s : states_) {
      if (s.out >= 0) ++s.out;
      if (s.out2 >= 0) ++s.out2;
      out.push_back(s);
    }
    return out;
  }

 private:
  // A partially built automaton: its entry state and the dangling exits that
  // still need a target.
  struct Fragment {
    int start;
    std::vector<std::pair<int, bool>> exits;  // (state, second branch?)
  };

  [[noreturn]] void fail(const std::string& what) const { throw BadPattern(std::string(pattern_), pos_, what); }

  int add_state(NfaState::Kind kind, CharSet chars = {}) {
    NfaState s;
    s.kind = kind;
    s.chars = chars;
    states_.push_back(s);
    return static_cast<int>(states_.size() - 1);
  }

  void patch(const Fragment& f, int target) {
    for (auto [state, second] : f.exits) (second ? states_[state].out2 : states_[state].out) = target;
  }

  // Zero-width fragment: a split whose both branches lead to the same place.
  Fragment empty_fragment() {
    int s = add_state(NfaState::Kind::split);
    return {s, {{s, false}, {s, true}}};
  }

  bool at_end() const { return pos_ >= pattern_.size(); }
  char peek() const { return pattern_[pos_]; }

  Fragment parse_alternation() {
    Fragment left = parse_concatenation();
    while (!at_end() && peek() == '|') {
      ++pos_;
      Fragment right = parse_concatenation();
      int s = add_state(NfaState::Kind::split);
      states_[s].out = left.start;
      states_[s].out2 = right.start;
      Fragment joined{s, std::move(left.exits)};
      joined.exits.insert(joined.exits.end(), right.exits.begin(), right.exits.end());
      left = std::move(joined);
    }
    return left;
  }

  Fragment parse_concatenation() {
    std::optional<Fragment> acc;
    while (!at_end() && peek() != '|' && peek() != ')') {
      Fragment next = parse_repetition();
      if (!acc) {
        acc = std::move(next);
      } else {
        patch(*acc, next.start);
        acc->exits = std::move(next.exits);
      }
    }
    return acc ? std::move(*acc) : empty_fragment();
  }

  Fragment parse_repetition() {
    Fragment atom = parse_atom();
    while (!at_end() && (peek() == '*' || peek() == '+' || peek() == '?')) {
      char q = peek();
      ++pos_;
      int s = add_state(NfaState::Kind::split);
      states_[s].out = atom.start;
      if (q == '?') {
        Fragment f{s, std::move(atom.exits)};
        f.exits.push_back({s, true});
        atom = std::move(f);
      } else if (q == '*') {
        patch(atom, s);
        atom = Fragment{s, {{s, true}}};
      } else {
        patch(atom, s);
        atom = Fragment{atom.start, {{s, true}}};
      }
    }
    return atom;
  }

  Fragment char_fragment(const CharSet& chars) {
    int s = add_state(NfaState::Kind::chars, chars);
    return {s, {{s, false}}};
  }

  static CharSet range(unsigned char lo, unsigned char hi) {
    CharSet c;
    for (unsigned v = lo; v <= hi; ++v) c.set(v);
    return c;
  }

  static CharSet digit() { return range('0', '9'); }
  static CharSet word() { return range('a', 'z') | range('A', 'Z') | digit() | range('_', '_'); }
  static CharSet space() {
    CharSet c;
    for (char ch : {' ', '\t', '\n', '\r', '\f', '\v'}) c.set(static_cast<unsigned char>(ch));
    return c;
  }

  // Parses the character after a backslash; pos_ points at it.
  CharSet parse_escape() {
    if (at_end()) fail("dangling escape");
    char c = peek();
    ++pos_;
    switch (c) {
      case 'd': return digit();
      case 'D': return ~digit();
      case 'w': return word();
      case 'W': return ~word();
      case 's': return space();
      case 'S': return ~space();
      case 't': return range('\t', '\t');
      case 'n': return range('\n', '\n');
      case 'r': return range('\r', '\r');
      case 'f': return range('\f', '\f');
      case 'v': return range('\v', '\v');
      default: break;
    }
    auto uc = static_cast<unsigned char>(c);
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9')) {
      --pos_;
      fail(std::string("unsupported escape \\") + c);
    }
    return range(uc, uc);
  }

  Fragment parse_class() {
    // pos_ is just past '['.
    bool negate = false;
    if (!at_end() && peek() == '^') {
      negate = true;
      ++pos_;
    }
    CharSet set;
    bool first = true;
    while (true) {
      if (at_end()) fail("unterminated class");
      char c = peek();
      if (c == ']' && !first) {
        ++pos_;
        break;
      }
      if (c == ']') fail("empty class");
      first = false;
      CharSet item;
      std::optional<unsigned char> lo;
      if (c == '\\') {
        ++pos_;
        item = parse_escape();
        if (item.count() == 1) {
          for (unsigned v = 0; v < 256; ++v)
            if (item.test(v)) lo = static_cast<unsigned char>(v);
        }
      } else {
        ++pos_;
        lo = static_cast<unsigned char>(c);
        item.set(*lo);
      }
      if (lo && pos_ + 1 < pattern_.size() && peek() == '-' && pattern_[pos_ + 1] != ']') {
        ++pos_;
        unsigned char hi;
        if (peek() == '\\') {
          ++pos_;
          CharSet h = parse_escape();
          if (h.count() != 1) fail("class escape cannot end a range");
          hi = 0;
          for (unsigned v = 0; v < 256; ++v)
            if (h.test(v)) hi = static_cast<unsigned char>(v);
        } else {
          hi = static_cast<unsigned char>(peek());
          ++pos_;
        }
        if (hi < *lo) fail("reversed range");
        item = range(*lo, hi);
      }
      set |= item;
    }
    return char_fragment(negate ? ~set : set);
  }

  Fragment parse_atom() {
    char c = peek();
    switch (c) {
      case '(': {
        ++pos_;
        Fragment inner = parse_alternation();
        if (at_end() || peek() != ')') fail("missing ')'");
        ++pos_;
        return inner;
      }
      case '[':
        ++pos_;
        return parse_class();
      case '.': {
        ++pos_;
        CharSet any;
        any.set();
        any.reset('\n');
        any.reset('\r');
        return char_fragment(any);
      }
      case '\\':
        ++pos_;
        return char_fragment(parse_escape());
      case '*':
      case '+':
      case '?':
        fail("quantifier without operand");
      case '^':
      case '$':
        fail("anchors are not supported");
      case '{':
      case '}':
        fail("counted repetition is not supported");
      case ']':
        fail("unbalanced ']'");
      default:
        ++pos_;
        return char_fragment(range(static_cast<unsigned char>(c), static_cast<unsigned char>(c)));
    }
  }

  std::string_view pattern_;
  std::size_t pos_ = 0;
  std::vector<NfaState> states_;
};

}  // namespace detail

/// A compiled regular expression that reports every match length from a position.
class Regex {
 public:
  explicit Regex(std::string pattern) : pattern_(std::move(pattern)) {
    states_ = detail::RegexCompiler(pattern_).compile();
  }

  const std::string& pattern() const noexcept { return pattern_; }

  /// Calls `sink(length)` for each length L >= 1 such that the pattern fully
  /// matches input[pos, pos+L), in increasing order.
  template <typename Sink>
  void for_each_length(std::string_view input, std::size_t pos, Sink&& sink) const {
    const std::size_t n = states_.size();
    std::vector<int> current, next;
    std::vector<std::uint32_t> mark(n, 0);
    std::uint32_t generation = 1;
    bool accepting = false;
    auto add = [&](auto&& self, std::vector<int>& set, int s) -> void {
      if (s < 0 || mark[s] == generation) return;
      mark[s] = generation;
      const auto& st = states_[s];
      if (st.kind == detail::NfaState::Kind::split) {
        self(self, set, st.out);
        self(self, set, st.out2);
      } else {
        if (st.kind == detail::NfaState::Kind::accept) accepting = true;
        set.push_back(s);
      }
    };
    add(add, current, 0);
    for (std::size_t i = pos; i < input.size() && !current.empty(); ++i) {
      ++generation;
      accepting = false;
      next.clear();
      auto ch = static_cast<unsigned char>(input[i]);
      for (int s : current) {
        const auto& st = states_[s];
        if (st.kind == detail::NfaState::Kind::chars && st.chars.test(ch)) add(add, next, st.out);
      }
      if (accepting) sink(i + 1 - pos);
      std::swap(current, next);
    }
  }

  std::vector<std::size_t> all_lengths(std::string_view input, std::size_t pos) const {
    std::vector<std::size_t> out;
    for_each_length(input, pos, [&](std::size_t len) { out.push_back(len); });
    return out;
  }

  std::optional<std::size_t> longest(std::string_view input, std::size_t pos) const {
    std::optional<std::size_t> best;
    for_each_length(input, pos, [&](std::size_t len) { best = len; });
    return best;
  }

 private:
  std::string pattern_;
  std::vector<detail::NfaState> states_;
};

/// Custom matcher hook: returns every match length (>= 1) starting at `pos`.
using CustomMatchFn = std::function<std::vector<std::size_t>(std::string_view input, std::size_t pos)>;

/// A token pattern: either a compiled regular expression or a custom matcher.
class Matcher {
 public:
  Matcher() = default;
  explicit Matcher(std::shared_ptr<const Regex> regex) : regex_(std::move(regex)) {}
  explicit Matcher(CustomMatchFn custom) : custom_(std::move(custom)) {}

  bool valid() const noexcept { return regex_ != nullptr || static_cast<bool>(custom_); }

  std::vector<std::size_t> all_lengths(std::string_view input, std::size_t pos) const {
    if (regex_) return regex_->all_lengths(input, pos);
    std::vector<std::size_t> lens = custom_ ? custom_(input, pos) : std::vector<std::size_t>{};
    std::erase_if(lens, [&](std::size_t l) { return l == 0 || pos + l > input.size(); });
    std::sort(lens.begin(), lens.end());
    lens.erase(std::unique(lens.begin(), lens.end()), lens.end());
    return lens;
  }

  std::optional<std::size_t> longest(std::string_view input, std::size_t pos) const {
    if (regex_) return regex_->longest(input, pos);
    auto lens = all_lengths(input, pos);
    if (lens.empty()) return std::nullopt;
    return lens.back();
  }

 private:
  std::shared_ptr<const Regex> regex_;
  CustomMatchFn custom_;
};

/// Compiles a regular expression into a matcher; throws BadPattern.
inline Matcher compile_matcher(const std::string& pattern) {
  return Matcher(std::make_shared<const Regex>(pattern));
}

}  // namespace lambfence
