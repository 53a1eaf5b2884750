// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "satvec/graph.hpp"
#include "satvec/rng.hpp"
#include "satvec/signature.hpp"

namespace satvec {

class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- sentences

/// Whitespace tokenization.
inline std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.emplace_back(line.substr(start, i - start));
  }
  return out;
}

/// A sentence as the chain f1(w1, f2(w2, ... fk(wk, EOS))). The empty
/// sentence is the lone EOS leaf.
struct SentenceTree {
  std::vector<std::string> tokens;

  [[nodiscard]] std::string text(std::string_view prefix = "f", std::string_view eos = "EOS") const {
    std::string out;
    for (std::size_t j = 0; j < tokens.size(); ++j) out += std::string(prefix) + std::to_string(j + 1) + "(" + tokens[j] + ",";
    out += eos;
    out.append(tokens.size(), ')');
    return out;
  }
};

inline SentenceTree sentenceToTree(std::vector<std::string> tokens, std::size_t maxLen) {
  if (tokens.size() > maxLen)
    throw FormatError("sentence of " + std::to_string(tokens.size()) + " tokens exceeds the maximum length " +
                      std::to_string(maxLen));
  return SentenceTree{std::move(tokens)};
}

inline std::vector<std::string> treeToSentence(const SentenceTree& tree) { return tree.tokens; }

/// Sequence signature over a pool of `vocabulary` word placeholders w1..wV.
/// Words bind to placeholders on first encounter.
inline Signature sentenceSignature(std::uint32_t vocabulary, std::uint32_t maxLen) {
  SignatureOptions opt;
  opt.sequence = SequenceDecl{"f", maxLen, 1, "EOS"};
  opt.pools.push_back(PoolDecl{false, true, "w", 0, vocabulary, Ordering::ordered, 1});
  return declareSignature({}, {}, opt);
}

/// Graph form of a sentence over a sentence signature.
inline Graph sentenceGraph(const SentenceTree& tree, const Signature& sig, PlaceholderBinder& binder) {
  if (!sig.sequenceMode()) throw FormatError("not a sentence signature");
  if (tree.tokens.size() > sig.options().sequence->length)
    throw FormatError("sentence longer than the signature's " + std::to_string(sig.options().sequence->length) +
                      " positions");
  Graph g;
  NodeId next = g.add(sig.eos());
  for (std::size_t j = tree.tokens.size(); j-- > 0;) {
    const NodeId word = g.add(binder.bind(tree.tokens[j], 0));
    next = g.add(sig.position(static_cast<std::uint32_t>(j + 1)), {word, next});
  }
  return g;
}

/// Inverse of sentenceGraph. Throws FormatError on anything but a chain.
inline SentenceTree graphSentence(const Graph& g, const Signature& sig, const PlaceholderBinder& binder) {
  auto roots = g.roots();
  if (roots.size() != 1) throw FormatError("a sentence graph has exactly one root");
  SentenceTree out;
  NodeId v = roots[0];
  while (g[v].symbol != sig.eos()) {
    const SymbolInfo& s = sig[g[v].symbol];
    if (!s.positionSymbol || g[v].args.size() != 2 || sig.positionIndex(g[v].symbol) != out.tokens.size() + 1)
      throw FormatError("not a sentence chain at " + s.name());
    out.tokens.push_back(binder.concrete(g[g[v].args[0]].symbol));
    v = g[v].args[1];
  }
  return out;
}

/// Random sentences whose word ranks follow a Zipf law with the given
/// exponent over tokens t1..tV; lengths are uniform in [1, maxTokens].
inline std::vector<std::vector<std::string>> zipfSentences(std::size_t count, std::uint32_t vocabulary,
                                                           std::uint32_t maxTokens, double exponent,
                                                           RandomStream& rng) {
  std::vector<double> cumulative(vocabulary);
  double total = 0;
  for (std::uint32_t r = 0; r < vocabulary; ++r) cumulative[r] = total += 1.0 / std::pow(r + 1.0, exponent);
  std::vector<std::vector<std::string>> out(count);
  for (auto& sentence : out) {
    const auto length = 1 + rng.below(maxTokens);
    for (std::uint64_t k = 0; k < length; ++k) {
      const double x = rng.uniform() * total;
      const auto r = std::upper_bound(cumulative.begin(), cumulative.end(), x) - cumulative.begin();
      sentence.push_back("t" + std::to_string(std::min<std::ptrdiff_t>(r, vocabulary - 1) + 1));
    }
  }
  return out;
}

// ------------------------------------------------------------------ clauses

enum class ClauseKind : std::uint8_t { disjunction, negation, equality, disequality, predicate, function, variable };

struct ClauseNode {
  ClauseKind kind = ClauseKind::predicate;
  std::string label;
  std::vector<std::uint32_t> args;
};

/// A clause as a rooted DAG: a disjunction over literals (or the single
/// literal itself), where each distinct variable is one shared leaf.
struct ClauseGraph {
  std::vector<ClauseNode> nodes;
  std::uint32_t root = 0;

  [[nodiscard]] std::size_t variables() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const ClauseNode& n) { return n.kind == ClauseKind::variable; }));
  }
};

struct ClauseCaps {
  std::uint32_t maxOrderedArity = 3;
  std::uint32_t maxUnorderedArity = 5;
};

class ClauseSyntaxError : public FormatError {
public:
  ClauseSyntaxError(const std::string& msg, std::size_t pos)
      : FormatError(msg + " at offset " + std::to_string(pos)), position(pos) {}
  std::size_t position;
};

class ClauseLimitError : public FormatError {
public:
  using FormatError::FormatError;
};

namespace detail {

class ClauseParser {
public:
  ClauseParser(std::string_view text, const ClauseCaps& caps) : text_(text), caps_(caps) {}

  ClauseGraph parse() {
    skip();
    const auto word = peekWord();
    if (word == "fof" || word == "tff" || word == "thf") throw ClauseSyntaxError("only cnf clauses are supported", pos_);
    if (word == "cnf") {
      pos_ += 3;
      expect('(');
      word_();  // name
      expect(',');
      word_();  // role
      expect(',');
      std::vector<std::uint32_t> lits = disjunction();
      expect(')');
      expect('.');
      finish(lits);
      return std::move(g_);
    }
    std::vector<std::uint32_t> lits = disjunction();
    skip();
    if (pos_ < text_.size() && text_[pos_] == '.') ++pos_;
    finish(lits);
    return std::move(g_);
  }

private:
  void finish(const std::vector<std::uint32_t>& lits) {
    skip();
    if (pos_ != text_.size()) throw ClauseSyntaxError("unexpected trailing input", pos_);
    if (lits.size() == 1) {
      g_.root = lits[0];
      return;
    }
    if (lits.size() > caps_.maxUnorderedArity)
      throw ClauseLimitError("clause of " + std::to_string(lits.size()) + " literals exceeds the unordered arity cap " +
                             std::to_string(caps_.maxUnorderedArity));
    g_.root = add({ClauseKind::disjunction, "|", lits});
  }

  // Literals separated by '|', optionally wrapped in one pair of parentheses.
  std::vector<std::uint32_t> disjunction() {
    skip();
    const std::size_t save = pos_;
    if (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      try {
        auto lits = literals();
        expect(')');
        return lits;
      } catch (const ClauseSyntaxError&) {
        pos_ = save;
      }
    }
    return literals();
  }

  std::vector<std::uint32_t> literals() {
    std::vector<std::uint32_t> out{literal()};
    for (;;) {
      skip();
      if (pos_ < text_.size() && text_[pos_] == '|') {
        ++pos_;
        out.push_back(literal());
      } else {
        return out;
      }
    }
  }

  std::uint32_t literal() {
    skip();
    if (pos_ < text_.size() && text_[pos_] == '~') {
      ++pos_;
      skip();
      std::uint32_t inner;
      if (pos_ < text_.size() && text_[pos_] == '(') {
        ++pos_;
        inner = literal();
        expect(')');
      } else {
        inner = atom();
      }
      return add({ClauseKind::negation, "~", {inner}});
    }
    return atom();
  }

  // Predicate atom or (dis)equation between terms.
  std::uint32_t atom() {
    skip();
    const std::size_t start = pos_;
    std::uint32_t lhs = term(true);
    skip();
    const bool eq = pos_ < text_.size() && text_[pos_] == '=';
    const bool ne = pos_ + 1 < text_.size() && text_[pos_] == '!' && text_[pos_ + 1] == '=';
    if (!eq && !ne) {
      if (g_.nodes[lhs].kind == ClauseKind::variable) throw ClauseSyntaxError("a variable is not a literal", start);
      return lhs;
    }
    pos_ += eq ? 1 : 2;
    if (g_.nodes[lhs].kind == ClauseKind::predicate) g_.nodes[lhs].kind = ClauseKind::function;
    std::uint32_t rhs = term(false);
    return add({eq ? ClauseKind::equality : ClauseKind::disequality, eq ? "=" : "!=", {lhs, rhs}});
  }

  std::uint32_t term(bool top) {
    std::string name = word_();
    const bool variable = std::isupper(static_cast<unsigned char>(name[0])) || name[0] == '_';
    skip();
    std::vector<std::uint32_t> args;
    if (pos_ < text_.size() && text_[pos_] == '(') {
      if (variable) throw ClauseSyntaxError("variables take no arguments", pos_);
      ++pos_;
      for (;;) {
        args.push_back(term(false));
        skip();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          ++pos_;
          continue;
        }
        expect(')');
        break;
      }
    }
    if (variable) {
      auto [it, fresh] = vars_.emplace(name, 0);
      if (fresh) it->second = add({ClauseKind::variable, name, {}});
      return it->second;
    }
    if (args.size() > caps_.maxOrderedArity)
      throw ClauseLimitError(name + "/" + std::to_string(args.size()) + " exceeds the ordered arity cap " +
                             std::to_string(caps_.maxOrderedArity));
    return add({top ? ClauseKind::predicate : ClauseKind::function, std::move(name), std::move(args)});
  }

  std::string word_() {
    skip();
    const std::size_t start = pos_;
    if (pos_ < text_.size() && text_[pos_] == '\'') {
      const auto close = text_.find('\'', pos_ + 1);
      if (close == std::string_view::npos) throw ClauseSyntaxError("unterminated quoted name", pos_);
      pos_ = close + 1;
      return std::string(text_.substr(start, pos_ - start));
    }
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' || text_[pos_] == '$'))
      ++pos_;
    if (pos_ == start) throw ClauseSyntaxError("expected a name", pos_);
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string_view peekWord() const {
    std::size_t end = pos_;
    while (end < text_.size() && std::isalpha(static_cast<unsigned char>(text_[end]))) ++end;
    std::size_t after = end;
    while (after < text_.size() && std::isspace(static_cast<unsigned char>(text_[after]))) ++after;
    if (after < text_.size() && text_[after] == '(') return text_.substr(pos_, end - pos_);
    return {};
  }

  void expect(char c) {
    skip();
    if (pos_ >= text_.size() || text_[pos_] != c) throw ClauseSyntaxError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::uint32_t add(ClauseNode n) {
    g_.nodes.push_back(std::move(n));
    return static_cast<std::uint32_t>(g_.nodes.size() - 1);
  }

  std::string_view text_;
  ClauseCaps caps_;
  std::size_t pos_ = 0;
  ClauseGraph g_;
  std::map<std::string, std::uint32_t> vars_;
};

}  // namespace detail

/// Parses a CNF clause: literals joined by `|`, `~` for negation, `=` and
/// `!=` between terms, prefix terms, and variables starting with an
/// uppercase letter or `_`. A TPTP `cnf(name, role, clause).` wrapper is
/// accepted; other TPTP formula kinds are rejected.
inline ClauseGraph parseClause(std::string_view text, const ClauseCaps& caps = {}) {
  return detail::ClauseParser(text, caps).parse();
}

/// Clause text in the input syntax, keeping argument and literal order.
inline std::string renderClause(const ClauseGraph& c) {
  auto render = [&](auto&& self, std::uint32_t v) -> std::string {
    const ClauseNode& n = c.nodes[v];
    switch (n.kind) {
      case ClauseKind::disjunction: {
        std::string out;
        for (std::size_t i = 0; i < n.args.size(); ++i) out += (i ? " | " : "") + self(self, n.args[i]);
        return out;
      }
      case ClauseKind::negation: {
        const auto k = c.nodes[n.args[0]].kind;
        const bool wrap = k == ClauseKind::equality || k == ClauseKind::disequality;
        return wrap ? "~(" + self(self, n.args[0]) + ")" : "~" + self(self, n.args[0]);
      }
      case ClauseKind::equality:
      case ClauseKind::disequality:
        return self(self, n.args[0]) + " " + n.label + " " + self(self, n.args[1]);
      default: {
        std::string out = n.label;
        if (!n.args.empty()) {
          out += "(";
          for (std::size_t i = 0; i < n.args.size(); ++i) out += (i ? "," : "") + self(self, n.args[i]);
          out += ")";
        }
        return out;
      }
    }
  };
  return render(render, c.root);
}

namespace detail {

// Name-blind order key: variables are numbered by first occurrence inside
// the subterm, unordered arguments are sorted.
inline std::string shapeKey(const ClauseGraph& c, std::uint32_t v, std::map<std::uint32_t, int>& local) {
  const ClauseNode& n = c.nodes[v];
  if (n.kind == ClauseKind::variable) {
    auto [it, fresh] = local.emplace(v, static_cast<int>(local.size()) + 1);
    return "_" + std::to_string(it->second);
  }
  std::vector<std::string> parts;
  for (std::uint32_t a : n.args) {
    std::map<std::uint32_t, int> inner;
    parts.push_back(shapeKey(c, a, n.kind == ClauseKind::disjunction || n.kind == ClauseKind::equality ||
                                           n.kind == ClauseKind::disequality
                                       ? inner
                                       : local));
  }
  if (n.kind == ClauseKind::disjunction || n.kind == ClauseKind::equality || n.kind == ClauseKind::disequality)
    std::sort(parts.begin(), parts.end());
  std::string out = std::to_string(static_cast<int>(n.kind)) + n.label + "(";
  for (const auto& p : parts) out += p + ",";
  return out + ")";
}

}  // namespace detail

/// Renames variables to var1..vark in first-occurrence order of a
/// canonical walk whose unordered arguments are sorted by name-blind shape.
/// The result does not depend on the input's variable names.
inline ClauseGraph normalizeVariables(const ClauseGraph& c, std::size_t n) {
  ClauseGraph out = c;
  std::vector<int> name(c.nodes.size(), 0);
  int next = 0;
  auto walk = [&](auto&& self, std::uint32_t v) -> void {
    const ClauseNode& node = c.nodes[v];
    if (node.kind == ClauseKind::variable) {
      if (!name[v]) name[v] = ++next;
      return;
    }
    std::vector<std::uint32_t> order = node.args;
    if (node.kind == ClauseKind::disjunction || node.kind == ClauseKind::equality ||
        node.kind == ClauseKind::disequality) {
      std::vector<std::pair<std::string, std::uint32_t>> keyed;
      for (std::uint32_t a : order) {
        std::map<std::uint32_t, int> local;
        keyed.push_back({detail::shapeKey(c, a, local), a});
      }
      std::stable_sort(keyed.begin(), keyed.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
      for (std::size_t i = 0; i < keyed.size(); ++i) order[i] = keyed[i].second;
    }
    for (std::uint32_t a : order) self(self, a);
  };
  walk(walk, c.root);
  if (static_cast<std::size_t>(next) > n)
    throw ClauseLimitError("clause has " + std::to_string(next) + " variables, only " + std::to_string(n) +
                           " placeholders");
  for (std::uint32_t v = 0; v < c.nodes.size(); ++v)
    if (c.nodes[v].kind == ClauseKind::variable) out.nodes[v].label = "var" + std::to_string(name[v]);
  return out;
}

/// Replaces every variable occurrence by its own unshared `var` leaf.
inline ClauseGraph anonymizeVariables(const ClauseGraph& c) {
  ClauseGraph out;
  auto copy = [&](auto&& self, std::uint32_t v) -> std::uint32_t {
    ClauseNode n = c.nodes[v];
    if (n.kind == ClauseKind::variable) n.label = "var";
    for (auto& a : n.args) a = self(self, a);
    out.nodes.push_back(std::move(n));
    return static_cast<std::uint32_t>(out.nodes.size() - 1);
  };
  out.root = copy(copy, c.root);
  return out;
}

struct ClauseSignatureOptions {
  std::uint32_t variables = 8;                            // var1..varN
  std::vector<std::uint32_t> predicates{4, 12, 12, 6};    // placeholder pool sizes by arity 0..3
  std::vector<std::uint32_t> functions{16, 12, 8, 4};     // arity 0 holds the constants
  std::uint32_t maxLiterals = 5;
  std::uint32_t maxParents = 5;
  bool argNumberMask = true;
  std::uint32_t maxDepth = 0;
};

/// Clause signature: disjunctions `|`/2..maxLiterals and `=`, `!=` are
/// unordered; predicates, functions and constants are placeholder pools
/// ("p", "fn", "c"); `~` is the negation with bypassed argument masks and
/// its own split cell. Any literal may also be a clause's root.
inline Signature clauseSignature(const ClauseSignatureOptions& o = {}) {
  std::vector<SymbolDecl> roots, internals;
  for (std::uint32_t k = 2; k <= o.maxLiterals; ++k) roots.push_back({"|", k, Ordering::unordered, {}});
  for (auto* list : {&roots, &internals}) {
    list->push_back({"~", 1, Ordering::ordered, {}});
    list->push_back({"=", 2, Ordering::unordered, {}});
    list->push_back({"!=", 2, Ordering::unordered, {}});
  }
  for (std::uint32_t i = 1; i <= o.variables; ++i) internals.push_back({"var" + std::to_string(i), 0, Ordering::ordered, {}});
  internals.push_back({"var", 0, Ordering::ordered, {}});
  SignatureOptions opt;
  opt.maxParents = o.maxParents;
  opt.maxDepth = o.maxDepth;
  opt.argNumberMask = o.argNumberMask;
  opt.negation = "~";
  opt.negationBypass = true;
  opt.negationIsolate = true;
  for (std::uint32_t k = 0; k < o.predicates.size(); ++k)
    if (o.predicates[k]) opt.pools.push_back(PoolDecl{true, true, "p", k, o.predicates[k], Ordering::ordered, {}});
  for (std::uint32_t k = 0; k < o.functions.size(); ++k)
    if (o.functions[k]) opt.pools.push_back(PoolDecl{false, true, k ? "fn" : "c", k, o.functions[k], Ordering::ordered, {}});
  return declareSignature(roots, internals, opt);
}

/// Graph form over a clause signature. Variables must already carry
/// placeholder names (normalizeVariables or anonymizeVariables); names bind
/// to pool placeholders on first encounter.
inline Graph clauseGraph(const ClauseGraph& c, const Signature& sig, PlaceholderBinder& binder) {
  Graph g;
  std::vector<std::optional<NodeId>> made(c.nodes.size());
  auto build = [&](auto&& self, std::uint32_t v) -> NodeId {
    if (made[v]) return *made[v];
    const ClauseNode& n = c.nodes[v];
    std::vector<NodeId> args;
    for (std::uint32_t a : n.args) args.push_back(self(self, a));
    const auto arity = static_cast<std::uint32_t>(args.size());
    SymbolId s = kNoSymbol;
    switch (n.kind) {
      case ClauseKind::disjunction:
      case ClauseKind::negation:
      case ClauseKind::equality:
      case ClauseKind::disequality:
      case ClauseKind::variable: {
        auto id = sig.find(n.label, arity);
        if (!id || !sig[*id].pool.empty())
          throw FormatError("symbol " + n.label + "/" + std::to_string(arity) + " is not in the clause signature");
        s = *id;
        break;
      }
      case ClauseKind::predicate: s = binder.bind(n.label, arity, "p"); break;
      case ClauseKind::function: s = binder.bind(n.label, arity, arity ? "fn" : "c"); break;
    }
    made[v] = g.add(s, std::move(args));
    return *made[v];
  };
  build(build, c.root);
  return g;
}

/// Inverse of clauseGraph for decoded graphs: labels come back through the
/// binder. Throws FormatError for graphs that are not a single clause.
inline ClauseGraph graphClause(const Graph& g, const Signature& sig, const PlaceholderBinder& binder) {
  auto roots = g.roots();
  if (roots.size() != 1) throw FormatError("a clause graph has exactly one root");
  ClauseGraph out;
  std::vector<std::optional<std::uint32_t>> made(g.size());
  auto build = [&](auto&& self, NodeId v, bool literal) -> std::uint32_t {
    if (made[v]) return *made[v];
    const SymbolInfo& s = sig[sig[g[v].symbol].base];
    ClauseNode n;
    n.label = binder.concrete(g[v].symbol);
    if (s.label == "|" && s.pool.empty()) n.kind = ClauseKind::disjunction;
    else if (s.label == "~" && s.pool.empty()) n.kind = ClauseKind::negation;
    else if (s.label == "=" && s.pool.empty()) n.kind = ClauseKind::equality;
    else if (s.label == "!=" && s.pool.empty()) n.kind = ClauseKind::disequality;
    else if (s.leaf() && s.pool.empty()) n.kind = ClauseKind::variable;
    else n.kind = literal ? ClauseKind::predicate : ClauseKind::function;
    const bool childLiteral = n.kind == ClauseKind::disjunction || n.kind == ClauseKind::negation;
    for (NodeId a : g[v].args) n.args.push_back(self(self, a, childLiteral));
    out.nodes.push_back(std::move(n));
    made[v] = static_cast<std::uint32_t>(out.nodes.size() - 1);
    return *made[v];
  };
  out.root = build(build, roots[0], true);
  return out;
}

struct RandomClauseOptions {
  std::uint32_t maxLiterals = 4;
  std::uint32_t maxDepth = 2;     // term nesting below a literal
  std::uint32_t variables = 4;    // distinct variable names to draw from
  double equalityRate = 0.15;
  double negationRate = 0.4;
  double variableRate = 0.4;      // chance a term position holds a variable
  std::uint32_t predicates = 6;
  std::uint32_t functions = 4;
  std::uint32_t constants = 4;
  std::string prefix;             // prepended to every name
};

/// Random clause text within the default caps, drawn from a fixed
/// vocabulary of predicates `<prefix>p<i>`, functions `<prefix>f<i>` and
/// constants `<prefix>c<i>`. Arity of predicate or function i is 1 + i % 3.
inline std::string randomClause(RandomStream& rng, const RandomClauseOptions& o) {
  auto pickVar = [&] { return "X" + std::to_string(rng.below(o.variables)); };
  auto term = [&](auto&& self, std::uint32_t depth) -> std::string {
    if (rng.uniform() < o.variableRate) return pickVar();
    if (depth >= o.maxDepth || o.functions == 0 || rng.uniform() < 0.5)
      return o.prefix + "c" + std::to_string(rng.below(o.constants));
    const auto f = rng.below(o.functions);
    std::string out = o.prefix + "f" + std::to_string(f) + "(";
    for (std::uint64_t k = 0; k <= f % 3; ++k) out += (k ? "," : "") + self(self, depth + 1);
    return out + ")";
  };
  const auto literals = 1 + rng.below(o.maxLiterals);
  std::string out;
  for (std::uint64_t l = 0; l < literals; ++l) {
    if (l) out += " | ";
    const bool negated = rng.uniform() < o.negationRate;
    if (rng.uniform() < o.equalityRate) {
      out += term(term, 0) + (negated ? " != " : " = ") + term(term, 0);
      continue;
    }
    const auto p = rng.below(o.predicates);
    out += (negated ? "~" : "") + o.prefix + "p" + std::to_string(p) + "(";
    for (std::uint64_t k = 0; k <= p % 3; ++k) out += (k ? "," : "") + term(term, 1);
    out += ")";
  }
  return out;
}

}  // namespace satvec
