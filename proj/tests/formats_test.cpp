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

#include <gtest/gtest.h>

#include "satvec/decoder.hpp"
#include "satvec/formats.hpp"

namespace satvec {
namespace {

TEST(Sentence, BinaryTreeForm) {
  auto tree = sentenceToTree(tokenize("What states border Texas?"), 150);
  EXPECT_EQ(tree.text(), "f1(What,f2(states,f3(border,f4(Texas?,EOS))))");
  EXPECT_EQ(sentenceToTree({}, 150).text(), "EOS");
}

TEST(Sentence, LengthBound) {
  std::vector<std::string> words(147, "x");
  EXPECT_NO_THROW(sentenceToTree(words, 150));
  words.resize(151, "y");
  EXPECT_THROW(sentenceToTree(words, 150), FormatError);
}

TEST(Sentence, TokenizeSplitsOnWhitespace) {
  EXPECT_EQ(tokenize("  a\tbb  c\n"), (std::vector<std::string>{"a", "bb", "c"}));
  EXPECT_TRUE(tokenize("   ").empty());
}

TEST(Sentence, GraphRoundTripAndDecode) {
  auto sig = std::make_shared<const Signature>(sentenceSignature(40, 12));
  PlaceholderBinder binder(*sig);
  RandomStream rng(4);
  auto corpus = zipfSentences(30, 40, 12, 1.1, rng);
  std::vector<Graph> graphs;
  for (const auto& tokens : corpus) {
    auto tree = sentenceToTree(tokens, 12);
    EXPECT_EQ(treeToSentence(tree), tokens);
    graphs.push_back(sentenceGraph(tree, *sig, binder));
    EXPECT_TRUE(validate(graphs.back(), *sig).empty());
    EXPECT_EQ(graphSentence(graphs.back(), *sig, binder).tokens, tokens);
  }
  SystemConfig c;
  c.widths = {5, 5, 5, 5, 5};
  c.t = 3;
  auto sys = buildSystem(sig, c);
  for (std::size_t i = 0; i < 10; ++i) {
    auto r = decode(encode(graphs[i], sys), sys, DecodeOptions{.verify = true});
    ASSERT_TRUE(r.ok()) << r.diagnostic;
    EXPECT_EQ(graphSentence(r.graph, *sig, binder).tokens, corpus[i]);
  }
}

TEST(Sentence, EmptySentenceIsTheEndToken) {
  auto sig = sentenceSignature(4, 3);
  PlaceholderBinder binder(sig);
  auto g = sentenceGraph(sentenceToTree({}, 3), sig, binder);
  ASSERT_EQ(g.size(), 1U);
  EXPECT_EQ(g[0].symbol, sig.eos());
  EXPECT_TRUE(validate(g, sig).empty());
}

TEST(Sentence, ZipfFavoursLowRanks) {
  RandomStream rng(1);
  std::map<std::string, int> freq;
  for (const auto& s : zipfSentences(400, 50, 20, 1.2, rng))
    for (const auto& w : s) ++freq[w];
  EXPECT_GT(freq["t1"], freq["t2"]);
  EXPECT_GT(freq["t2"], freq["t10"]);
}

std::size_t parents(const ClauseGraph& c, std::uint32_t v) {
  std::size_t n = 0;
  for (const auto& node : c.nodes) n += static_cast<std::size_t>(std::count(node.args.begin(), node.args.end(), v));
  return n;
}

TEST(Clause, FigureSixShape) {
  auto c = parseClause("g(X) | f(X, g(Y), g(Y)) | ~h(X, Y, Z)");
  const ClauseNode& root = c.nodes[c.root];
  EXPECT_EQ(root.kind, ClauseKind::disjunction);
  ASSERT_EQ(root.args.size(), 3U);
  EXPECT_EQ(c.nodes.size(), 10U);
  EXPECT_EQ(c.variables(), 3U);
  const auto& neg = c.nodes[root.args[2]];
  EXPECT_EQ(neg.kind, ClauseKind::negation);
  const auto& h = c.nodes[neg.args[0]];
  EXPECT_EQ(h.kind, ClauseKind::predicate);
  EXPECT_EQ(parents(c, h.args[0]), 3U);  // X
  EXPECT_EQ(parents(c, h.args[1]), 3U);  // Y
  EXPECT_EQ(parents(c, h.args[2]), 1U);  // Z
  EXPECT_EQ(c.nodes[c.nodes[root.args[1]].args[1]].kind, ClauseKind::function);
  EXPECT_EQ(renderClause(c), "g(X) | f(X,g(Y),g(Y)) | ~h(X,Y,Z)");
}

TEST(Clause, AtomsEquationsAndWrappers) {
  auto p = parseClause("p");
  EXPECT_EQ(p.nodes.size(), 1U);
  EXPECT_EQ(p.nodes[p.root].kind, ClauseKind::predicate);
  auto e = parseClause("f(X) = a | X != b");
  EXPECT_EQ(renderClause(e), "f(X) = a | X != b");
  EXPECT_EQ(e.nodes[e.nodes[e.nodes[e.root].args[0]].args[0]].kind, ClauseKind::function);
  EXPECT_EQ(renderClause(parseClause("cnf(ax1, axiom, (p(X) | ~q(X,a))).")), "p(X) | ~q(X,a)");
  EXPECT_EQ(renderClause(parseClause("~(X = Y) | r")), "~(X = Y) | r");
}

TEST(Clause, ErrorsCarryPositions) {
  try {
    parseClause("f(");
    FAIL();
  } catch (const ClauseSyntaxError& e) {
    EXPECT_EQ(e.position, 2U);
  }
  EXPECT_THROW(parseClause("p(X) |"), ClauseSyntaxError);
  EXPECT_THROW(parseClause("X"), ClauseSyntaxError);
  EXPECT_THROW(parseClause("X(a)"), ClauseSyntaxError);
  EXPECT_THROW(parseClause("fof(a, axiom, p)."), ClauseSyntaxError);
  EXPECT_THROW(parseClause("p(a) q"), ClauseSyntaxError);
  EXPECT_THROW(parseClause("p(a,b,c,d)"), ClauseLimitError);
  EXPECT_THROW(parseClause("p | q | r | s | t | u"), ClauseLimitError);
  EXPECT_NO_THROW(parseClause("p | q | r | s | t"));
}

TEST(Clause, ParseRenderParseIsStable) {
  RandomStream rng(9);
  for (int i = 0; i < 300; ++i) {
    const auto text = randomClause(rng, RandomClauseOptions{});
    const auto once = renderClause(parseClause(text));
    EXPECT_EQ(renderClause(parseClause(once)), once) << text;
  }
}

TEST(Clause, NormalizeVariables) {
  EXPECT_EQ(renderClause(normalizeVariables(parseClause("f(Y, X)"), 8)), "f(var1,var2)");
  EXPECT_EQ(renderClause(normalizeVariables(parseClause("p(a) | ~q(b)"), 8)), "p(a) | ~q(b)");
  EXPECT_THROW(normalizeVariables(parseClause("p(X,Y,Z)"), 2), ClauseLimitError);
  // Unordered literals are visited by shape, not by input position.
  EXPECT_EQ(renderClause(normalizeVariables(parseClause("q(A,B) | p(B)"), 8)), "q(var2,var1) | p(var1)");
}

TEST(Clause, NormalizationIgnoresNamesAndIsIdempotent) {
  RandomStream rng(10);
  for (int i = 0; i < 300; ++i) {
    const auto text = randomClause(rng, RandomClauseOptions{});
    auto c = parseClause(text);
    // Rename every variable through a random permutation of fresh names.
    auto renamed = c;
    std::vector<std::string> names{"U", "V", "W", "Zed", "Q1", "Q2", "Q3", "Q4"};
    for (std::size_t k = names.size(); k > 1; --k) std::swap(names[k - 1], names[rng.below(k)]);
    std::size_t next = 0;
    for (auto& n : renamed.nodes)
      if (n.kind == ClauseKind::variable) n.label = names[next++];
    const auto a = renderClause(normalizeVariables(c, 8));
    EXPECT_EQ(renderClause(normalizeVariables(renamed, 8)), a) << text;
    EXPECT_EQ(renderClause(normalizeVariables(normalizeVariables(c, 8), 8)), a);
  }
}

TEST(Clause, AnonymizedVariablesAreUnshared) {
  auto c = anonymizeVariables(parseClause("p(X, X) | q(X)"));
  EXPECT_EQ(renderClause(c), "p(var,var) | q(var)");
  EXPECT_EQ(c.variables(), 3U);
}

TEST(Clause, GraphRoundTripAndDecode) {
  auto sig = std::make_shared<const Signature>(clauseSignature());
  PlaceholderBinder binder(*sig);
  SystemConfig cfg;
  cfg.widths = {5, 4, 4, 4, 4};
  cfg.t = 2;
  auto sys = buildSystem(sig, cfg);
  RandomStream rng(2);
  int decoded = 0;
  for (int i = 0; i < 20; ++i) {
    auto c = normalizeVariables(parseClause(randomClause(rng, RandomClauseOptions{})), 8);
    Graph g = clauseGraph(c, *sig, binder);
    if (!validate(g, *sig).empty()) continue;
    EXPECT_EQ(renderClause(graphClause(g, *sig, binder)), renderClause(c));
    auto r = decode(encode(g, sys), sys, DecodeOptions{.verify = true, .budgetSeconds = 10});
    if (!r.ok()) continue;
    ++decoded;
    EXPECT_EQ(encode(r.graph, sys), encode(g, sys));
  }
  EXPECT_GT(decoded, 10);
}

TEST(Clause, SignatureRejectsUnnormalizedVariables) {
  auto sig = clauseSignature();
  PlaceholderBinder binder(sig);
  EXPECT_THROW(clauseGraph(parseClause("p(X)"), sig, binder), FormatError);
}

}  // namespace
}  // namespace satvec
