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

#include <atomic>
#include <set>
#include <sstream>

#include "satvec/experiments.hpp"
#include "satvec/generate.hpp"

namespace satvec {
namespace {

std::shared_ptr<const Signature> smallSig() {
  SignatureOptions opt;
  opt.argNumberMask = true;
  return std::make_shared<const Signature>(
      declareSignature({{"f", 2}, {"h", 1}, {"s", 2, Ordering::unordered, {}}},
                       {{"g", 1}, {"k", 2}, {"u", 2, Ordering::unordered, {}}, {"a", 0}, {"b", 0}, {"c", 0}}, opt));
}

SystemConfig cfg(std::uint32_t t, std::uint64_t seed = 1) {
  SystemConfig c;
  c.widths = {4, 4, 4, 4, 4};
  c.t = t;
  c.seed = seed;
  return c;
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(97);
  parallelFor(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallelFor(10, 3, [](std::size_t i) { if (i == 7) throw std::runtime_error("x"); }), std::runtime_error);
}

TEST(Corpus, DomainsAreInferredFromTheSignature) {
  EXPECT_EQ(inferDomain(*smallSig()), Domain::term);
  EXPECT_EQ(inferDomain(sentenceSignature(10, 5)), Domain::sentence);
  EXPECT_EQ(inferDomain(clauseSignature()), Domain::clause);
  EXPECT_EQ(clauseVariables(clauseSignature(ClauseSignatureOptions{.variables = 5})), 5U);
  EXPECT_EQ(parseDomain("clause-anon"), Domain::clauseAnonymous);
  EXPECT_THROW(parseDomain("fof"), std::invalid_argument);
}

TEST(Corpus, CommentsAndBlankLinesAreSkipped) {
  std::istringstream in("% note\n\np(a)\r\n  \n~q(X)\n");
  EXPECT_EQ(corpusLines(in, Domain::clause), (std::vector<std::string>{"p(a)", "~q(X)"}));
  std::istringstream words("% is a word here\n");
  EXPECT_EQ(corpusLines(words, Domain::sentence).size(), 1U);
}

TEST(Corpus, UnrepresentableItemsKeepTheirReason) {
  auto sig = clauseSignature(ClauseSignatureOptions{.variables = 2});
  PlaceholderBinder binder(sig);
  auto items = loadCorpus({"p(X)", "f(", "p(X,Y,Z)", "p(a,b,c,d)"}, Domain::clause, sig, binder);
  ASSERT_EQ(items.size(), 4U);
  EXPECT_TRUE(items[0].graph);
  for (std::size_t i = 1; i < 4; ++i) {
    EXPECT_FALSE(items[i].graph) << i;
    EXPECT_FALSE(items[i].error.empty()) << i;
  }
}

TEST(Roundtrip, EmptyCorpusGivesAnEmptyReport) {
  auto sys = buildSystem(smallSig(), cfg(2));
  PlaceholderBinder binder(sys.signature());
  auto r = roundtrip({}, Domain::term, sys, binder, {});
  EXPECT_TRUE(r.items.empty());
  EXPECT_EQ(r.rate(Outcome::correct), "0.0");
  EXPECT_EQ(r.json()["items"], 0);
}

TEST(Roundtrip, OutcomesSumToTheCorpusSize) {
  auto sys = buildSystem(smallSig(), cfg(3, 5));
  const auto& sig = sys.signature();
  PlaceholderBinder binder(sig);
  RandomStream rng(2);
  std::vector<std::string> lines{"z(a)", "f(a,"};
  for (int i = 0; i < 40; ++i) lines.push_back(canonicalText(randomTree(sig, rng, 10), sig));
  auto corpus = loadCorpus(lines, Domain::term, sig, binder);
  RoundtripOptions o;
  o.verify = true;
  o.threads = 3;
  auto r = roundtrip(corpus, Domain::term, sys, binder, o);
  ASSERT_EQ(r.items.size(), lines.size());
  std::size_t total = 0;
  for (Outcome x : {Outcome::correct, Outcome::incorrect, Outcome::timeout, Outcome::unrepresentable}) total += r.count(x);
  EXPECT_EQ(total, lines.size());
  EXPECT_EQ(r.count(Outcome::unrepresentable), 2U);
  EXPECT_GE(r.count(Outcome::correct), 30U);
  for (std::size_t i = 0; i < r.items.size(); ++i) EXPECT_EQ(r.items[i].index, i);

  // Verified decodes always reproduce the input vector, so an incorrect item
  // is a genuine collision.
  for (const auto& item : r.items)
    if (item.outcome == Outcome::incorrect) {
      auto g = parseTerm(item.decoded, sig);
      EXPECT_EQ(encode(g, sys), encode(parseTerm(item.input, sig), sys));
    }

  auto j = r.json();
  EXPECT_EQ(j["counts"]["unrepresentable"], 2);
  EXPECT_EQ(j["results"].size(), lines.size());
  EXPECT_EQ(j["budget_seconds"], 5.0);
  EXPECT_NE(r.text().find("unrepresentable\t2\t4.8%"), std::string::npos);
}

TEST(Roundtrip, RatesHaveOneDecimal) {
  EXPECT_EQ(percent(1, 3), "33.3");
  EXPECT_EQ(percent(2, 3), "66.7");
  EXPECT_EQ(percent(7, 7), "100.0");
}

TEST(Roundtrip, UniqueModeNeverReportsIncorrect) {
  auto sys = buildSystem(smallSig(), cfg(3, 5));
  const auto& sig = sys.signature();
  PlaceholderBinder binder(sig);
  auto corpus = loadCorpus({"h(k(k(b,g(a)),g(g(c))))", "h(g(a))"}, Domain::term, sig, binder);
  RoundtripOptions o;
  o.unique = true;
  auto r = roundtrip(corpus, Domain::term, sys, binder, o);
  EXPECT_EQ(r.items[0].outcome, Outcome::timeout);
  EXPECT_EQ(r.items[0].status, "ambiguous");
  EXPECT_EQ(r.items[1].outcome, Outcome::correct);
}

TEST(Roundtrip, SentencesAndClausesRenderInTheirDomain) {
  auto sig = std::make_shared<const Signature>(sentenceSignature(20, 8));
  auto sys = buildSystem(sig, cfg(4));
  PlaceholderBinder binder(*sig);
  auto corpus = loadCorpus({"the cat sat", "a b c d e f g h i"}, Domain::sentence, *sig, binder);
  EXPECT_TRUE(corpus[0].graph);
  EXPECT_FALSE(corpus[1].graph);
  EXPECT_EQ(renderGraph(*corpus[0].graph, Domain::sentence, *sig, binder), "the cat sat");

  auto csig = clauseSignature();
  PlaceholderBinder cb(csig);
  auto clauses = loadCorpus({"f(Y, X) | ~g(Y)"}, Domain::clause, csig, cb);
  EXPECT_EQ(renderGraph(*clauses[0].graph, Domain::clause, csig, cb), "f(var1,var2) | ~g(var1)");
}

std::vector<RowMatrix> matrices(const ConstraintSystem& sys, const std::vector<std::string>& terms) {
  std::vector<RowMatrix> out;
  for (const auto& t : terms) out.push_back(toRowMatrix(encode(parseTerm(t, sys.signature()), sys), sys));
  return out;
}

TEST(Knn, OneFoldTestsOnTheTrainingSet) {
  auto sys = buildSystem(smallSig(), cfg(2));
  const auto& sig = sys.signature();
  RandomStream rng(3);
  std::vector<std::string> terms;
  std::set<std::string> seen;
  while (terms.size() < 30) {
    auto t = canonicalText(randomTree(sig, rng, 8), sig);
    if (seen.insert(t).second) terms.push_back(t);
  }
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < terms.size(); ++i) labels.push_back(i % 2 ? "odd" : "even");
  KnnOptions o;
  o.folds = 1;
  auto r = knnCrossValidate(matrices(sys, terms), labels, o);
  // Each query finds itself or an earlier item with similarity 1, which wins
  // the tie: items with the same symbol bag at lambda 0, the same vector at 1.
  auto ms = matrices(sys, terms);
  auto oracle = [&](auto same) {
    std::size_t hits = 0;
    for (std::size_t q = 0; q < terms.size(); ++q) {
      std::size_t first = q;
      for (std::size_t j = 0; j < q && first == q; ++j)
        if (same(ms[q], ms[j])) first = j;
      hits += labels[first] == labels[q];
    }
    return static_cast<double>(hits) / static_cast<double>(terms.size());
  };
  EXPECT_DOUBLE_EQ(r.accuracy.front(), oracle([](const RowMatrix& a, const RowMatrix& b) { return bagOfWordsSim(a, b) == 1.0; }));
  EXPECT_DOUBLE_EQ(r.accuracy.back(), oracle([](const RowMatrix& a, const RowMatrix& b) { return structuralSim(a, b) == 1.0; }));
  EXPECT_GT(r.accuracy.back(), 0.9);
}

TEST(Knn, MatchesDirectClassificationFoldByFold) {
  auto sys = buildSystem(smallSig(), cfg(3));
  const auto& sig = sys.signature();
  RandomStream rng(8);
  std::vector<std::string> terms, labels;
  for (int i = 0; i < 40; ++i) {
    auto g = randomTree(sig, rng, 9);
    terms.push_back(canonicalText(g, sig));
    labels.push_back(sig[g[g.roots()[0]].symbol].label);
  }
  auto ms = matrices(sys, terms);
  KnnOptions o;
  o.folds = 4;
  o.seed = 11;
  o.lambdas = {0.0, 0.3, 1.0};
  auto r = knnCrossValidate(ms, labels, o);
  EXPECT_EQ(r, knnCrossValidate(ms, labels, o)) << "deterministic";

  // Recover the folds from the same seed and classify with knnClassify.
  std::vector<std::size_t> order(ms.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  RandomStream fr = RandomStream(o.seed).split("folds");
  fr.shuffle(std::span<std::size_t>(order));
  for (std::size_t l = 0; l < o.lambdas.size(); ++l) {
    double mean = 0;
    for (std::size_t f = 0; f < o.folds; ++f) {
      std::vector<Labeled> train;
      std::vector<std::size_t> test;
      for (std::size_t i = 0; i < ms.size(); ++i) {
        const auto p = static_cast<std::size_t>(std::find(order.begin(), order.end(), i) - order.begin());
        if (p % o.folds == f) test.push_back(i);
        else train.push_back({ms[i], labels[i]});
      }
      std::size_t hits = 0;
      for (auto q : test) hits += knnClassify(ms[q], train, o.lambdas[l]) == labels[q];
      mean += static_cast<double>(hits) / static_cast<double>(test.size()) / static_cast<double>(o.folds);
    }
    EXPECT_NEAR(r.accuracy[l], mean, 1e-12) << o.lambdas[l];
  }
}

TEST(Knn, RejectsInconsistentInput) {
  auto sys = buildSystem(smallSig(), cfg(1));
  auto ms = matrices(sys, {"h(a)", "h(b)"});
  EXPECT_THROW(knnCrossValidate(ms, {"x"}, {}), std::invalid_argument);
  KnnOptions o;
  o.folds = 3;
  EXPECT_THROW(knnCrossValidate(ms, {"x", "y"}, o), std::invalid_argument);
  o.folds = 2;
  o.lambdas = {1.5};
  EXPECT_THROW(knnCrossValidate(ms, {"x", "y"}, o), std::invalid_argument);
  EXPECT_THROW(knnCrossValidate({}, {}, {}), std::invalid_argument);
}

TEST(Knn, SparseCosineEqualsDenseCosine) {
  auto sys = buildSystem(smallSig(), cfg(2));
  const auto& sig = sys.signature();
  RandomStream rng(4);
  for (int i = 0; i < 50; ++i) {
    auto a = toRowMatrix(encode(randomTree(sig, rng, 10), sys), sys);
    auto b = toRowMatrix(encode(randomTree(sig, rng, 10), sys), sys);
    for (std::size_t k = 0; k < a.rows.size(); ++k)
      EXPECT_EQ(detail::sparseCosine(detail::sparse(a.rows[k]), detail::sparse(b.rows[k])), cosine(a.rows[k], b.rows[k]));
  }
}

TEST(SyntheticCorpus, FiveClassesAllRepresentable) {
  auto corpus = syntheticClauseCorpus(40, 5, RandomStream(1));
  ASSERT_EQ(corpus.size(), 200U);
  std::set<std::string> labels;
  std::vector<std::string> lines;
  for (const auto& x : corpus) {
    labels.insert(x.label);
    lines.push_back(x.text);
  }
  EXPECT_EQ(labels.size(), 5U);
  auto sig = clauseSignature();
  PlaceholderBinder binder(sig);
  for (const auto& item : loadCorpus(lines, Domain::clauseAnonymous, sig, binder)) EXPECT_TRUE(item.graph) << item.error;
  auto again = syntheticClauseCorpus(40, 5, RandomStream(1));
  EXPECT_EQ(again.front().text, corpus.front().text);
  EXPECT_EQ(again.back().text, corpus.back().text);
}

}  // namespace
}  // namespace satvec
