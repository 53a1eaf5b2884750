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

#include <algorithm>

#include "satvec/decoder.hpp"
#include "satvec/generate.hpp"
#include "satvec/rng.hpp"

namespace satvec {
namespace {

SystemConfig cfg(std::uint32_t w, std::uint32_t t, std::uint64_t seed = 1) {
  SystemConfig c;
  c.widths = {w, w, w, w, w};
  c.t = t;
  c.seed = seed;
  return c;
}

std::shared_ptr<const Signature> smallSig(bool masks = false, std::uint32_t maxParents = 1) {
  SignatureOptions opt;
  opt.maxParents = maxParents;
  opt.argNumberMask = masks;
  return std::make_shared<const Signature>(
      declareSignature({{"f", 2}, {"h", 1}, {"s", 2, Ordering::unordered, {}}},
                       {{"g", 1}, {"k", 2}, {"u", 2, Ordering::unordered, {}}, {"a", 0}, {"b", 0}, {"c", 0}}, opt));
}

// The graph's own assignment must satisfy the formula built from its vector.
void expectSound(const Graph& g, const ConstraintSystem& sys) {
  const Graph masked = applyMasks(g, sys.signature());
  const auto v = encode(g, sys);
  const auto m = extractMultisets(v, sys);
  const auto f = buildFormula(enumerateTuples(m, collectAssociations(m, sys), sys), m, sys);
  const auto units = inducedAssignment(masked, f, m, sys);
  sat::Solver solver;
  solver.load(f.cnf);
  for (int u : units) solver.addClause({u});
  EXPECT_EQ(solver.solve().status, sat::Status::sat) << canonicalText(g, sys.signature());
}

TEST(Multisets, ZeroVectorIsEmpty) {
  auto sys = buildSystem(smallSig(), cfg(2, 2));
  auto m = extractMultisets(CountVector(std::vector<std::uint32_t>(sys.vectorLength(), 0)), sys);
  EXPECT_TRUE(m.empty());
  for (const auto& set : m.instances) EXPECT_TRUE(set.empty());
}

TEST(Multisets, TwoLeafTree) {
  auto sig = smallSig();
  auto sys = buildSystem(sig, cfg(2, 2));
  auto m = extractMultisets(encode(parseTerm("f(a,b)", *sig), sys), sys);
  ASSERT_EQ(m.symbols.size(), 3U);
  EXPECT_EQ(m.count(sig->require("f", 2)), 1U);
  for (const auto& set : m.instances) EXPECT_EQ(set.size(), 3U);
}

TEST(Multisets, RejectsWrongLength) {
  auto sys = buildSystem(smallSig(), cfg(2, 1));
  EXPECT_THROW(extractMultisets(CountVector(std::vector<std::uint32_t>(3, 0)), sys), std::invalid_argument);
}

TEST(Associations, LeadCombinationsOfTwoLeafTree) {
  auto sig = smallSig();
  auto sys = buildSystem(sig, cfg(2, 2));
  auto m = extractMultisets(encode(parseTerm("f(a,b)", *sig), sys), sys);
  auto a = collectAssociations(m, sys);
  EXPECT_EQ(a.leadCombinations(sig->require("f", 2), true).size(), 1U);
  EXPECT_TRUE(a.leadCombinations(sig->require("h", 1), true).empty());
  EXPECT_TRUE(a.leadCombinations(sig->require("f", 2), false).empty());
}

TEST(Tuples, ShapeRules) {
  auto sig = smallSig();
  auto sys = buildSystem(sig, cfg(2, 3));
  auto m = extractMultisets(encode(parseTerm("f(g(a),k(b,c))", *sig), sys), sys);
  auto tuples = enumerateTuples(m, collectAssociations(m, sys), sys);
  ASSERT_FALSE(tuples.empty());
  for (const auto& r : tuples) {
    EXPECT_EQ(r.lead.empty(), (*sig)[r.s].leaf());
    if (r.root()) {
      EXPECT_TRUE(r.parentLead.empty());
      EXPECT_TRUE(r.parentInst.empty());
      continue;
    }
    EXPECT_EQ(r.parentLead.size(), 3U);
    EXPECT_EQ(r.parentInst.size(), 3U);
    // Ordered parents keep one argument position in every set.
    if ((*sig)[r.p].ordering == Ordering::ordered) {
      EXPECT_TRUE(std::all_of(r.argSlot.begin(), r.argSlot.end(), [&](auto j) { return j == r.argSlot[0]; }));
    }
  }
}

TEST(Formula, SingleLeafIsForced) {
  auto sig = std::make_shared<const Signature>(declareSignature({{"a", 0}}, {}));
  auto sys = buildSystem(sig, cfg(2, 2));
  auto v = encode(parseTerm("a", *sig), sys);
  auto m = extractMultisets(v, sys);
  auto f = buildFormula(enumerateTuples(m, collectAssociations(m, sys), sys), m, sys);
  ASSERT_EQ(f.tuples.size(), 1U);
  sat::Solver s;
  s.load(f.cnf);
  s.addClause({-f.tupleVar(0)});
  EXPECT_EQ(s.solve().status, sat::Status::unsat);
}

TEST(Decode, TwoLeafTreeUsesExactlyThreeTuples) {
  auto sig = smallSig();
  auto sys = buildSystem(sig, cfg(2, 2));
  auto v = encode(parseTerm("f(a,b)", *sig), sys);
  auto m = extractMultisets(v, sys);
  auto f = buildFormula(enumerateTuples(m, collectAssociations(m, sys), sys), m, sys);
  sat::Solver s;
  s.load(f.cnf);
  auto r = s.solve();
  ASSERT_EQ(r.status, sat::Status::sat);
  std::size_t trueTuples = 0;
  for (std::size_t k = 0; k < f.tuples.size(); ++k) trueTuples += r.value(f.tupleVar(k));
  EXPECT_EQ(trueTuples, 3U);
  auto result = decode(v, sys);
  ASSERT_TRUE(result.ok()) << result.diagnostic;
  EXPECT_EQ(canonicalText(result.graph, *sig), "f(a,b)");
}

TEST(Decode, ZeroVectorGivesEmptyGraph) {
  auto sys = buildSystem(smallSig(), cfg(2, 2));
  auto r = decode(CountVector(std::vector<std::uint32_t>(sys.vectorLength(), 0)), sys);
  EXPECT_TRUE(r.ok());
  EXPECT_TRUE(r.graph.empty());
}

TEST(Decode, ForeignVectorIsUnsat) {
  auto sig = smallSig();
  auto sys = buildSystem(sig, cfg(2, 2));
  auto v = encode(parseTerm("f(a,b)", *sig), sys);
  auto counts = v.counts();
  counts[sig->require("c", 0)] += 1;  // a symbol no constraint accounts for
  auto r = decode(CountVector(counts), sys, DecodeOptions{.verify = true});
  EXPECT_EQ(r.status, DecodeStatus::unsat);
}

TEST(Decode, SharedNodeTuplesFormOneGroup) {
  SignatureOptions opt;
  opt.maxParents = 2;
  auto sig = std::make_shared<const Signature>(
      declareSignature({{"r", 2}}, {{"h", 1}, {"k", 1}, {"g", 1}, {"a", 0}}, opt));
  auto sys = buildSystem(sig, cfg(2, 3));
  Graph g;
  auto ga = g.add(sig->require("g", 1), {g.add(sig->require("a", 0))});
  g.add(sig->require("r", 2), {g.add(sig->require("h", 1), {ga}), g.add(sig->require("k", 1), {ga})});
  auto v = encode(g, sys);
  auto m = extractMultisets(v, sys);
  auto f = buildFormula(enumerateTuples(m, collectAssociations(m, sys), sys), m, sys);
  auto units = inducedAssignment(g, f, m, sys);
  std::vector<std::uint32_t> gTuples;
  for (int u : units)
    if (u > 0 && static_cast<std::size_t>(u) <= f.tuples.size() && f.tuples[u - 1].s == sig->require("g", 1))
      gTuples.push_back(static_cast<std::uint32_t>(u - 1));
  ASSERT_EQ(gTuples.size(), 2U);
  EXPECT_EQ(f.groupOf[gTuples[0]], f.groupOf[gTuples[1]]);
  // A tuple at t = 3 carries three instances in every association.
  const Tuple& x = f.tuples[gTuples[0]];
  EXPECT_EQ(x.lead.size(), 3U);
  EXPECT_EQ(x.parentLead.size(), 3U);
  EXPECT_EQ(x.parentInst.size(), 3U);
  auto r = decode(v, sys, DecodeOptions{.verify = true});
  ASSERT_TRUE(r.ok()) << r.diagnostic;
  EXPECT_EQ(canonicalText(r.graph, *sig), canonicalText(g, *sig));
}

TEST(Decode, FormulaIsSoundOnRandomTrees) {
  for (bool masks : {false, true}) {
    auto sig = smallSig(masks);
    auto sys = buildSystem(sig, cfg(2, 2, 9));
    RandomStream rng(42);
    for (int trial = 0; trial < 40; ++trial) expectSound(randomTree(*sig, rng, 10), sys);
  }
}

TEST(Decode, FormulaIsSoundWithSharing) {
  auto sig = smallSig(false, 2);
  auto sys = buildSystem(sig, cfg(2, 2, 4));
  Graph g;
  auto a = g.add(sig->require("a", 0));
  auto ga = g.add(sig->require("g", 1), {a});
  g.add(sig->require("f", 2), {g.add(sig->require("k", 2), {ga, a}), ga});
  expectSound(g, sys);
}

TEST(Decode, VerifiedRoundTripOnMaskedTrees) {
  // Swapping subtrees between nodes with identical local contexts keeps every
  // count, so some trees collide with another one. Those decode to the
  // collision partner, which must still re-encode to the same vector.
  auto sig = smallSig(true);
  auto sys = buildSystem(sig, cfg(4, 3, 5));
  RandomStream rng(8);
  int exact = 0, total = 0;
  for (int trial = 0; trial < 60; ++trial) {
    Graph g = randomTree(*sig, rng, 12);
    auto v = encode(g, sys);
    auto r = decode(v, sys, DecodeOptions{.verify = true, .budgetSeconds = 5});
    ++total;
    ASSERT_TRUE(r.ok()) << decodeStatusName(r.status) << " " << r.diagnostic << " " << canonicalText(g, *sig);
    EXPECT_EQ(encode(r.graph, sys), v);
    exact += canonicalText(r.graph, *sig) == canonicalText(g, *sig);
  }
  EXPECT_GE(exact * 100, total * 85);
}

TEST(Decode, CollisionsAreGenuine) {
  auto sig = smallSig(true);
  auto sys = buildSystem(sig, cfg(4, 3, 5));
  auto a = parseTerm("h(k(k(b,g(a)),g(g(c))))", *sig);
  auto b = parseTerm("h(k(k(b,g(g(c))),g(a)))", *sig);
  EXPECT_NE(canonicalText(a, *sig), canonicalText(b, *sig));
  EXPECT_EQ(encode(a, sys), encode(b, sys));
  auto r = decode(encode(a, sys), sys, DecodeOptions{.verify = true, .maxSolutions = 4});
  ASSERT_TRUE(r.ok());
  std::vector<std::string> texts{canonicalText(r.graph, *sig)};
  for (const auto& alt : r.alternatives) texts.push_back(canonicalText(alt, *sig));
  EXPECT_NE(std::find(texts.begin(), texts.end(), canonicalText(a, *sig)), texts.end());
  EXPECT_NE(std::find(texts.begin(), texts.end(), canonicalText(b, *sig)), texts.end());
}

TEST(Decode, UniqueModeReportsAmbiguity) {
  auto sig = smallSig(true);
  auto sys = buildSystem(sig, cfg(4, 3, 5));
  auto a = parseTerm("h(k(k(b,g(a)),g(g(c))))", *sig);
  auto r = decode(encode(a, sys), sys, DecodeOptions{.unique = true});
  EXPECT_EQ(r.status, DecodeStatus::ambiguous);
  EXPECT_EQ(r.alternatives.size(), 1U);

  auto single = parseTerm("h(g(a))", *sig);
  auto s = decode(encode(single, sys), sys, DecodeOptions{.unique = true});
  ASSERT_EQ(s.status, DecodeStatus::decoded);
  EXPECT_EQ(canonicalText(s.graph, *sig), canonicalText(single, *sig));
  EXPECT_TRUE(s.alternatives.empty());
}

TEST(Decode, CycleNogoodsAreNecessary) {
  auto sig = std::make_shared<const Signature>(declareSignature({{"h", 1}}, {{"f", 1}, {"g", 1}, {"a", 0}}));
  auto sys = buildSystem(sig, cfg(1, 1));
  auto v = encode(parseTerm("h(f(g(a)))", *sig), sys);
  auto m = extractMultisets(v, sys);
  auto tuples = enumerateTuples(m, collectAssociations(m, sys), sys);

  auto models = [&](bool nogoods) {
    FormulaOptions fo;
    fo.nogoods = nogoods;
    auto f = buildFormula(tuples, m, sys, fo);
    sat::Solver s;
    s.load(f.cnf);
    std::vector<Graph> out;
    for (;;) {
      auto r = s.solve();
      if (r.status != sat::Status::sat) break;
      out.push_back(modelToGraph(r, f, sys, m));
      std::vector<int> block;
      for (std::size_t k = 0; k < f.tuples.size(); ++k) block.push_back(r.value(f.tupleVar(k)) ? -f.tupleVar(k) : f.tupleVar(k));
      s.addClause(block);
    }
    return out;
  };
  auto cyclic = [&](const Graph& g) {
    auto viol = validate(g, *sig);
    return std::any_of(viol.begin(), viol.end(), [](const Violation& x) { return x.kind == ViolationKind::cycle; });
  };
  auto without = models(false);
  auto with = models(true);
  EXPECT_TRUE(std::any_of(without.begin(), without.end(), cyclic));
  ASSERT_FALSE(with.empty());
  EXPECT_TRUE(std::none_of(with.begin(), with.end(), cyclic));

  auto off = decode(v, sys, DecodeOptions{.maxSolutions = 1});
  EXPECT_TRUE(off.ok());
  DecodeOptions lazy;
  lazy.cycles = CycleMode::lazy;
  lazy.verify = true;
  auto r = decode(v, sys, lazy);
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(validate(r.graph, *sig).empty());
}

TEST(Decode, EnumeratesAlternatives) {
  auto sig = std::make_shared<const Signature>(declareSignature({{"h", 1}}, {{"f", 1}, {"g", 1}, {"a", 0}}));
  auto sys = buildSystem(sig, cfg(1, 1));
  auto v = encode(parseTerm("h(f(g(a)))", *sig), sys);
  DecodeOptions opt;
  opt.verify = true;
  opt.maxSolutions = 10;
  auto r = decode(v, sys, opt);
  ASSERT_TRUE(r.ok());
  std::vector<std::string> texts{canonicalText(r.graph, *sig)};
  for (const auto& alt : r.alternatives) texts.push_back(canonicalText(alt, *sig));
  std::sort(texts.begin(), texts.end());
  EXPECT_EQ(texts, (std::vector<std::string>{"h(f(g(a)))", "h(g(f(a)))"}));
}

TEST(Decode, AuditFilesAreWritten) {
  auto sig = smallSig();
  auto sys = buildSystem(sig, cfg(2, 1));
  const auto prefix = (std::filesystem::temp_directory_path() / "satvec-audit-test").string();
  DecodeOptions opt;
  opt.auditPrefix = prefix;
  ASSERT_TRUE(decode(encode(parseTerm("f(a,b)", *sig), sys), sys, opt).ok());
  std::ifstream cnf(prefix + ".cnf"), map(prefix + ".map");
  auto parsed = sat::Cnf::parseDimacs(cnf);
  EXPECT_GT(parsed.vars, 0);
  std::string first;
  std::getline(map, first);
  EXPECT_NE(first.find("tuple"), std::string::npos);
}

}  // namespace
}  // namespace satvec
