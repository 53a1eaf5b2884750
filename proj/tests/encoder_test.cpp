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

#include <numeric>

#include "satvec/encoder.hpp"

namespace satvec {
namespace {

SystemConfig cfg(std::uint32_t w, std::uint32_t t, std::uint64_t seed = 3) {
  SystemConfig c;
  c.widths = {w, w, w, w, w};
  c.t = t;
  c.seed = seed;
  return c;
}

std::shared_ptr<const Signature> smallSig(std::uint32_t maxParents = 2) {
  SignatureOptions opt;
  opt.maxParents = maxParents;
  return std::make_shared<const Signature>(
      declareSignature({{"f", 2}, {"s", 3, Ordering::unordered}, {"h", 1}},
                       {{"g", 1}, {"k", 2}, {"a", 0}, {"b", 0}, {"x", 0}, {"y", 0}, {"z", 0}}, opt));
}

std::uint64_t setTotal(const CountVector& v, const ConstraintSystem& sys, std::size_t i) {
  auto s = v.slice(sys.offset(i), sys.offset(i) + sys.set(i).size());
  return std::accumulate(s.begin(), s.end(), std::uint64_t{0});
}

TEST(Encode, TwoLeafTreeTallies) {
  auto sig = smallSig();
  for (std::uint32_t t : {1U, 2U, 5U}) {
    auto sys = buildSystem(sig, cfg(2, t));
    auto v = encode(parseTerm("f(a,b)", *sig), sys);
    // 3 symbols, and per set: one node constraint plus a parent constraint per leaf.
    EXPECT_EQ(v.total(), 3U + 3U * t);
    EXPECT_EQ(v[sig->require("f", 2)], 1U);
    for (std::size_t i = 0; i < t; ++i) EXPECT_EQ(setTotal(v, sys, i), 3U);
  }
}

TEST(Encode, EmptyGraphGivesZeroVector) {
  auto sys = buildSystem(smallSig(), cfg(2, 2));
  auto v = encode(Graph{}, sys);
  EXPECT_EQ(v.size(), sys.vectorLength());
  EXPECT_EQ(v.total(), 0U);
}

TEST(Encode, RootHasNoParentConstraint) {
  auto sig = smallSig();
  auto sys = buildSystem(sig, cfg(2, 1));
  auto v = encode(parseTerm("h(a)", *sig), sys);
  std::uint64_t parentTally = 0;
  for (std::size_t k = 0; k < sys.set(0).size(); ++k)
    if (sys.set(0)[k].family == Family::parent) parentTally += v[sys.indexOf(0, k)];
  EXPECT_EQ(parentTally, 1U);
}

TEST(Encode, RepeatedArgumentsCountOnce) {
  auto sig = smallSig(3);
  auto sys = buildSystem(sig, cfg(3, 1));
  Graph g;
  auto x = g.add(sig->require("x", 0));
  g.add(sig->require("s", 3), {x, x, x});
  auto v = encode(g, sys);
  EXPECT_EQ(v[sig->require("x", 0)], 1U);
  EXPECT_EQ(v[sig->require("s", 3)], 1U);
  auto t = encode(parseTerm("s(x,x,x)", *sig), sys);
  EXPECT_EQ(t[sig->require("x", 0)], 3U);
}

TEST(Encode, UnorderedArgumentsArePermutationInvariant) {
  auto sig = smallSig();
  auto sys = buildSystem(sig, cfg(2, 3));
  auto v = encode(parseTerm("s(x,g(y),z)", *sig), sys);
  EXPECT_EQ(v, encode(parseTerm("s(g(y),z,x)", *sig), sys));
  EXPECT_EQ(v, encode(parseTerm("s(z,x,g(y))", *sig), sys));
}

TEST(Encode, OrderedArgumentsCanBeDistinguished) {
  auto sig = smallSig();
  bool distinguished = false;
  for (std::uint64_t seed = 0; seed < 20 && !distinguished; ++seed) {
    auto sys = buildSystem(sig, cfg(4, 2, seed));
    distinguished = encode(parseTerm("f(a,g(b))", *sig), sys) != encode(parseTerm("f(g(b),a)", *sig), sys);
  }
  EXPECT_TRUE(distinguished);
}

TEST(Encode, NodeOrderDoesNotMatter) {
  auto sig = smallSig();
  auto sys = buildSystem(sig, cfg(2, 2));
  Graph g;
  auto k = g.add(sig->require("k", 2), {1, 2});
  g.add(sig->require("a", 0));
  g.add(sig->require("b", 0));
  g.add(sig->require("h", 1), {k});
  EXPECT_EQ(encode(g, sys), encode(parseTerm("h(k(a,b))", *sig), sys));
}

TEST(Encode, LengthIsFixed) {
  auto sig = smallSig();
  auto sys = buildSystem(sig, cfg(2, 4));
  for (const char* term : {"h(a)", "f(k(a,b),g(g(x)))", "s(x,y,z); h(b)"})
    EXPECT_EQ(encode(parseTerm(term, *sig), sys).size(), sys.vectorLength());
}

TEST(Encode, InvalidGraphIsRejected) {
  auto sig = smallSig(1);
  auto sys = buildSystem(sig, cfg(2, 1));
  Graph g;
  auto a = g.add(sig->require("a", 0));
  g.add(sig->require("f", 2), {a, a});
  EXPECT_THROW(encode(g, sys), EncodeError);
}

TEST(Encode, SentencePastLastPositionIsRejected) {
  SignatureOptions opt;
  opt.sequence = SequenceDecl{"f", 2, 1, "EOS"};
  auto sig = declareSignature({}, {{"a", 0, Ordering::ordered, 1}}, opt);
  auto sys = buildSystem(sig, cfg(2, 1));
  const auto& set = sys.set(0);
  const SymbolId a = sig.require("a", 0);
  std::vector<SymbolId> entries{a};
  EXPECT_THROW(matchSequence(set, sig, 3, entries, true), MatchError);
  EXPECT_NO_THROW(matchSequence(set, sig, 2, entries, true));
}

TEST(Encode, MatchedConstraintsContainTheirNode) {
  auto sig = smallSig();
  auto sys = buildSystem(sig, cfg(2, 2));
  auto g = parseTerm("f(k(a,b),g(x))", *sig);
  auto masked = applyMasks(g, *sig);
  auto d = decompose(masked, sys);
  const auto parents = masked.parents();
  for (std::size_t i = 0; i < sys.t(); ++i) {
    const auto& set = sys.set(i);
    for (std::size_t k = 0; k < set.size(); ++k) {
      if (!d.constraintCounts[i][k] || set[k].family == Family::parent) continue;
      bool found = false;
      for (NodeId v = 0; v < masked.size(); ++v) {
        std::vector<SymbolId> args;
        for (NodeId a : masked[v].args) args.push_back(masked[a].symbol);
        if (!masked[v].args.empty() && matches(set, set[k], masked[v].symbol, args)) found = true;
      }
      EXPECT_TRUE(found);
    }
  }
}

TEST(CountVector, SerializationRoundTrip) {
  auto sig = smallSig();
  auto sys = buildSystem(sig, cfg(2, 2));
  auto v = encode(parseTerm("f(k(a,b),g(x))", *sig), sys);
  auto text = v.serialize(sys);
  EXPECT_EQ(CountVector::parse(text, sys), v);
  auto other = buildSystem(sig, cfg(2, 2, 99));
  EXPECT_THROW(CountVector::parse(text, other), std::invalid_argument);
  EXPECT_THROW(CountVector::parse(text + "3:-1\n", sys), std::invalid_argument);
  EXPECT_THROW(CountVector::parse(text + "3:1.5\n", sys), std::invalid_argument);
}

}  // namespace
}  // namespace satvec
