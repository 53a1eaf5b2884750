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

#include "satvec/generate.hpp"
#include "satvec/graph.hpp"

namespace satvec {
namespace {

bool has(const std::vector<Violation>& v, ViolationKind k) {
  return std::any_of(v.begin(), v.end(), [k](const Violation& x) { return x.kind == k; });
}

Signature basic(std::uint32_t maxParents = 1) {
  SignatureOptions opt;
  opt.maxParents = maxParents;
  return declareSignature({{"f", 2}, {"h", 1}, {"r", 6}, {"|", 2, Ordering::unordered}},
                          {{"g", 1}, {"f", 2}, {"a", 0}, {"b", 0}, {"p", 0}, {"q", 0}}, opt);
}

TEST(Validate, AcceptsSimpleTree) {
  auto sig = basic();
  auto g = parseTerm("f(a,b)", sig);
  EXPECT_TRUE(validate(g, sig).empty());
  EXPECT_EQ(g.roots().size(), 1U);
}

TEST(Validate, RejectsTooManyParents) {
  auto sig = basic(5);
  Graph g;
  auto a = g.add(sig.require("a", 0));
  g.add(sig.require("r", 6), {a, a, a, a, a, a});
  auto v = validate(g, sig);
  ASSERT_TRUE(has(v, ViolationKind::tooManyParents));
  EXPECT_NE(v.front().message.find("too many parents"), std::string::npos);
}

TEST(Validate, SharedNodeWithinBoundIsFine) {
  auto sig = basic(2);
  Graph g;
  auto a = g.add(sig.require("a", 0));
  g.add(sig.require("f", 2), {a, a});
  EXPECT_TRUE(validate(g, sig).empty());
}

TEST(Validate, ReportsCycle) {
  auto sig = basic();
  Graph g;
  auto x = g.add(sig.require("g", 1), {1});
  g.add(sig.require("g", 1), {x});
  EXPECT_TRUE(has(validate(g, sig), ViolationKind::cycle));
}

TEST(Validate, ReportsArityAndKindErrors) {
  auto sig = basic();
  Graph g;
  auto a = g.add(sig.require("a", 0));
  g.add(sig.require("g", 1), {a, a});
  auto v = validate(g, sig);
  EXPECT_TRUE(has(v, ViolationKind::arityMismatch));
  EXPECT_TRUE(has(v, ViolationKind::rootKind));

  Graph h;
  auto inner = h.add(sig.require("h", 1), {h.add(sig.require("a", 0))});
  h.add(sig.require("g", 1), {inner});
  EXPECT_TRUE(has(validate(h, sig), ViolationKind::internalKind));
}

TEST(Validate, ReportsDanglingEdge) {
  auto sig = basic();
  Graph g;
  g.add(sig.require("h", 1), {7});
  EXPECT_TRUE(has(validate(g, sig), ViolationKind::danglingEdge));
}

TEST(Validate, EmptyGraphIsValid) {
  auto sig = basic();
  EXPECT_TRUE(validate(Graph{}, sig).empty());
}

TEST(Canonical, UnorderedArgumentsAreSorted) {
  auto sig = basic();
  EXPECT_EQ(canonicalText(parseTerm("|(q,p)", sig), sig), "|(p,q)");
  EXPECT_EQ(canonicalText(parseTerm("|(p,q)", sig), sig), "|(p,q)");
  EXPECT_EQ(canonicalText(parseTerm("f(b,a)", sig), sig), "f(b,a)");
}

TEST(Canonical, SharingIsVisible) {
  auto sig = basic(2);
  Graph shared;
  auto a = shared.add(sig.require("a", 0));
  shared.add(sig.require("f", 2), {a, a});
  EXPECT_EQ(canonicalText(shared, sig), "f(#1=a,#1)");
  EXPECT_EQ(canonicalText(parseTerm("f(a,a)", sig), sig), "f(a,a)");
}

TEST(Canonical, ForestRootsSortedAndNodeOrderIrrelevant) {
  auto sig = basic();
  auto one = parseTerm("h(b); f(a,g(b))", sig);
  Graph two;
  auto b = two.add(sig.require("b", 0));
  auto gb = two.add(sig.require("g", 1), {b});
  auto a = two.add(sig.require("a", 0));
  two.add(sig.require("f", 2), {a, gb});
  two.add(sig.require("h", 1), {two.add(sig.require("b", 0))});
  EXPECT_EQ(canonicalText(one, sig), canonicalText(two, sig));
  EXPECT_EQ(canonicalText(one, sig), "f(a,g(b)); h(b)");
}

TEST(ParseTerm, ReportsErrorsWithOffset) {
  auto sig = basic();
  try {
    parseTerm("f(a,b", sig);
    FAIL();
  } catch (const TermSyntaxError& e) {
    EXPECT_EQ(e.position, 5U);
  }
  EXPECT_THROW(parseTerm("zz(a)", sig), TermSyntaxError);
  EXPECT_THROW(parseTerm("f(a,b) x", sig), TermSyntaxError);
}

TEST(Graph, DepthsAreShortestDistances) {
  auto sig = basic(2);
  Graph g;
  auto a = g.add(sig.require("a", 0));
  auto ga = g.add(sig.require("g", 1), {a});
  g.add(sig.require("f", 2), {a, ga});
  auto d = g.depths();
  EXPECT_EQ(*d[2], 0U);
  EXPECT_EQ(*d[1], 1U);
  EXPECT_EQ(*d[0], 1U);
}

TEST(RandomTree, RespectsBudgetAndValidates) {
  auto sig = basic();
  RandomStream rng(3);
  std::size_t largest = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t budget = 3 + trial % 10;
    Graph g = randomTree(sig, rng, budget, 0.7);
    EXPECT_LE(g.size(), budget);
    EXPECT_TRUE(validate(g, sig).empty()) << canonicalText(g, sig);
    EXPECT_EQ(g.roots().size(), 1U);
    largest = std::max(largest, g.size());
  }
  EXPECT_EQ(largest, 12U);
}

}  // namespace
}  // namespace satvec
