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

#include <bit>
#include <sstream>

#include "satvec/cardinality.hpp"
#include "satvec/rng.hpp"
#include "satvec/sat.hpp"

namespace satvec::sat {
namespace {

bool bruteForceSat(const Cnf& cnf) {
  for (std::uint64_t m = 0; m < (1ULL << cnf.vars); ++m) {
    bool all = true;
    for (const auto& c : cnf.clauses) {
      bool any = false;
      for (int l : c) any |= (((m >> (std::abs(l) - 1)) & 1ULL) != 0) == (l > 0);
      if (!any) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

bool satisfies(const Cnf& cnf, const Result& r) {
  for (const auto& c : cnf.clauses) {
    bool any = false;
    for (int l : c) any |= r.value(std::abs(l)) == (l > 0);
    if (!any) return false;
  }
  return true;
}

Cnf randomCnf(RandomStream& rng, int vars, int clauses, int width) {
  Cnf cnf;
  cnf.vars = vars;
  for (int i = 0; i < clauses; ++i) {
    std::vector<int> c;
    for (int k = 0; k < width; ++k) {
      const int v = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(vars)));
      c.push_back(rng.below(2) ? v : -v);
    }
    cnf.add(std::move(c));
  }
  return cnf;
}

TEST(Solver, TrivialCases) {
  Solver s;
  s.reserveVars(1);
  EXPECT_EQ(s.solve().status, Status::sat);
  s.addClause({1});
  s.addClause({-1});
  EXPECT_EQ(s.solve().status, Status::unsat);
  Solver empty;
  EXPECT_EQ(empty.solve().status, Status::sat);
}

TEST(Solver, AgreesWithBruteForceOnRandom3Sat) {
  RandomStream rng(7);
  int satCount = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const int vars = 3 + static_cast<int>(rng.below(10));
    const int clauses = static_cast<int>(vars * (3.0 + rng.uniform() * 2.5));
    Cnf cnf = randomCnf(rng, vars, clauses, 3);
    Solver s;
    s.load(cnf);
    auto r = s.solve();
    ASSERT_NE(r.status, Status::unknown);
    EXPECT_EQ(r.status == Status::sat, bruteForceSat(cnf)) << trial;
    if (r.status == Status::sat) {
      ++satCount;
      EXPECT_TRUE(satisfies(cnf, r));
    }
  }
  EXPECT_GT(satCount, 50);
  EXPECT_LT(satCount, 350);
}

TEST(Solver, IncrementalBlockingEnumeratesAllModels) {
  // x1 xor x2 xor x3 has exactly 4 models.
  Solver s;
  for (auto c : std::vector<std::vector<int>>{{1, 2, 3}, {1, -2, -3}, {-1, 2, -3}, {-1, -2, 3}}) s.addClause(c);
  int models = 0;
  for (;;) {
    auto r = s.solve();
    if (r.status != Status::sat) break;
    ++models;
    std::vector<int> block;
    for (int v = 1; v <= 3; ++v) block.push_back(r.value(v) ? -v : v);
    s.addClause(block);
  }
  EXPECT_EQ(models, 4);
}

Cnf pigeonhole(int holes) {
  Cnf cnf;
  const int pigeons = holes + 1;
  auto x = [&](int p, int h) { return p * holes + h + 1; };
  cnf.vars = pigeons * holes;
  for (int p = 0; p < pigeons; ++p) {
    std::vector<int> c;
    for (int h = 0; h < holes; ++h) c.push_back(x(p, h));
    cnf.add(c);
  }
  for (int h = 0; h < holes; ++h)
    for (int p = 0; p < pigeons; ++p)
      for (int q = p + 1; q < pigeons; ++q) cnf.add({-x(p, h), -x(q, h)});
  return cnf;
}

TEST(Solver, ProvesSmallPigeonholeUnsat) {
  Solver s;
  s.load(pigeonhole(6));
  EXPECT_EQ(s.solve(Deadline::after(30)).status, Status::unsat);
}

TEST(Solver, HonoursDeadline) {
  Solver s;
  s.load(pigeonhole(12));
  const auto start = Deadline::Clock::now();
  auto r = s.solve(Deadline::after(0.2));
  const double elapsed = std::chrono::duration<double>(Deadline::Clock::now() - start).count();
  EXPECT_EQ(r.status, Status::unknown);
  EXPECT_LT(elapsed, 2.0);
}

TEST(Solver, HonoursCancellation) {
  Solver s;
  s.load(pigeonhole(12));
  std::atomic<bool> cancel{true};
  EXPECT_EQ(s.solve({}, &cancel).status, Status::unknown);
}

TEST(Dimacs, RoundTrip) {
  RandomStream rng(3);
  Cnf cnf = randomCnf(rng, 8, 20, 3);
  std::istringstream in("c hello\n" + cnf.dimacs());
  Cnf back = Cnf::parseDimacs(in);
  EXPECT_EQ(back.vars, cnf.vars);
  EXPECT_EQ(back.clauses, cnf.clauses);
}

TEST(Dimacs, RejectsMalformedInput) {
  for (const char* text : {"1 2 0\n", "p cnf 2 1\n1 3 0\n", "p cnf 2 2\n1 2 0\n", "p dnf 2 1\n1 0\n",
                           "p cnf 2 1\n1 x 0\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(Cnf::parseDimacs(in), std::invalid_argument) << text;
  }
}

TEST(SolverOutput, RoundTrip) {
  Result r;
  r.status = Status::sat;
  r.model = {false, true, false, true};
  std::stringstream io;
  writeSolverOutput(io, r);
  auto back = parseSolverOutput(io, 3);
  EXPECT_EQ(back.status, Status::sat);
  EXPECT_EQ(back.model, r.model);
}

TEST(ProcessSession, ReportsMissingCommand) {
  ProcessSession s("/nonexistent/solver-binary");
  s.addClause({1});
  EXPECT_THROW(s.solve(Deadline::after(5)), BackendError);
}

TEST(ProcessSession, KillsOnDeadline) {
  ProcessSession s("sleep 20 #");
  s.addClause({1});
  const auto start = Deadline::Clock::now();
  auto r = s.solve(Deadline::after(0.2));
  EXPECT_EQ(r.status, Status::unknown);
  EXPECT_LT(std::chrono::duration<double>(Deadline::Clock::now() - start).count(), 5.0);
}

TEST(ProcessSession, ParsesCompetitionOutput) {
  ProcessSession s("printf 's SATISFIABLE\\nv -1 2 0\\n' #");
  s.addClause({-1});
  s.addClause({2});
  auto r = s.solve(Deadline::after(5));
  ASSERT_EQ(r.status, Status::sat);
  EXPECT_FALSE(r.value(1));
  EXPECT_TRUE(r.value(2));
}

// For every assignment of the n inputs, the encoding must be satisfiable
// exactly when the popcount is k.
void checkCardinality(std::size_t n, std::size_t k, const CardinalityPolicy& policy) {
  for (std::uint32_t m = 0; m < (1U << n); ++m) {
    Cnf cnf;
    std::vector<int> lits;
    for (std::size_t i = 0; i < n; ++i) lits.push_back(cnf.newVar());
    exactly(cnf, lits, k, policy);
    for (std::size_t i = 0; i < n; ++i) cnf.add({((m >> i) & 1U) ? lits[i] : -lits[i]});
    Solver s;
    s.load(cnf);
    const bool expected = static_cast<std::size_t>(std::popcount(m)) == k;
    EXPECT_EQ(s.solve().status == Status::sat, expected) << "n=" << n << " k=" << k << " m=" << m;
  }
}

TEST(Cardinality, ExactlyKMatchesPopcount) {
  for (auto amo : {AmoEncoding::pairwise, AmoEncoding::sequential})
    for (std::size_t n = 0; n <= 6; ++n)
      for (std::size_t k = 0; k <= n + 1; ++k) checkCardinality(n, k, CardinalityPolicy{amo, 16});
}

TEST(Cardinality, PairwiseClauseCount) {
  Cnf cnf;
  std::vector<int> lits{cnf.newVar(), cnf.newVar(), cnf.newVar(), cnf.newVar()};
  exactlyOne(cnf, lits);
  EXPECT_EQ(cnf.clauses.size(), 1U + 6U);
  EXPECT_EQ(cnf.vars, 4);
}

}  // namespace
}  // namespace satvec::sat
