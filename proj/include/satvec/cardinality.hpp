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

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "satvec/sat.hpp"

namespace satvec::sat {

enum class AmoEncoding {
  pairwise,    // n(n-1)/2 binary clauses, no auxiliaries
  sequential,  // ladder with n-1 auxiliaries, 3n clauses
  automatic,   // pairwise up to `pairwiseLimit` literals, sequential above
};

struct CardinalityPolicy {
  AmoEncoding amo = AmoEncoding::automatic;
  std::size_t pairwiseLimit = 16;
};

inline void atMostOne(Cnf& cnf, const std::vector<int>& lits, const CardinalityPolicy& policy = {}) {
  const std::size_t n = lits.size();
  if (n < 2) return;
  const bool pairwise = policy.amo == AmoEncoding::pairwise ||
                        (policy.amo == AmoEncoding::automatic && n <= policy.pairwiseLimit);
  if (pairwise) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) cnf.add({-lits[i], -lits[j]});
    return;
  }
  // s_i: some literal among the first i+1 is true.
  int prev = cnf.newVar();
  cnf.add({-lits[0], prev});
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const int s = cnf.newVar();
    cnf.add({-lits[i], s});
    cnf.add({-prev, s});
    cnf.add({-lits[i], -prev});
    prev = s;
  }
  cnf.add({-lits[n - 1], -prev});
}

inline void atLeastOne(Cnf& cnf, const std::vector<int>& lits) { cnf.add(lits); }

inline void exactlyOne(Cnf& cnf, const std::vector<int>& lits, const CardinalityPolicy& policy = {}) {
  atLeastOne(cnf, lits);
  atMostOne(cnf, lits, policy);
}

/// Exactly k of `lits` true, via a sequential counter whose registers are
/// defined in both directions. k = 1 falls back to exactlyOne.
inline void exactly(Cnf& cnf, const std::vector<int>& lits, std::size_t k, const CardinalityPolicy& policy = {}) {
  const std::size_t n = lits.size();
  if (k > n) {
    cnf.add(std::vector<int>{});
    return;
  }
  if (k == 0) {
    for (int l : lits) cnf.add({-l});
    return;
  }
  if (k == 1) {
    exactlyOne(cnf, lits, policy);
    return;
  }
  if (k == n) {
    for (int l : lits) cnf.add({l});
    return;
  }
  // r[j] after step i: at least j+1 of the first i+1 literals are true, for j <= k.
  const std::size_t width = k + 1;
  std::vector<int> prev(width, 0), cur(width, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const int x = lits[i];
    for (std::size_t j = 0; j < width && j <= i; ++j) {
      const int r = cnf.newVar();
      cur[j] = r;
      const int below = j < i ? prev[j] : 0;          // r[i-1][j], absent means false
      const int diag = j == 0 ? 0 : prev[j - 1];      // r[i-1][j-1], j == 0 means true
      if (below) cnf.add({-below, r});
      if (j == 0)
        cnf.add({-x, r});
      else
        cnf.add({-x, -diag, r});
      // r -> below or x; r -> below or diag
      std::vector<int> c1{-r, x}, c2{-r};
      if (below) {
        c1.push_back(below);
        c2.push_back(below);
      }
      cnf.add(std::move(c1));
      if (j > 0) {
        c2.push_back(diag);
        cnf.add(std::move(c2));
      }
    }
    std::swap(prev, cur);
  }
  cnf.add({prev[k - 1]});
  cnf.add({-prev[k]});
}

}  // namespace satvec::sat
