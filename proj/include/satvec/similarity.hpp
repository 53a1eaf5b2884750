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
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "satvec/constraints.hpp"
#include "satvec/encoder.hpp"

namespace satvec {

/// A count vector viewed as rows: row 0 holds the symbol counts, row i the
/// constraint counts of parallel set i. Rows differ in length.
struct RowMatrix {
  std::vector<std::vector<double>> rows;

  [[nodiscard]] std::vector<double> flatten() const {
    std::vector<double> out;
    for (const auto& r : rows) out.insert(out.end(), r.begin(), r.end());
    return out;
  }
};

inline RowMatrix toRowMatrix(const CountVector& v, const ConstraintSystem& system) {
  if (v.size() != system.vectorLength())
    throw std::invalid_argument("vector length " + std::to_string(v.size()) + " does not match the system (" +
                                std::to_string(system.vectorLength()) + ")");
  RowMatrix m;
  auto row = [&](std::size_t begin, std::size_t end) {
    const auto s = v.slice(begin, end);
    m.rows.emplace_back(s.begin(), s.end());
  };
  row(0, system.symbolCount());
  for (std::size_t i = 0; i < system.t(); ++i) row(system.offset(i), system.offset(i + 1));
  return m;
}

enum class Measure { dot, cosine };

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("row lengths differ");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Cosine with cos(0, 0) = 1 and cos(0, x) = 0 for x != 0, so an empty row
/// on both sides does not drag the minimum down.
inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  const double ab = dot(a, b), aa = dot(a, a), bb = dot(b, b);
  if (aa == 0 && bb == 0) return 1.0;
  if (aa == 0 || bb == 0) return 0.0;
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

inline double rowSimilarity(const std::vector<double>& a, const std::vector<double>& b, Measure phi) {
  return phi == Measure::dot ? dot(a, b) : cosine(a, b);
}

/// Row-wise similarities of two matrices from one system.
inline std::vector<double> rowSimilarities(const RowMatrix& m, const RowMatrix& n, Measure phi) {
  if (m.rows.size() != n.rows.size()) throw std::invalid_argument("matrices have different row counts");
  std::vector<double> out;
  for (std::size_t i = 0; i < m.rows.size(); ++i) out.push_back(rowSimilarity(m.rows[i], n.rows[i], phi));
  return out;
}

/// Minimum of the row-wise similarities: two graphs are only as similar as
/// their least similar decomposition.
inline double structuralSim(const RowMatrix& m, const RowMatrix& n, Measure phi = Measure::cosine) {
  const auto v = rowSimilarities(m, n, phi);
  if (v.empty()) throw std::invalid_argument("matrices have no rows");
  double out = v[0];
  for (double x : v) out = std::min(out, x);
  return out;
}

/// Cosine over the symbol rows alone.
inline double bagOfWordsSim(const RowMatrix& m, const RowMatrix& n) {
  if (m.rows.empty() || n.rows.empty()) throw std::invalid_argument("matrices have no rows");
  return cosine(m.rows[0], n.rows[0]);
}

/// lambda * structural + (1 - lambda) * bag-of-words, exact at lambda = 0.
inline double blend(double structural, double bagOfWords, double lambda) {
  if (lambda == 0.0) return bagOfWords;
  return lambda * structural + (1.0 - lambda) * bagOfWords;
}

/// lambda * structural cosine + (1 - lambda) * bag-of-words cosine.
inline double blendedSim(const RowMatrix& m, const RowMatrix& n, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
  const double b = bagOfWordsSim(m, n);
  return blend(lambda == 0.0 ? 0.0 : structuralSim(m, n, Measure::cosine), b, lambda);
}

struct Labeled {
  RowMatrix matrix;
  std::string label;
};

/// Label chosen from (similarity, training index) pairs. With k = 1 the most
/// similar item wins and ties go to the earliest item. With k > 1 the k most
/// similar items vote; a tied vote goes to the label of the nearest voter.
template <class LabelOf>
std::string knnVote(std::vector<std::pair<double, std::size_t>> scored, std::size_t k, LabelOf labelOf) {
  if (scored.empty()) throw std::invalid_argument("empty training set");
  if (k == 0) throw std::invalid_argument("k must be positive");
  k = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  if (k == 1) return std::string(labelOf(scored[0].second));
  std::map<std::string, std::size_t, std::less<>> votes;
  for (std::size_t i = 0; i < k; ++i) ++votes[std::string(labelOf(scored[i].second))];
  std::size_t best = 0;
  for (const auto& [label, n] : votes) best = std::max(best, n);
  for (std::size_t i = 0; i < k; ++i)
    if (votes.find(labelOf(scored[i].second))->second == best) return std::string(labelOf(scored[i].second));
  return std::string(labelOf(scored[0].second));
}

/// k-nearest-neighbour label under blendedSim, voting as in knnVote.
inline std::string knnClassify(const RowMatrix& query, const std::vector<Labeled>& training, double lambda,
                               std::size_t k = 1) {
  if (training.empty()) throw std::invalid_argument("empty training set");
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(training.size());
  for (std::size_t i = 0; i < training.size(); ++i) scored.push_back({blendedSim(query, training[i].matrix, lambda), i});
  return knnVote(std::move(scored), k, [&](std::size_t i) -> const std::string& { return training[i].label; });
}

}  // namespace satvec
