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
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "satvec/constraints.hpp"
#include "satvec/graph.hpp"
#include "satvec/masks.hpp"

namespace satvec {

class MatchError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class EncodeError : public std::runtime_error {
public:
  explicit EncodeError(std::vector<Violation> v)
      : std::runtime_error(v.empty() ? "graph is not encodable" : v.front().message), violations(std::move(v)) {}
  std::vector<Violation> violations;
};

/// True when `left[i]` can be paired with distinct `right` entries such that
/// `fits(i, j)` holds for every pair. Augmenting-path bipartite matching.
inline bool perfectMatching(std::size_t left, std::size_t right,
                            const std::function<bool(std::size_t, std::size_t)>& fits) {
  if (left != right) return false;
  std::vector<std::vector<std::size_t>> adj(left);
  for (std::size_t i = 0; i < left; ++i)
    for (std::size_t j = 0; j < right; ++j)
      if (fits(i, j)) adj[i].push_back(j);
  std::vector<std::size_t> owner(right, left);
  for (std::size_t i = 0; i < left; ++i) {
    std::vector<bool> visited(right, false);
    std::function<bool(std::size_t)> augment = [&](std::size_t u) {
      for (std::size_t j : adj[u]) {
        if (visited[j]) continue;
        visited[j] = true;
        if (owner[j] == left || augment(owner[j])) {
          owner[j] = u;
          return true;
        }
      }
      return false;
    };
    if (!augment(i)) return false;
  }
  return true;
}

/// Does `c` match lead symbol `lead` with arguments `args` (positionally for
/// ordered and sequence constraints, by perfect matching otherwise)?
inline bool matches(const ConstraintSet& set, const Constraint& c, SymbolId lead, std::span<const SymbolId> args) {
  if (!set.contains(c.lead, lead) || args.size() != c.args.size()) return false;
  if (c.positional()) {
    for (std::size_t i = 0; i < args.size(); ++i)
      if (!set.contains(c.args[i], args[i])) return false;
    return true;
  }
  return perfectMatching(args.size(), c.args.size(),
                         [&](std::size_t i, std::size_t j) { return set.contains(c.args[j], args[i]); });
}

/// The ordered node constraint matching `lead(args...)`.
inline std::uint32_t matchOrdered(const ConstraintSet& set, SymbolId lead, std::span<const SymbolId> args,
                                  bool rootSide) {
  if (args.empty()) throw MatchError("ordered matching needs a node with arguments");
  auto blockId = set.nodeBlock(lead, rootSide);
  if (!blockId) throw MatchError("no ordered lead cell holds the symbol");
  const Block& b = set.block(*blockId);
  if (b.family != Family::ordered || b.arity != args.size()) throw MatchError("lead symbol is not ordered of this arity");
  std::uint32_t index = 0;
  for (std::size_t k = 0; k < args.size(); ++k) {
    const Partition& p = set.partition(b.argPartitions[k]);
    auto cell = p.cellOf(args[k]);
    if (!cell) throw MatchError("argument symbol absent from the argument split");
    index = index * p.cells() + *cell;
  }
  const std::uint32_t id = b.first + index;
  if (!matches(set, set[id], lead, args)) throw MatchError("ordered constraint index inconsistent");
  return id;
}

/// Among the unordered constraints of the lead's block that admit a one-to-one
/// correspondence with the arguments, the least one: constraints of a block
/// are generated in lexicographic cell order, so the first hit is the least.
inline std::uint32_t matchUnordered(const ConstraintSet& set, SymbolId lead, std::span<const SymbolId> args,
                                    bool rootSide) {
  if (args.empty()) throw MatchError("unordered matching needs a node with arguments");
  auto blockId = set.nodeBlock(lead, rootSide);
  if (!blockId) throw MatchError("no unordered lead cell holds the symbol");
  const Block& b = set.block(*blockId);
  if (b.family != Family::unordered || b.arity != args.size())
    throw MatchError("lead symbol is not unordered of this arity");
  std::vector<SymbolId> sorted(args.begin(), args.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::uint32_t i = b.first; i < b.first + b.count; ++i)
    if (matches(set, set[i], lead, sorted)) return i;
  throw MatchError("no unordered constraint admits a correspondence");
}

/// Parent constraint for `child` with one entry in `parents` per incoming edge.
inline std::uint32_t matchParent(const ConstraintSet& set, std::uint32_t maxParents, SymbolId child,
                                 std::span<const SymbolId> parents) {
  if (parents.empty()) throw MatchError("root nodes have no parent constraint");
  if (parents.size() > maxParents) throw MatchError("too many parents");
  auto blockId = set.parentBlock(child, static_cast<std::uint32_t>(parents.size()));
  if (!blockId) throw MatchError("no child cell holds the symbol");
  const Block& b = set.block(*blockId);
  std::vector<SymbolId> sorted(parents.begin(), parents.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::uint32_t i = b.first; i < b.first + b.count; ++i)
    if (matches(set, set[i], child, sorted)) return i;
  throw MatchError("no parent constraint admits a correspondence");
}

/// Sequence constraint for position `position` (1-based) holding `entries`.
inline std::uint32_t matchSequence(const ConstraintSet& set, const Signature& sig, std::uint32_t position,
                                   std::span<const SymbolId> entries, bool isLast) {
  if (!sig.sequenceMode()) throw MatchError("signature has no sequence positions");
  const auto& seq = *sig.options().sequence;
  if (position == 0 || position > seq.length) throw MatchError("sequence position exceeds the maximum length");
  if (entries.size() != seq.slots) throw MatchError("wrong number of sequence entries");
  auto blockId = set.sequenceBlock(position, isLast);
  if (!blockId) throw MatchError("the last position cannot continue");
  const Block& b = set.block(*blockId);
  std::uint32_t index = 0;
  for (std::size_t r = 0; r < entries.size(); ++r) {
    const Partition& p = set.partition(b.argPartitions[r]);
    auto cell = p.cellOf(entries[r]);
    if (!cell) throw MatchError("entry outside its slot pool");
    index = index * p.cells() + *cell;
  }
  return b.first + index;
}

/// Constraints matched by one node in one parallel set.
struct NodeMatch {
  std::optional<std::uint32_t> node;    // node or sequence constraint, absent for leaves
  std::optional<std::uint32_t> parent;  // parent constraint, absent for roots
};

/// Per node, per parallel set, the constraints the node matches. `g` must
/// already carry masked symbols.
inline std::vector<std::vector<NodeMatch>> matchNodes(const Graph& g, const ConstraintSystem& system) {
  const Signature& sig = system.signature();
  const auto parents = g.parents();
  std::vector<std::vector<NodeMatch>> out(g.size(), std::vector<NodeMatch>(system.t()));
  std::vector<SymbolId> args, parentSyms;
  for (NodeId v = 0; v < g.size(); ++v) {
    const Node& node = g[v];
    const SymbolInfo& s = sig[node.symbol];
    args.clear();
    for (NodeId a : node.args) args.push_back(g[a].symbol);
    parentSyms.clear();
    for (NodeId p : parents[v]) parentSyms.push_back(g[p].symbol);
    const bool isRoot = parents[v].empty();
    for (std::size_t i = 0; i < system.t(); ++i) {
      const ConstraintSet& set = system.set(i);
      NodeMatch& m = out[v][i];
      if (!s.leaf()) {
        if (s.positionSymbol)
          m.node = matchSequence(set, sig, sig.positionIndex(node.symbol),
                                 std::span<const SymbolId>(args).first(args.size() - 1), args.back() == sig.eos());
        else if (s.ordering == Ordering::ordered)
          m.node = matchOrdered(set, node.symbol, args, isRoot);
        else
          m.node = matchUnordered(set, node.symbol, args, isRoot);
      }
      if (!isRoot && system.parentConstraints()) m.parent = matchParent(set, sig.maxParents(), node.symbol, parentSyms);
    }
  }
  return out;
}

struct Decomposition {
  std::vector<std::uint32_t> symbolCounts;                  // over S
  std::vector<std::vector<std::uint32_t>> constraintCounts;  // per parallel set, over C_i
};

/// Decomposes an already-masked graph into symbol and constraint tallies.
inline Decomposition decompose(const Graph& g, const ConstraintSystem& system) {
  Decomposition d;
  d.symbolCounts.assign(system.signature().size(), 0);
  d.constraintCounts.resize(system.t());
  for (std::size_t i = 0; i < system.t(); ++i) d.constraintCounts[i].assign(system.set(i).size(), 0);
  const auto matched = matchNodes(g, system);
  for (NodeId v = 0; v < g.size(); ++v) {
    ++d.symbolCounts[g[v].symbol];
    for (std::size_t i = 0; i < system.t(); ++i) {
      if (matched[v][i].node) ++d.constraintCounts[i][*matched[v][i].node];
      if (matched[v][i].parent) ++d.constraintCounts[i][*matched[v][i].parent];
    }
  }
  return d;
}

/// Fixed-length tally vector: |S| symbol counts followed by each set's
/// constraint counts.
class CountVector {
public:
  CountVector() = default;
  explicit CountVector(std::vector<std::uint32_t> counts) : counts_(std::move(counts)) {}

  [[nodiscard]] std::size_t size() const noexcept { return counts_.size(); }
  [[nodiscard]] std::uint32_t operator[](std::size_t i) const { return counts_.at(i); }
  [[nodiscard]] const std::vector<std::uint32_t>& counts() const noexcept { return counts_; }
  [[nodiscard]] std::span<const std::uint32_t> slice(std::size_t begin, std::size_t end) const {
    return std::span<const std::uint32_t>(counts_).subspan(begin, end - begin);
  }
  [[nodiscard]] std::uint64_t total() const noexcept {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
  }
  friend bool operator==(const CountVector&, const CountVector&) = default;

  /// `satvec-vector 1 <system digest> <length>` then `index:count` lines for
  /// the non-zero entries in ascending index order.
  [[nodiscard]] std::string serialize(const ConstraintSystem& system) const {
    std::ostringstream out;
    out << "satvec-vector 1 " << system.digestHex() << " " << counts_.size() << "\n";
    for (std::size_t i = 0; i < counts_.size(); ++i)
      if (counts_[i]) out << i << ":" << counts_[i] << "\n";
    return out.str();
  }

  static CountVector parse(std::string_view text, const ConstraintSystem& system) {
    std::istringstream in{std::string(text)};
    std::string magic, digest;
    int version = 0;
    std::size_t length = 0;
    if (!(in >> magic >> version >> digest >> length) || magic != "satvec-vector" || version != 1)
      throw std::invalid_argument("malformed vector header");
    if (digest != system.digestHex()) throw std::invalid_argument("vector was produced by a different system");
    if (length != system.vectorLength()) throw std::invalid_argument("vector length does not match the system");
    std::vector<std::uint32_t> counts(length, 0);
    for (std::string entry; in >> entry;) {
      auto colon = entry.find(':');
      if (colon == std::string::npos) throw std::invalid_argument("malformed vector entry " + entry);
      const std::string idx = entry.substr(0, colon), cnt = entry.substr(colon + 1);
      auto digits = [](const std::string& s) {
        return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
      };
      if (!digits(idx) || !digits(cnt)) throw std::invalid_argument("vector entries must be non-negative integers: " + entry);
      const auto i = std::stoull(idx);
      if (i >= length) throw std::invalid_argument("vector index out of range: " + idx);
      counts[i] = static_cast<std::uint32_t>(std::stoull(cnt));
    }
    return CountVector(std::move(counts));
  }

private:
  std::vector<std::uint32_t> counts_;
};

inline CountVector toVector(const Decomposition& d, const ConstraintSystem& system) {
  std::vector<std::uint32_t> counts(system.vectorLength(), 0);
  std::copy(d.symbolCounts.begin(), d.symbolCounts.end(), counts.begin());
  for (std::size_t i = 0; i < system.t(); ++i)
    std::copy(d.constraintCounts[i].begin(), d.constraintCounts[i].end(),
              counts.begin() + static_cast<std::ptrdiff_t>(system.offset(i)));
  return CountVector(std::move(counts));
}

/// Validates, masks and decomposes a base-symbol graph.
inline CountVector encode(const Graph& g, const ConstraintSystem& system) {
  if (auto v = validate(g, system.signature()); !v.empty()) throw EncodeError(std::move(v));
  return toVector(decompose(applyMasks(g, system.signature()), system), system);
}

/// Encodes a graph that already carries masked symbols.
inline CountVector encodeMasked(const Graph& masked, const ConstraintSystem& system) {
  return toVector(decompose(masked, system), system);
}

}  // namespace satvec
