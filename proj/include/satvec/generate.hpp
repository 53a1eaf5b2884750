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

#include <stdexcept>
#include <vector>

#include "satvec/graph.hpp"
#include "satvec/rng.hpp"
#include "satvec/signature.hpp"

namespace satvec {

/// Random tree over `sig`'s unmasked base symbols with at most `maxNodes`
/// nodes. The root is a non-leaf root symbol; each open argument becomes an
/// internal non-leaf with probability `branching` while the node budget
/// allows, otherwise a leaf. Sequence signatures are not supported.
inline Graph randomTree(const Signature& sig, RandomStream& rng, std::size_t maxNodes, double branching = 0.5) {
  std::vector<SymbolId> roots, inner, leaves;
  for (SymbolId s = 0; s < sig.baseSize(); ++s) {
    const SymbolInfo& info = sig[s];
    if (info.masked() || info.positionSymbol || info.eos || info.slot) continue;
    if (info.root && !info.leaf() && 1 + info.arity <= maxNodes) roots.push_back(s);
    if (info.internal) (info.leaf() ? leaves : inner).push_back(s);
  }
  if (roots.empty() || leaves.empty())
    throw std::invalid_argument("no tree fits: needs a leaf and a non-leaf root within the node budget");
  auto pick = [&](const std::vector<SymbolId>& from) { return from[rng.below(from.size())]; };
  const SymbolId root = pick(roots);

  // Symbols by preorder position; children are appended once the shape is fixed.
  std::vector<SymbolId> symbol{root};
  std::vector<std::vector<std::size_t>> children(1);
  std::size_t used = 1 + sig[root].arity;
  std::vector<std::pair<std::size_t, std::size_t>> open;  // (node, argument) awaiting a child
  for (std::size_t k = 0; k < sig[root].arity; ++k) open.push_back({0, k});
  children[0].resize(sig[root].arity);
  std::size_t next = 0;
  while (next < open.size()) {
    const auto [parent, arg] = open[next++];
    SymbolId s = pick(leaves);
    if (!inner.empty() && rng.uniform() < branching) {
      const SymbolId c = pick(inner);
      if (used + sig[c].arity <= maxNodes) s = c;
    }
    const std::size_t id = symbol.size();
    symbol.push_back(s);
    children.emplace_back(sig[s].arity);
    children[parent][arg] = id;
    used += sig[s].arity;
    for (std::size_t k = 0; k < sig[s].arity; ++k) open.push_back({id, k});
  }
  Graph g;
  std::vector<NodeId> node(symbol.size());
  for (std::size_t v = symbol.size(); v-- > 0;) {
    std::vector<NodeId> args;
    for (std::size_t c : children[v]) args.push_back(node[c]);
    node[v] = g.add(symbol[v], std::move(args));
  }
  return g;
}

}  // namespace satvec
