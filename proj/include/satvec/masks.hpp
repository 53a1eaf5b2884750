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

#include <optional>
#include <vector>

#include "satvec/graph.hpp"
#include "satvec/signature.hpp"

namespace satvec {

/// Replaces every non-leaf, non-root node's symbol by its masked variant.
///
/// depth is the shortest distance from a root, argPosition the 1-based index
/// in the first parent reached by a preorder walk from the roots. With
/// negation bypass the negation node keeps its symbol and its argument takes
/// the negation's own position instead. Leaves are never masked.
inline Graph applyMasks(const Graph& g, const Signature& sig) {
  if (!sig.masksEnabled()) return g;
  const auto& opt = sig.options();
  const auto depth = g.depths();
  const auto n = g.size();
  std::vector<std::optional<std::uint32_t>> position(n);
  std::vector<bool> seen(n, false);

  auto walk = [&](auto&& self, NodeId v) -> void {
    if (seen[v]) return;
    seen[v] = true;
    const Node& node = g[v];
    const bool bypass = opt.negationBypass && node.symbol == sig.negation();
    for (std::size_t i = 0; i < node.args.size(); ++i) {
      NodeId a = node.args[i];
      if (seen[a]) continue;
      position[a] = bypass ? position[v] : std::optional<std::uint32_t>(static_cast<std::uint32_t>(i + 1));
      self(self, a);
    }
  };
  for (NodeId r : g.roots()) walk(walk, r);

  Graph out = g;
  for (NodeId v = 0; v < n; ++v) {
    const SymbolInfo& s = sig[g[v].symbol];
    if (s.leaf() || !depth[v] || *depth[v] == 0) continue;
    std::optional<std::uint32_t> d, p;
    if (opt.maxDepth > 0) {
      if (*depth[v] > opt.maxDepth)
        throw SignatureError(s.name() + " at depth " + std::to_string(*depth[v]) + " exceeds mask depth bound " +
                             std::to_string(opt.maxDepth));
      d = *depth[v];
    }
    const bool bypassed = opt.negationBypass && g[v].symbol == sig.negation();
    if (opt.argNumberMask && !bypassed) p = position[v];
    auto m = sig.masked(s.base, d, p);
    if (!m) throw SignatureError("no mask variant declared for " + s.name());
    out[v].symbol = *m;
  }
  return out;
}

/// Reorders the arguments of unordered nodes so every child whose mask names
/// an argument position sits at that position; unmasked children fill the
/// remaining places in their current order. Mask positions under unordered
/// parents depend on argument order, so this is needed before stripMasks for
/// the base graph to re-mask to the same symbols. Conflicting positions are
/// left alone.
inline void alignToMasks(Graph& g, const Signature& sig) {
  if (!sig.options().argNumberMask) return;
  auto wanted = [&](NodeId c) -> std::optional<std::uint32_t> {
    const SymbolInfo& s = sig[g[c].symbol];
    if (s.argPosition) return s.argPosition;
    if (sig.options().negationBypass && g[c].symbol == sig.negation() && !g[c].args.empty())
      return sig[g[g[c].args[0]].symbol].argPosition;
    return std::nullopt;
  };
  for (NodeId v = 0; v < g.size(); ++v) {
    const SymbolInfo& s = sig[g[v].symbol];
    if (s.ordering != Ordering::unordered || g[v].args.size() < 2) continue;
    const auto& args = g[v].args;
    std::vector<std::optional<NodeId>> placed(args.size());
    std::vector<NodeId> rest;
    bool conflict = false;
    for (NodeId c : args) {
      auto p = wanted(c);
      if (p && *p >= 1 && *p <= args.size() && !placed[*p - 1])
        placed[*p - 1] = c;
      else if (p)
        conflict = true;
      else
        rest.push_back(c);
    }
    if (conflict) continue;
    std::vector<NodeId> out;
    std::size_t next = 0;
    for (auto& slot : placed) out.push_back(slot ? *slot : rest[next++]);
    g[v].args = std::move(out);
  }
}

/// Inverse of applyMasks: every symbol reverts to its base symbol.
inline Graph stripMasks(const Graph& g, const Signature& sig) {
  Graph out = g;
  for (NodeId v = 0; v < g.size(); ++v)
    if (g[v].symbol < sig.size()) out[v].symbol = sig[g[v].symbol].base;
  return out;
}

}  // namespace satvec
