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
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "satvec/signature.hpp"

namespace satvec {

using NodeId = std::uint32_t;

struct Node {
  SymbolId symbol = kNoSymbol;
  std::vector<NodeId> args;  // argument order matters only for ordered symbols
};

/// Rooted DAG over a signature's symbols. Roots are the nodes without
/// incoming edges; a node with several incoming edges is shared.
class Graph {
public:
  NodeId add(SymbolId symbol, std::vector<NodeId> args = {}) {
    nodes_.push_back(Node{symbol, std::move(args)});
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
  [[nodiscard]] bool empty() const noexcept { return nodes_.empty(); }
  [[nodiscard]] const Node& operator[](NodeId id) const { return nodes_.at(id); }
  [[nodiscard]] Node& operator[](NodeId id) { return nodes_.at(id); }
  [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }

  /// Number of incoming edges per node (an argument listed twice counts twice).
  [[nodiscard]] std::vector<std::uint32_t> inDegrees() const {
    std::vector<std::uint32_t> deg(nodes_.size(), 0);
    for (const auto& n : nodes_)
      for (NodeId a : n.args)
        if (a < deg.size()) ++deg[a];
    return deg;
  }

  [[nodiscard]] std::vector<NodeId> roots() const {
    std::vector<NodeId> out;
    auto deg = inDegrees();
    for (NodeId i = 0; i < nodes_.size(); ++i)
      if (deg[i] == 0) out.push_back(i);
    return out;
  }

  /// Parent list per node, one entry per incoming edge, in node order.
  [[nodiscard]] std::vector<std::vector<NodeId>> parents() const {
    std::vector<std::vector<NodeId>> out(nodes_.size());
    for (NodeId i = 0; i < nodes_.size(); ++i)
      for (NodeId a : nodes_[i].args)
        if (a < out.size()) out[a].push_back(i);
    return out;
  }

  /// Shortest distance from any root; nullopt for nodes on cycles only.
  [[nodiscard]] std::vector<std::optional<std::uint32_t>> depths() const {
    std::vector<std::optional<std::uint32_t>> depth(nodes_.size());
    std::deque<NodeId> queue;
    for (NodeId r : roots()) {
      depth[r] = 0;
      queue.push_back(r);
    }
    while (!queue.empty()) {
      NodeId n = queue.front();
      queue.pop_front();
      for (NodeId a : nodes_[n].args) {
        if (a < nodes_.size() && !depth[a]) {
          depth[a] = *depth[n] + 1;
          queue.push_back(a);
        }
      }
    }
    return depth;
  }

private:
  std::vector<Node> nodes_;
};

enum class ViolationKind {
  unknownSymbol,
  danglingEdge,
  arityMismatch,
  cycle,
  rootKind,
  internalKind,
  tooManyParents,
  maskDepth,
  sequenceShape,
};

struct Violation {
  ViolationKind kind;
  NodeId node;
  std::string message;
};

/// Every invariant violation of `g` as a graph over `sig`'s base symbols.
/// An empty result means the graph is encodable.
inline std::vector<Violation> validate(const Graph& g, const Signature& sig) {
  std::vector<Violation> out;
  const auto n = static_cast<NodeId>(g.size());
  bool structural = true;
  for (NodeId i = 0; i < n; ++i) {
    const Node& node = g[i];
    if (node.symbol >= sig.size()) {
      out.push_back({ViolationKind::unknownSymbol, i, "unknown symbol id " + std::to_string(node.symbol)});
      structural = false;
      continue;
    }
    const SymbolInfo& s = sig[node.symbol];
    if (node.args.size() != s.arity)
      out.push_back({ViolationKind::arityMismatch, i,
                     s.name() + " has " + std::to_string(node.args.size()) + " arguments, arity is " +
                         std::to_string(s.arity)});
    for (NodeId a : node.args)
      if (a >= n) {
        out.push_back({ViolationKind::danglingEdge, i, "edge to missing node " + std::to_string(a)});
        structural = false;
      }
  }
  if (!structural) return out;

  // Iterative three-colour DFS; one violation per back edge target.
  std::vector<std::uint8_t> colour(n, 0);
  for (NodeId start = 0; start < n; ++start) {
    if (colour[start]) continue;
    std::vector<std::pair<NodeId, std::size_t>> stack{{start, 0}};
    colour[start] = 1;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next < g[v].args.size()) {
        NodeId a = g[v].args[next++];
        if (colour[a] == 1) {
          out.push_back({ViolationKind::cycle, a, "cycle through " + sig[g[a].symbol].name()});
        } else if (colour[a] == 0) {
          colour[a] = 1;
          stack.emplace_back(a, 0);
        }
      } else {
        colour[v] = 2;
        stack.pop_back();
      }
    }
  }

  const auto deg = g.inDegrees();
  for (NodeId i = 0; i < n; ++i) {
    const SymbolInfo& s = sig[g[i].symbol];
    if (deg[i] == 0 && !s.root) out.push_back({ViolationKind::rootKind, i, s.name() + " cannot be a root"});
    if (deg[i] > 0 && !s.internal)
      out.push_back({ViolationKind::internalKind, i, s.name() + " cannot have parents"});
    if (deg[i] > sig.maxParents())
      out.push_back({ViolationKind::tooManyParents, i,
                     s.name() + " has too many parents (" + std::to_string(deg[i]) + " > " +
                         std::to_string(sig.maxParents()) + ")"});
  }

  if (sig.options().maxDepth > 0) {
    auto depth = g.depths();
    for (NodeId i = 0; i < n; ++i) {
      const SymbolInfo& s = sig[g[i].symbol];
      if (!s.leaf() && depth[i] && *depth[i] > sig.options().maxDepth)
        out.push_back({ViolationKind::maskDepth, i,
                       s.name() + " at depth " + std::to_string(*depth[i]) + " exceeds mask depth bound"});
    }
  }

  if (sig.sequenceMode()) {
    const auto& seq = *sig.options().sequence;
    for (NodeId i = 0; i < n; ++i) {
      const SymbolInfo& s = sig[g[i].symbol];
      if (!s.positionSymbol || g[i].args.size() != s.arity) continue;
      const std::uint32_t j = sig.positionIndex(g[i].symbol);
      for (std::uint32_t r = 0; r < seq.slots; ++r) {
        const SymbolInfo& e = sig[g[g[i].args[r]].symbol];
        if (!e.leaf() || !e.slot || *e.slot != r + 1)
          out.push_back({ViolationKind::sequenceShape, i,
                         "entry " + std::to_string(r + 1) + " of " + s.name() + " is outside its slot pool"});
      }
      const SymbolId next = g[g[i].args.back()].symbol;
      const bool ok = next == sig.eos() || (j < seq.length && next == sig.position(j + 1));
      if (!ok)
        out.push_back({ViolationKind::sequenceShape, i, s.name() + " must continue with the next position or end"});
    }
  }
  return out;
}

/// Deterministic rendering. Ordered arguments keep their order, unordered
/// arguments are sorted by their rendered text, and forests list their
/// trees sorted and separated by "; ". Shared nodes are written "#k=term" at
/// their first occurrence and "#k" afterwards so sharing is part of the text.
inline std::string canonicalText(const Graph& g, const Signature& sig) {
  const auto n = g.size();
  const auto deg = g.inDegrees();
  std::vector<std::optional<std::string>> keyMemo(n);
  // Sharing-aware structural key used for sorting.
  auto key = [&](auto&& self, NodeId v) -> const std::string& {
    if (keyMemo[v]) return *keyMemo[v];
    const Node& node = g[v];
    const SymbolInfo& s = sig[node.symbol];
    std::string out = s.name();
    if (deg[v] > 1) out += "*";
    if (!node.args.empty()) {
      std::vector<std::string> parts;
      for (NodeId a : node.args) parts.push_back(self(self, a));
      if (s.ordering == Ordering::unordered) std::sort(parts.begin(), parts.end());
      out += "(";
      for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
      out += ")";
    }
    keyMemo[v] = std::move(out);
    return *keyMemo[v];
  };

  std::vector<int> label(n, 0);
  int nextLabel = 0;
  auto render = [&](auto&& self, NodeId v, std::string& out) -> void {
    if (deg[v] > 1) {
      if (label[v]) {
        out += "#" + std::to_string(label[v]);
        return;
      }
      label[v] = ++nextLabel;
      out += "#" + std::to_string(label[v]) + "=";
    }
    const Node& node = g[v];
    const SymbolInfo& s = sig[node.symbol];
    out += s.name();
    if (node.args.empty()) return;
    std::vector<NodeId> order = node.args;
    if (s.ordering == Ordering::unordered)
      std::stable_sort(order.begin(), order.end(),
                       [&](NodeId a, NodeId b) { return key(key, a) < key(key, b); });
    out += "(";
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (i) out += ",";
      self(self, order[i], out);
    }
    out += ")";
  };

  auto roots = g.roots();
  std::stable_sort(roots.begin(), roots.end(), [&](NodeId a, NodeId b) { return key(key, a) < key(key, b); });
  std::string out;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (i) out += "; ";
    render(render, roots[i], out);
  }
  return out;
}

class TermSyntaxError : public std::runtime_error {
public:
  TermSyntaxError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " at offset " + std::to_string(pos)), position(pos) {}
  std::size_t position;
};

/// Parses `f(a,g(b))`-style terms, `;`-separated for forests, into a tree
/// graph over `sig`'s base symbols. Labels may contain any character except
/// whitespace and `(),;`.
inline Graph parseTerm(std::string_view text, const Signature& sig) {
  Graph g;
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  };
  auto term = [&](auto&& self) -> NodeId {
    skip();
    const std::size_t start = pos;
    while (pos < text.size() && std::string_view(" \t(),;").find(text[pos]) == std::string_view::npos) ++pos;
    if (pos == start) throw TermSyntaxError("expected a label", pos);
    std::string label(text.substr(start, pos - start));
    std::vector<NodeId> args;
    skip();
    if (pos < text.size() && text[pos] == '(') {
      ++pos;
      for (;;) {
        args.push_back(self(self));
        skip();
        if (pos < text.size() && text[pos] == ',') {
          ++pos;
          continue;
        }
        if (pos < text.size() && text[pos] == ')') {
          ++pos;
          break;
        }
        throw TermSyntaxError("expected ',' or ')'", pos);
      }
    }
    const auto arity = static_cast<std::uint32_t>(args.size());
    auto id = sig.find(label, arity);
    if (!id) throw TermSyntaxError("unknown symbol " + label + "/" + std::to_string(arity), start);
    return g.add(*id, std::move(args));
  };
  skip();
  if (pos == text.size()) return g;
  for (;;) {
    term(term);
    skip();
    if (pos == text.size()) break;
    if (text[pos] != ';') throw TermSyntaxError("unexpected character", pos);
    ++pos;
  }
  return g;
}

}  // namespace satvec
