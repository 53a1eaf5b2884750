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
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace satvec {

class CycleBudgetExceeded : public std::runtime_error {
public:
  explicit CycleBudgetExceeded(std::size_t cap)
      : std::runtime_error("more than " + std::to_string(cap) + " simple cycles in the implication graph"),
        cap(cap) {}
  std::size_t cap;
};

using Digraph = std::vector<std::vector<std::uint32_t>>;

namespace detail {

// Tarjan's strongly connected components over vertices >= `from`.
inline std::vector<std::vector<std::uint32_t>> componentsFrom(const Digraph& g, std::uint32_t from) {
  const auto n = static_cast<std::uint32_t>(g.size());
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<std::uint8_t> onStack(n, 0);
  std::vector<std::uint32_t> stack;
  std::vector<std::vector<std::uint32_t>> out;
  int counter = 0;
  struct Frame {
    std::uint32_t v;
    std::size_t next;
  };
  for (std::uint32_t root = from; root < n; ++root) {
    if (index[root] >= 0) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    onStack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      const auto& adj = g[f.v];
      if (f.next < adj.size()) {
        const std::uint32_t w = adj[f.next++];
        if (w < from) continue;
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          onStack[w] = 1;
          call.push_back({w, 0});
        } else if (onStack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const std::uint32_t v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        std::vector<std::uint32_t> comp;
        std::uint32_t w;
        do {
          w = stack.back();
          stack.pop_back();
          onStack[w] = 0;
          comp.push_back(w);
        } while (w != v);
        out.push_back(std::move(comp));
      }
    }
  }
  return out;
}

}  // namespace detail

/// Every elementary cycle of `g` (Johnson 1975), each listed from its least
/// vertex. Throws CycleBudgetExceeded once more than `cap` cycles are found.
inline std::vector<std::vector<std::uint32_t>> simpleCycles(const Digraph& g, std::size_t cap = 100000) {
  const auto n = static_cast<std::uint32_t>(g.size());
  std::vector<std::vector<std::uint32_t>> cycles;
  std::vector<std::uint8_t> blocked(n, 0), inComponent(n, 0);
  std::vector<std::vector<std::uint32_t>> blockMap(n);
  std::vector<std::uint32_t> path;

  auto unblock = [&](std::uint32_t u) {
    std::vector<std::uint32_t> work{u};
    while (!work.empty()) {
      const std::uint32_t x = work.back();
      work.pop_back();
      if (!blocked[x]) continue;
      blocked[x] = 0;
      for (std::uint32_t y : blockMap[x]) work.push_back(y);
      blockMap[x].clear();
    }
  };

  std::uint32_t s = 0;
  while (s < n) {
    // Least vertex of any non-trivial component in the subgraph induced by [s, n).
    auto comps = detail::componentsFrom(g, s);
    std::uint32_t least = n;
    const std::vector<std::uint32_t>* best = nullptr;
    for (const auto& c : comps) {
      const bool nontrivial =
          c.size() > 1 || std::find(g[c[0]].begin(), g[c[0]].end(), c[0]) != g[c[0]].end();
      if (!nontrivial) continue;
      const std::uint32_t m = *std::min_element(c.begin(), c.end());
      if (m < least) {
        least = m;
        best = &c;
      }
    }
    if (!best) break;
    s = least;
    for (std::uint32_t v : *best) {
      inComponent[v] = 1;
      blocked[v] = 0;
      blockMap[v].clear();
    }

    // Iterative CIRCUIT(s).
    struct Frame {
      std::uint32_t v;
      std::size_t next;
      bool found;
    };
    std::vector<Frame> call{{s, 0, false}};
    path.assign(1, s);
    blocked[s] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      const auto& adj = g[f.v];
      if (f.next < adj.size()) {
        const std::uint32_t w = adj[f.next++];
        if (!inComponent[w]) continue;
        if (w == s) {
          cycles.push_back(path);
          if (cycles.size() > cap) throw CycleBudgetExceeded(cap);
          f.found = true;
        } else if (!blocked[w]) {
          path.push_back(w);
          blocked[w] = 1;
          call.push_back({w, 0, false});
        }
        continue;
      }
      const Frame done = f;
      call.pop_back();
      if (done.found) {
        unblock(done.v);
      } else {
        for (std::uint32_t w : adj)
          if (inComponent[w] && std::find(blockMap[w].begin(), blockMap[w].end(), done.v) == blockMap[w].end())
            blockMap[w].push_back(done.v);
      }
      path.pop_back();
      if (!call.empty() && done.found) call.back().found = true;
    }
    for (std::uint32_t v : *best) inComponent[v] = 0;
    ++s;
  }
  return cycles;
}

}  // namespace satvec
