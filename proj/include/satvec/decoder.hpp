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
#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "satvec/cardinality.hpp"
#include "satvec/constraints.hpp"
#include "satvec/cycles.hpp"
#include "satvec/encoder.hpp"
#include "satvec/sat.hpp"

namespace satvec {

class DecodeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class TupleBudgetExceeded : public std::runtime_error {
public:
  explicit TupleBudgetExceeded(std::size_t cap)
      : std::runtime_error("more than " + std::to_string(cap) + " candidate edge variables") {}
};

/// One copy of a constraint with a non-zero count.
struct Instance {
  std::uint32_t constraint = 0;
  std::uint32_t copy = 0;
};

/// The symbol and constraint multisets read off a count vector. Count k
/// yields k distinguishable instances.
struct Multisets {
  std::vector<std::pair<SymbolId, std::uint32_t>> symbols;  // ascending, non-zero counts
  std::vector<std::vector<Instance>> instances;              // per parallel set

  [[nodiscard]] bool empty() const noexcept { return symbols.empty(); }
  [[nodiscard]] std::uint32_t count(SymbolId s) const {
    auto it = std::lower_bound(symbols.begin(), symbols.end(), std::make_pair(s, std::uint32_t{0}));
    return it != symbols.end() && it->first == s ? it->second : 0;
  }
};

inline Multisets extractMultisets(const CountVector& v, const ConstraintSystem& system) {
  if (v.size() != system.vectorLength())
    throw std::invalid_argument("vector length " + std::to_string(v.size()) + " does not match the system (" +
                                std::to_string(system.vectorLength()) + ")");
  Multisets m;
  for (SymbolId s = 0; s < system.symbolCount(); ++s)
    if (v[s]) m.symbols.emplace_back(s, v[s]);
  m.instances.resize(system.t());
  for (std::size_t i = 0; i < system.t(); ++i)
    for (std::uint32_t k = 0; k < system.set(i).size(); ++k)
      for (std::uint32_t c = 0; c < v[system.indexOf(i, k)]; ++c) m.instances[i].push_back({k, c});
  return m;
}

/// Single-parent constraints never tell two nodes apart: a leaf with one
/// parent is its edge and a non-leaf node is fixed by its lead instances. Their
/// copies are therefore pooled into the first copy, which then carries the
/// whole count.
inline bool pooled(const Constraint& c) { return c.family == Family::parent && c.args.size() == 1; }

/// An argument slot or parent slot of one instance.
struct Slot {
  std::uint32_t instance = 0;
  std::uint16_t slot = 0;
};

/// Per parallel set, which instances hold each present symbol in which role.
struct Associations {
  struct PerSet {
    std::unordered_map<SymbolId, std::vector<std::uint32_t>> leadRoot, leadInternal;  // lead cells
    std::unordered_map<SymbolId, std::vector<Slot>> argument;                           // argument cells
    std::unordered_map<SymbolId, std::vector<std::uint32_t>> child;                     // child cells
    std::unordered_map<SymbolId, std::vector<Slot>> parent;                             // parent cells
    std::vector<std::vector<SymbolId>> leadSymbols;  // per instance: present symbols in its lead cell
  };
  std::vector<PerSet> sets;

  /// Every t-way combination of lead instances holding `s` on one side.
  [[nodiscard]] std::vector<std::vector<std::uint32_t>> leadCombinations(SymbolId s, bool rootSide) const {
    std::vector<std::vector<std::uint32_t>> out{{}};
    for (const auto& set : sets) {
      const auto& table = rootSide ? set.leadRoot : set.leadInternal;
      auto it = table.find(s);
      if (it == table.end()) return {};
      std::vector<std::vector<std::uint32_t>> next;
      for (const auto& prefix : out)
        for (std::uint32_t inst : it->second) {
          next.push_back(prefix);
          next.back().push_back(inst);
        }
      out = std::move(next);
    }
    return out;
  }
};

inline Associations collectAssociations(const Multisets& m, const ConstraintSystem& system) {
  Associations a;
  a.sets.resize(system.t());
  for (std::size_t i = 0; i < system.t(); ++i) {
    const ConstraintSet& set = system.set(i);
    auto& out = a.sets[i];
    out.leadSymbols.resize(m.instances[i].size());
    for (std::uint32_t inst = 0; inst < m.instances[i].size(); ++inst) {
      const Constraint& c = set[m.instances[i][inst].constraint];
      const bool node = c.nodeConstraint();
      if (pooled(c) && m.instances[i][inst].copy > 0) continue;
      for (const auto& [s, count] : m.symbols) {
        if (set.contains(c.lead, s)) {
          if (node) {
            (c.rootLead ? out.leadRoot : out.leadInternal)[s].push_back(inst);
            out.leadSymbols[inst].push_back(s);
          } else {
            out.child[s].push_back(inst);
          }
        }
        for (std::uint16_t j = 0; j < c.args.size(); ++j)
          if (set.contains(c.args[j], s)) (node ? out.argument : out.parent)[s].push_back({inst, j});
      }
    }
  }
  return a;
}

/// A candidate edge p -> s, or a root marker for s when p is absent. Vector
/// members hold one entry per parallel set and are empty where a skolem
/// placeholder would otherwise stand.
struct Tuple {
  SymbolId s = kNoSymbol;
  SymbolId p = kNoSymbol;
  std::uint32_t copy = 0;                  // distinguishes isolated root leaves
  std::vector<std::uint32_t> lead;         // instances led by s
  std::vector<std::uint32_t> parentLead;   // instances led by p
  std::vector<std::uint16_t> argSlot;      // slot of s within parentLead
  std::vector<std::uint32_t> parentInst;   // parent-constraint instances with child s
  std::vector<std::uint16_t> parentSlot;   // slot of p within parentInst

  [[nodiscard]] bool root() const noexcept { return p == kNoSymbol; }
  friend auto operator<=>(const Tuple&, const Tuple&) = default;
  friend bool operator==(const Tuple&, const Tuple&) = default;
};

namespace detail {

template <class T>
std::string joinIds(const std::vector<T>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out + "]";
}

}  // namespace detail

inline std::string describe(const Tuple& r, const Signature& sig) {
  std::string out = "s=" + sig[r.s].name();
  if (r.root()) {
    out += " root";
    if (r.copy) out += " copy=" + std::to_string(r.copy);
  } else {
    out += " p=" + sig[r.p].name() + " lp=" + detail::joinIds(r.parentLead) + " a=" + detail::joinIds(r.argSlot);
  }
  if (!r.lead.empty()) out += " la=" + detail::joinIds(r.lead);
  if (!r.parentInst.empty()) out += " c=" + detail::joinIds(r.parentInst) + " pp=" + detail::joinIds(r.parentSlot);
  return out;
}

/// Whether s can be an argument of p in some masked graph: a mask position
/// fits p's arity and, in trees, a depth mask is one more than p's.
inline bool maskCompatible(const Signature& sig, SymbolId s, SymbolId p) {
  const SymbolInfo& c = sig[s];
  const SymbolInfo& q = sig[p];
  if (c.argPosition && !(sig.options().negationBypass && q.base == sig.negation()) && *c.argPosition > q.arity)
    return false;
  if (c.depth && sig.maxParents() == 1) {
    const std::uint32_t parentDepth = q.depth ? *q.depth : 0;
    if ((q.depth || q.root) && *c.depth != parentDepth + 1) return false;
  }
  return true;
}

/// All valid tuples over the associations. Positional parents keep the same
/// argument position in every set; lead sides and parent counts agree across
/// sets. Tuples whose parent can never be matched are pruned to a fixpoint.
/// A masked argument under an ordered parent sits in the slot its mask names.
inline std::vector<Tuple> enumerateTuples(const Multisets& m, const Associations& a, const ConstraintSystem& system,
                                          std::size_t cap = 2000000, const sat::Deadline& deadline = {}) {
  const Signature& sig = system.signature();
  const std::size_t t = system.t();
  std::vector<Tuple> out;
  auto push = [&](Tuple r) {
    out.push_back(std::move(r));
    if (out.size() > cap) throw TupleBudgetExceeded(cap);
  };

  for (const auto& [s, count] : m.symbols) {
    if (!sig[s].root) continue;
    if (sig[s].leaf()) {
      for (std::uint32_t c = 0; c < count; ++c) {
        Tuple r;
        r.s = s;
        r.copy = c;
        push(std::move(r));
      }
    } else {
      for (auto& lead : a.leadCombinations(s, true)) {
        Tuple r;
        r.s = s;
        r.lead = std::move(lead);
        push(std::move(r));
      }
    }
  }

  struct ArgOption {
    Slot slot;
    bool rootLead;
    bool positional;
  };
  struct ChildOption {
    Slot slot;
    std::uint32_t arity;
  };
  const bool withParents = system.parentConstraints();
  std::vector<ArgOption> args;
  std::vector<ChildOption> children;
  for (const auto& [s, sCount] : m.symbols) {
    if (!sig[s].internal) continue;
    const bool leaf = sig[s].leaf();
    // Candidate parents from the first set.
    std::vector<SymbolId> parents;
    if (auto it = a.sets[0].argument.find(s); it != a.sets[0].argument.end())
      for (const Slot& sl : it->second)
        for (SymbolId p : a.sets[0].leadSymbols[sl.instance]) parents.push_back(p);
    std::sort(parents.begin(), parents.end());
    parents.erase(std::unique(parents.begin(), parents.end()), parents.end());

    for (SymbolId p : parents) {
      if (deadline.expired()) throw DecodeError("budget exhausted while enumerating tuples");
      if (!maskCompatible(sig, s, p)) continue;
      // Per-set options.
      std::vector<std::vector<ArgOption>> argOpts(t);
      std::vector<std::vector<ChildOption>> childOpts(t);
      std::vector<const std::vector<std::uint32_t>*> leadOpts(t, nullptr);
      bool viable = true;
      for (std::size_t i = 0; i < t && viable; ++i) {
        const auto& set = a.sets[i];
        const ConstraintSet& cs = system.set(i);
        if (auto it = set.argument.find(s); it != set.argument.end())
          for (const Slot& sl : it->second) {
            const auto& ls = set.leadSymbols[sl.instance];
            if (std::find(ls.begin(), ls.end(), p) == ls.end()) continue;
            const Constraint& c = cs[m.instances[i][sl.instance].constraint];
            argOpts[i].push_back({sl, c.rootLead, c.positional()});
          }
        if (withParents) {
          auto ch = set.child.find(s);
          auto pa = set.parent.find(p);
          if (ch != set.child.end() && pa != set.parent.end())
            for (const Slot& sl : pa->second)
              if (std::find(ch->second.begin(), ch->second.end(), sl.instance) != ch->second.end())
                childOpts[i].push_back(
                    {sl, static_cast<std::uint32_t>(cs[m.instances[i][sl.instance].constraint].args.size())});
          if (childOpts[i].empty()) viable = false;
        }
        if (!leaf) {
          auto it = set.leadInternal.find(s);
          if (it == set.leadInternal.end()) viable = false;
          else leadOpts[i] = &it->second;
        }
        if (argOpts[i].empty()) viable = false;
      }
      if (!viable) continue;

      Tuple r;
      r.s = s;
      r.p = p;
      r.parentLead.resize(t);
      r.argSlot.resize(t);
      if (withParents) {
        r.parentInst.resize(t);
        r.parentSlot.resize(t);
      }
      if (!leaf) r.lead.resize(t);
      bool rootLead0 = false;
      std::uint32_t arity0 = 0;
      const bool bypass = sig.options().negationBypass && sig[p].base == sig.negation();
      auto recurse = [&](auto&& self, std::size_t i) -> void {
        if (i == t) {
          push(r);
          return;
        }
        for (const ArgOption& ao : argOpts[i]) {
          if (i == 0) {
            if (ao.positional && !bypass && sig[s].argPosition && *sig[s].argPosition != ao.slot.slot + 1U) continue;
            rootLead0 = ao.rootLead;
          } else if (ao.rootLead != rootLead0 || (ao.positional && ao.slot.slot != r.argSlot[0])) {
            continue;
          }
          r.parentLead[i] = ao.slot.instance;
          r.argSlot[i] = ao.slot.slot;
          auto withLead = [&] {
            if (leaf) {
              self(self, i + 1);
              return;
            }
            for (std::uint32_t l : *leadOpts[i]) {
              r.lead[i] = l;
              self(self, i + 1);
            }
          };
          if (!withParents) {
            withLead();
            continue;
          }
          for (const ChildOption& co : childOpts[i]) {
            if (i == 0)
              arity0 = co.arity;
            else if (co.arity != arity0)
              continue;
            r.parentInst[i] = co.slot.instance;
            r.parentSlot[i] = co.slot.slot;
            withLead();
          }
        }
      };
      recurse(recurse, 0);
    }
  }

  // Fixpoint: a non-root tuple needs a live tuple of its parent node.
  std::map<std::pair<SymbolId, std::vector<std::uint32_t>>, std::vector<std::uint32_t>> byLead;
  for (std::uint32_t r = 0; r < out.size(); ++r)
    if (!out[r].lead.empty()) byLead[{out[r].s, out[r].lead}].push_back(r);
  std::map<std::pair<SymbolId, std::vector<std::uint32_t>>, std::vector<std::uint32_t>> dependents;
  std::map<std::pair<SymbolId, std::vector<std::uint32_t>>, std::size_t> live;
  for (const auto& [key, list] : byLead) live[key] = list.size();
  std::vector<bool> dead(out.size(), false);
  std::vector<std::uint32_t> queue;
  for (std::uint32_t r = 0; r < out.size(); ++r) {
    if (out[r].root()) continue;
    std::pair<SymbolId, std::vector<std::uint32_t>> key{out[r].p, out[r].parentLead};
    if (!live.count(key)) {
      dead[r] = true;
      queue.push_back(r);
    } else {
      dependents[key].push_back(r);
    }
  }
  while (!queue.empty()) {
    const std::uint32_t r = queue.back();
    queue.pop_back();
    if (out[r].lead.empty()) continue;
    std::pair<SymbolId, std::vector<std::uint32_t>> key{out[r].s, out[r].lead};
    if (--live[key] > 0) continue;
    for (std::uint32_t q : dependents[key])
      if (!dead[q]) {
        dead[q] = true;
        queue.push_back(q);
      }
  }
  std::vector<Tuple> kept;
  for (std::uint32_t r = 0; r < out.size(); ++r)
    if (!dead[r]) kept.push_back(std::move(out[r]));
  return kept;
}

/// A candidate node: tuples sharing symbol, lead instances, parent-constraint
/// instances and copy index. Its variable is the disjunction of its tuples.
struct Group {
  SymbolId s = kNoSymbol;
  bool root = false;
  std::uint32_t copy = 0;
  std::vector<std::uint32_t> lead;
  std::vector<std::uint32_t> parentInst;
  std::vector<std::uint32_t> tuples;
};

struct ClauseStats {
  std::size_t link = 0, P = 0, A = 0, S = 0, L = 0, C = 0, PC = 0, N = 0, order = 0;
};

struct Formula {
  std::vector<Tuple> tuples;
  std::vector<Group> groups;
  std::vector<std::uint32_t> groupOf;              // per tuple
  std::vector<std::vector<std::uint32_t>> sigma;   // per tuple: tuples of its parent node
  sat::Cnf cnf;
  ClauseStats stats;
  std::size_t cycles = 0;

  [[nodiscard]] int tupleVar(std::size_t r) const { return static_cast<int>(r + 1); }
  [[nodiscard]] int groupVar(std::size_t g) const { return static_cast<int>(tuples.size() + g + 1); }

  /// One line per tuple and group variable, for auditing a CNF dump.
  [[nodiscard]] std::string mapping(const Signature& sig) const {
    std::string out;
    for (std::size_t r = 0; r < tuples.size(); ++r)
      out += std::to_string(tupleVar(r)) + " tuple " + describe(tuples[r], sig) + "\n";
    for (std::size_t g = 0; g < groups.size(); ++g)
      out += std::to_string(groupVar(g)) + " group s=" + sig[groups[g].s].name() + " tuples=" +
             detail::joinIds(groups[g].tuples) + "\n";
    return out;
  }
};

struct FormulaOptions {
  sat::CardinalityPolicy cardinality;
  bool nogoods = true;
  std::size_t cycleCap = 100000;
  bool symmetryBreaking = true;
};

/// P, A, L, C: exactly one per parent slot, argument slot, node instance and
/// parent instance. S: each symbol's count of nodes. PC: a child edge implies
/// an edge of its parent node. N: no cycle of edges may be fully true.
inline Formula buildFormula(std::vector<Tuple> tuples, const Multisets& m, const ConstraintSystem& system,
                            const FormulaOptions& options = {}) {
  Formula f;
  f.tuples = std::move(tuples);
  const std::size_t t = system.t();
  const auto n = static_cast<std::uint32_t>(f.tuples.size());

  struct Key {
    SymbolId s;
    bool root;
    std::uint32_t copy;
    std::vector<std::uint32_t> lead, parentInst;
    std::uint32_t solo;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, std::uint32_t> groupIndex;
  f.groupOf.resize(n);
  for (std::uint32_t r = 0; r < n; ++r) {
    const Tuple& x = f.tuples[r];
    // Without a lead or a distinguishing parent instance, a non-root edge is
    // its own node.
    const bool single = !x.parentInst.empty() && pooled(system.set(0)[m.instances[0][x.parentInst[0]].constraint]);
    const bool solo = !x.root() && x.lead.empty() && (x.parentInst.empty() || single);
    Key k{x.s, x.root(), x.copy, x.lead, x.parentInst, solo ? r : 0xFFFFFFFFU};
    auto [it, fresh] = groupIndex.emplace(std::move(k), static_cast<std::uint32_t>(f.groups.size()));
    if (fresh) f.groups.push_back(Group{x.s, x.root(), x.copy, x.lead, x.parentInst, {}});
    f.groups[it->second].tuples.push_back(r);
    f.groupOf[r] = it->second;
  }
  f.cnf.vars = static_cast<int>(n + f.groups.size());

  auto add = [&](std::vector<int> c, std::size_t& counter) {
    f.cnf.add(std::move(c));
    ++counter;
  };
  auto exactlyOne = [&](const std::vector<int>& lits, std::size_t& counter) {
    const auto before = f.cnf.clauses.size();
    sat::exactlyOne(f.cnf, lits, options.cardinality);
    counter += f.cnf.clauses.size() - before;
  };

  for (std::uint32_t g = 0; g < f.groups.size(); ++g) {
    std::vector<int> any{-f.groupVar(g)};
    for (std::uint32_t r : f.groups[g].tuples) {
      any.push_back(f.tupleVar(r));
      add({-f.tupleVar(r), f.groupVar(g)}, f.stats.link);
    }
    add(std::move(any), f.stats.link);
  }

  for (std::size_t i = 0; i < t; ++i) {
    const ConstraintSet& cs = system.set(i);
    const auto& inst = m.instances[i];
    std::vector<std::vector<std::vector<int>>> slots(inst.size());
    std::vector<std::vector<int>> users(inst.size());
    for (std::size_t k = 0; k < inst.size(); ++k) slots[k].resize(cs[inst[k].constraint].args.size());
    for (std::uint32_t r = 0; r < n; ++r) {
      const Tuple& x = f.tuples[r];
      if (!x.root()) slots[x.parentLead[i]][x.argSlot[i]].push_back(f.tupleVar(r));
      if (!x.parentInst.empty()) slots[x.parentInst[i]][x.parentSlot[i]].push_back(f.tupleVar(r));
    }
    for (std::uint32_t g = 0; g < f.groups.size(); ++g) {
      const Group& gr = f.groups[g];
      if (!gr.lead.empty()) users[gr.lead[i]].push_back(f.groupVar(g));
      if (!gr.parentInst.empty()) users[gr.parentInst[i]].push_back(f.groupVar(g));
    }
    for (std::size_t k = 0; k < inst.size(); ++k) {
      const Constraint& c = cs[inst[k].constraint];
      if (pooled(c)) {
        // Every copy has one slot and one user: the pooled instance takes
        // exactly `count` edges.
        if (inst[k].copy > 0) continue;
        std::size_t copies = 0;
        while (k + copies < inst.size() && inst[k + copies].constraint == inst[k].constraint) ++copies;
        const auto before = f.cnf.clauses.size();
        sat::exactly(f.cnf, slots[k][0], copies, options.cardinality);
        f.stats.P += f.cnf.clauses.size() - before;
        continue;
      }
      const bool node = c.nodeConstraint();
      for (const auto& lits : slots[k]) exactlyOne(lits, node ? f.stats.A : f.stats.P);
      exactlyOne(users[k], node ? f.stats.L : f.stats.C);
    }
  }

  std::unordered_map<SymbolId, std::vector<int>> bySymbol;
  for (std::uint32_t g = 0; g < f.groups.size(); ++g) bySymbol[f.groups[g].s].push_back(f.groupVar(g));
  for (const auto& [s, count] : m.symbols) {
    const auto before = f.cnf.clauses.size();
    sat::exactly(f.cnf, bySymbol[s], count, options.cardinality);
    f.stats.S += f.cnf.clauses.size() - before;
  }

  // Interchangeable isolated root copies are used in order.
  for (std::uint32_t g = 0; g < f.groups.size(); ++g) {
    const Group& gr = f.groups[g];
    if (gr.root && gr.copy > 0) {
      auto it = groupIndex.find(Key{gr.s, true, gr.copy - 1, {}, {}, 0xFFFFFFFFU});
      if (it != groupIndex.end()) add({-f.groupVar(g), f.groupVar(it->second)}, f.stats.order);
    }
  }

  // Nodes without parent constraints, or with a single-parent one, have one
  // parent edge.
  for (const Group& gr : f.groups) {
      if (gr.root || gr.tuples.size() < 2) continue;
      if (!gr.parentInst.empty() && !pooled(system.set(0)[m.instances[0][gr.parentInst[0]].constraint])) continue;
      std::vector<int> lits;
      for (std::uint32_t r : gr.tuples) lits.push_back(f.tupleVar(r));
      const auto before = f.cnf.clauses.size();
      sat::atMostOne(f.cnf, lits, options.cardinality);
      f.stats.order += f.cnf.clauses.size() - before;
    }

  std::map<std::pair<SymbolId, std::vector<std::uint32_t>>, std::vector<std::uint32_t>> byLead;
  for (std::uint32_t r = 0; r < n; ++r)
    if (!f.tuples[r].lead.empty()) byLead[{f.tuples[r].s, f.tuples[r].lead}].push_back(r);
  f.sigma.resize(n);
  for (std::uint32_t r = 0; r < n; ++r) {
    const Tuple& x = f.tuples[r];
    if (x.root()) continue;
    auto it = byLead.find({x.p, x.parentLead});
    std::vector<int> clause{-f.tupleVar(r)};
    if (it != byLead.end()) {
      f.sigma[r] = it->second;
      for (std::uint32_t q : it->second) clause.push_back(f.tupleVar(q));
    }
    add(std::move(clause), f.stats.PC);
  }

  if (options.nogoods) {
    // L admits one node per lead instance of the first set, so a node is
    // identified by that instance alone. Cycles are enumerated over those
    // instances: each edge variable is implied by its tuples, and with L and
    // PC a fully true instance cycle exists iff a fully true tuple cycle does.
    const auto instances = m.instances[0].size();
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> edgeVar;
    Digraph quotient(instances);
    for (std::uint32_t r = 0; r < n; ++r) {
      const Tuple& x = f.tuples[r];
      if (x.root() || x.lead.empty() || f.sigma[r].empty()) continue;
      auto [it, fresh] = edgeVar.emplace(std::make_pair(x.lead[0], x.parentLead[0]), 0);
      if (fresh) {
        it->second = f.cnf.newVar();
        quotient[x.lead[0]].push_back(x.parentLead[0]);
      }
      add({-f.tupleVar(r), it->second}, f.stats.N);
    }
    const auto cycles = simpleCycles(quotient, options.cycleCap);
    f.cycles = cycles.size();
    for (const auto& cyc : cycles) {
      std::vector<int> clause;
      for (std::size_t k = 0; k < cyc.size(); ++k)
        clause.push_back(-edgeVar.at({cyc[k], cyc[(k + 1) % cyc.size()]}));
      add(std::move(clause), f.stats.N);
    }
  }

  // Copies of one constraint are interchangeable. In every set after the
  // first, nodes take copies in the order of their first-set identity (lead
  // instance, else parent instance); any model can be permuted into this form.
  if (options.symmetryBreaking && t > 1) {
    auto identity = [&](const Group& g) -> std::optional<std::uint32_t> {
      if (!g.lead.empty()) return g.lead[0];
      if (!g.parentInst.empty() && !pooled(system.set(0)[m.instances[0][g.parentInst[0]].constraint]))
        return g.parentInst[0];
      return std::nullopt;
    };
    for (std::size_t i = 1; i < t; ++i) {
      // (constraint, copy, identity, group var) per instance use.
      std::map<std::uint32_t, std::vector<std::tuple<std::uint32_t, std::uint32_t, int>>> uses;
      for (std::uint32_t g = 0; g < f.groups.size(); ++g) {
        const Group& gr = f.groups[g];
        auto id = identity(gr);
        if (!id) continue;
        for (const auto* v : {&gr.lead, &gr.parentInst}) {
          if (v->empty()) continue;
          const Instance& inst = m.instances[i][(*v)[i]];
          if (pooled(system.set(i)[inst.constraint])) continue;
          uses[inst.constraint].emplace_back(inst.copy, *id, f.groupVar(g));
        }
      }
      for (const auto& [constraint, list] : uses)
        for (const auto& [copyA, idA, varA] : list)
          for (const auto& [copyB, idB, varB] : list)
            if (copyA < copyB && idA > idB) add({-varA, -varB}, f.stats.order);
    }
  }
  return f;
}

/// Assembles a model into a graph over the (masked) symbols. Each true group
/// becomes a node and each true non-root tuple an edge into the argument slot
/// it fills in the first set. Missing or doubly filled slots mean the formula
/// and the model disagree and are reported, never patched.
inline Graph modelToGraph(const sat::Result& model, const Formula& f, const ConstraintSystem& system,
                          const Multisets& m) {
  Graph g;
  std::vector<NodeId> node(f.groups.size(), 0);
  std::vector<bool> present(f.groups.size(), false);
  std::map<std::pair<SymbolId, std::vector<std::uint32_t>>, NodeId> byLead;
  for (std::uint32_t gi = 0; gi < f.groups.size(); ++gi) {
    if (!model.value(f.groupVar(gi))) continue;
    const Group& gr = f.groups[gi];
    const SymbolInfo& s = system.signature()[gr.s];
    present[gi] = true;
    node[gi] = g.add(gr.s, std::vector<NodeId>(s.arity, 0xFFFFFFFFU));
    if (!gr.lead.empty() && !byLead.emplace(std::make_pair(gr.s, gr.lead), node[gi]).second)
      throw DecodeError("two nodes claim the same lead instances");
  }
  for (std::uint32_t r = 0; r < f.tuples.size(); ++r) {
    if (!model.value(f.tupleVar(r))) continue;
    const Tuple& x = f.tuples[r];
    if (!present[f.groupOf[r]]) throw DecodeError("true edge of an absent node");
    if (x.root()) continue;
    auto it = byLead.find({x.p, x.parentLead});
    if (it == byLead.end()) throw DecodeError("edge into a node that is not present");
    auto& args = g[it->second].args;
    const std::uint16_t slot = x.argSlot[0];
    const auto& c = system.set(0)[m.instances[0][x.parentLead[0]].constraint];
    if (slot >= args.size() || slot >= c.args.size()) throw DecodeError("argument slot out of range");
    if (args[slot] != 0xFFFFFFFFU) throw DecodeError("argument slot filled twice");
    args[slot] = node[f.groupOf[r]];
  }
  for (NodeId v = 0; v < g.size(); ++v)
    for (NodeId a : g[v].args)
      if (a == 0xFFFFFFFFU) throw DecodeError("argument slot left empty");
  return g;
}

enum class CycleMode {
  eager,  // enumerate every simple cycle up front and assert all nogoods
  lazy,   // assert nogoods only for cycles that appear in models
  automatic,  // eager, turning lazy when the cycle count passes the cap
};

struct DecodeOptions {
  bool verify = false;
  double budgetSeconds = 5.0;
  sat::BackendSpec backend;
  sat::CardinalityPolicy cardinality;
  bool nogoods = true;
  CycleMode cycles = CycleMode::automatic;
  std::size_t cycleCap = 100000;
  std::size_t tupleCap = 2000000;
  bool symmetryBreaking = true;
  std::size_t maxSolutions = 1;  // > 1 enumerates further distinct graphs
  // Implies verify. Searches for a second distinct graph with the same vector:
  // one found gives ambiguous, an exhausted budget gives timeout.
  bool unique = false;
  std::string auditPrefix;       // writes <prefix>.cnf and <prefix>.map when set
};

enum class DecodeStatus { decoded, timeout, unsat, cycleBudget, tupleBudget, invalidModel, ambiguous };

inline const char* decodeStatusName(DecodeStatus s) {
  switch (s) {
    case DecodeStatus::decoded: return "decoded";
    case DecodeStatus::timeout: return "timeout";
    case DecodeStatus::unsat: return "unsat";
    case DecodeStatus::cycleBudget: return "cycle-budget";
    case DecodeStatus::tupleBudget: return "tuple-budget";
    case DecodeStatus::ambiguous: return "ambiguous";
    default: return "invalid-model";
  }
}

struct DecodeStats {
  std::size_t tuples = 0, groups = 0, variables = 0, clauses = 0, cycles = 0, solves = 0, rejected = 0;
  double buildSeconds = 0, solveSeconds = 0;
};

struct DecodeResult {
  DecodeStatus status = DecodeStatus::unsat;
  Graph graph;                     // base symbols
  Graph masked;                    // as assembled, masked symbols
  std::vector<Graph> alternatives;  // further solutions when enumerating
  bool verified = false;
  DecodeStats stats;
  std::string diagnostic;

  [[nodiscard]] bool ok() const noexcept { return status == DecodeStatus::decoded; }
};

namespace detail {

inline bool structural(ViolationKind k) { return k != ViolationKind::maskDepth; }

// Cycles among the true tuples of a model, as nogood clauses.
inline std::vector<std::vector<int>> modelCycles(const sat::Result& model, const Formula& f, std::size_t cap) {
  const auto n = static_cast<std::uint32_t>(f.tuples.size());
  std::vector<std::uint32_t> index(n, 0xFFFFFFFFU), back;
  for (std::uint32_t r = 0; r < n; ++r)
    if (model.value(f.tupleVar(r))) {
      index[r] = static_cast<std::uint32_t>(back.size());
      back.push_back(r);
    }
  Digraph g(back.size());
  for (std::uint32_t k = 0; k < back.size(); ++k)
    for (std::uint32_t q : f.sigma[back[k]])
      if (index[q] != 0xFFFFFFFFU) g[k].push_back(index[q]);
  std::vector<std::vector<int>> out;
  for (const auto& cyc : simpleCycles(g, cap)) {
    std::vector<int> clause;
    for (std::uint32_t k : cyc) clause.push_back(-f.tupleVar(back[k]));
    out.push_back(std::move(clause));
  }
  return out;
}

}  // namespace detail

/// Reconstructs a graph from a count vector. With `verify`, a candidate whose
/// re-encoding differs from the input is blocked and the solver asked again.
inline DecodeResult decode(const CountVector& v, const ConstraintSystem& system, const DecodeOptions& options = {}) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const auto deadline = sat::Deadline::after(options.budgetSeconds);
  const Signature& sig = system.signature();
  DecodeResult out;
  const Multisets m = extractMultisets(v, system);
  if (m.empty()) {
    out.status = DecodeStatus::decoded;
    out.verified = v.total() == 0;
    if (!out.verified) {
      out.status = DecodeStatus::unsat;
      out.diagnostic = "constraint counts without any symbols";
    }
    return out;
  }

  Formula f;
  bool lazy = options.nogoods && options.cycles == CycleMode::lazy;
  try {
    const Associations a = collectAssociations(m, system);
    auto tuples = enumerateTuples(m, a, system, options.tupleCap, deadline);
    FormulaOptions fo{options.cardinality, options.nogoods && !lazy, options.cycleCap, options.symmetryBreaking};
    try {
      f = buildFormula(tuples, m, system, fo);
    } catch (const CycleBudgetExceeded&) {
      if (options.cycles != CycleMode::automatic) throw;
      lazy = true;
      fo.nogoods = false;
      f = buildFormula(std::move(tuples), m, system, fo);
    }
  } catch (const TupleBudgetExceeded& e) {
    out.status = DecodeStatus::tupleBudget;
    out.diagnostic = e.what();
    return out;
  } catch (const CycleBudgetExceeded& e) {
    out.status = DecodeStatus::cycleBudget;
    out.diagnostic = e.what();
    return out;
  } catch (const DecodeError& e) {
    out.status = DecodeStatus::timeout;
    out.diagnostic = e.what();
    return out;
  }
  out.stats.tuples = f.tuples.size();
  out.stats.groups = f.groups.size();
  out.stats.variables = static_cast<std::size_t>(f.cnf.vars);
  out.stats.clauses = f.cnf.clauses.size();
  out.stats.cycles = f.cycles;
  out.stats.buildSeconds = std::chrono::duration<double>(Clock::now() - start).count();

  if (!options.auditPrefix.empty()) {
    std::ofstream cnf(options.auditPrefix + ".cnf");
    f.cnf.writeDimacs(cnf, {"satvec decoding formula", "variables are listed in the matching .map file"});
    std::ofstream map(options.auditPrefix + ".map");
    map << f.mapping(sig);
  }

  auto session = sat::openSession(options.backend);
  session->load(f.cnf);
  std::vector<Graph> found;
  const auto solveStart = Clock::now();
  const bool verify = options.verify || options.unique;
  const std::size_t maxSolutions = options.unique ? std::max<std::size_t>(options.maxSolutions, 2) : options.maxSolutions;
  auto finish = [&](DecodeStatus status, std::string diagnostic) {
    out.stats.solveSeconds = std::chrono::duration<double>(Clock::now() - solveStart).count();
    if (!found.empty()) {
      out.status = DecodeStatus::decoded;
      if (options.unique && found.size() > 1) out.status = DecodeStatus::ambiguous;
      if (options.unique && found.size() == 1 && status != DecodeStatus::unsat) {
        out.status = status;
        out.diagnostic = "uniqueness not settled: " + diagnostic;
      }
      out.masked = found.front();
      out.graph = stripMasks(out.masked, sig);
      for (auto it = found.begin() + 1; it != found.end(); ++it) out.alternatives.push_back(stripMasks(*it, sig));
    } else {
      out.status = status;
      out.diagnostic = std::move(diagnostic);
    }
    return out;
  };

  for (;;) {
    sat::Result r;
    try {
      r = session->solve(deadline);
    } catch (const sat::BackendError& e) {
      throw DecodeError(std::string("solver backend failed: ") + e.what());
    }
    ++out.stats.solves;
    if (r.status == sat::Status::unknown) return finish(DecodeStatus::timeout, r.diagnostic);
    if (r.status == sat::Status::unsat)
      return finish(DecodeStatus::unsat, out.stats.rejected ? "every model re-encoded to a different vector"
                                                           : "no graph has this vector");

    if (lazy) {
      std::vector<std::vector<int>> nogoods;
      try {
        nogoods = detail::modelCycles(r, f, options.cycleCap);
      } catch (const CycleBudgetExceeded& e) {
        return finish(DecodeStatus::cycleBudget, e.what());
      }
      if (!nogoods.empty()) {
        out.stats.cycles += nogoods.size();
        for (auto& c : nogoods) session->addClause(c);
        continue;
      }
    }

    Graph masked;
    try {
      masked = modelToGraph(r, f, system, m);
    } catch (const DecodeError& e) {
      return finish(DecodeStatus::invalidModel, e.what());
    }
    alignToMasks(masked, sig);
    const Graph base = stripMasks(masked, sig);
    const auto violations = validate(base, sig);
    bool accept = true;
    for (const auto& viol : violations)
      if (detail::structural(viol.kind)) {
        out.masked = masked;
        out.graph = base;
        return finish(DecodeStatus::invalidModel, "assembled graph is invalid: " + viol.message);
      }
    if (!violations.empty()) accept = false;
    if (accept && verify) {
      try {
        accept = encode(base, system) == v;
      } catch (const std::exception&) {
        accept = false;
      }
    }
    if (accept && std::any_of(found.begin(), found.end(), [&](const Graph& g) {
          return canonicalText(g, sig) == canonicalText(masked, sig);
        })) {
      // A symmetric model of a graph already found.
    } else if (accept) {
      found.push_back(masked);
      if (verify && found.size() == 1) out.verified = true;
      if (found.size() >= maxSolutions) return finish(DecodeStatus::decoded, "");
    } else {
      ++out.stats.rejected;
      if (!verify) {
        // Unverified decoding still reports a mask-inconsistent model as is.
        found.push_back(masked);
        return finish(DecodeStatus::decoded, "");
      }
    }
    std::vector<int> block;
    for (std::uint32_t t = 0; t < f.tuples.size(); ++t)
      if (r.value(f.tupleVar(t))) block.push_back(-f.tupleVar(t));
    session->addClause(block);
  }
}

/// The variable assignment induced by an encodable graph's own decomposition,
/// as unit literals over tuple and group variables. Throws DecodeError when
/// some edge of `masked` has no tuple in the formula.
inline std::vector<int> inducedAssignment(const Graph& masked, const Formula& f, const Multisets& m,
                                          const ConstraintSystem& system) {
  const std::size_t t = system.t();
  const auto matched = matchNodes(masked, system);
  // Instance id of (constraint, copy) per set. The first set hands out copies
  // in node order; later sets follow the first-set identity of each node, the
  // order the symmetry-breaking clauses require.
  std::vector<std::unordered_map<std::uint32_t, std::uint32_t>> firstInstance(t);
  for (std::size_t i = 0; i < t; ++i)
    for (std::uint32_t k = static_cast<std::uint32_t>(m.instances[i].size()); k-- > 0;)
      firstInstance[i][m.instances[i][k].constraint] = k;
  const auto n = masked.size();
  std::vector<std::vector<std::uint32_t>> leadInst(n, std::vector<std::uint32_t>(t)),
      parentInst(n, std::vector<std::uint32_t>(t));
  for (std::size_t i = 0; i < t; ++i) {
    // (identity, node, is-parent-role) per constraint.
    std::map<std::uint32_t, std::vector<std::tuple<std::uint32_t, NodeId, bool>>> uses;
    for (NodeId v = 0; v < n; ++v) {
      std::uint32_t id = 0;
      if (i > 0) id = matched[v][0].node ? leadInst[v][0] : parentInst[v][0];
      if (matched[v][i].node) uses[*matched[v][i].node].emplace_back(i ? id : v, v, false);
      if (matched[v][i].parent) uses[*matched[v][i].parent].emplace_back(i ? id : v, v, true);
    }
    for (auto& [constraint, list] : uses) {
      std::sort(list.begin(), list.end());
      auto it = firstInstance[i].find(constraint);
      if (it == firstInstance[i].end()) throw DecodeError("graph uses a constraint absent from the vector");
      const bool pool = pooled(system.set(i)[constraint]);
      for (std::uint32_t c = 0; c < list.size(); ++c) {
        const auto& [id, v, parentRole] = list[c];
        (parentRole ? parentInst : leadInst)[v][i] = it->second + (pool ? 0 : c);
      }
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    if (!matched[v][0].node) leadInst[v].clear();
    if (!matched[v][0].parent) parentInst[v].clear();
  }

  // Slot assignment: occurrence k of a list of symbols to constraint slots.
  auto assignSlots = [](const ConstraintSet& set, const Constraint& c, const std::vector<SymbolId>& syms) {
    std::vector<std::uint16_t> slotOf(syms.size());
    if (c.positional()) {
      for (std::size_t k = 0; k < syms.size(); ++k) slotOf[k] = static_cast<std::uint16_t>(k);
      return slotOf;
    }
    std::vector<std::size_t> owner(c.args.size(), syms.size());
    for (std::size_t k = 0; k < syms.size(); ++k) {
      std::vector<bool> seen(c.args.size(), false);
      auto augment = [&](auto&& self, std::size_t u) -> bool {
        for (std::size_t j = 0; j < c.args.size(); ++j) {
          if (seen[j] || !set.contains(c.args[j], syms[u])) continue;
          seen[j] = true;
          if (owner[j] == syms.size() || self(self, owner[j])) {
            owner[j] = u;
            return true;
          }
        }
        return false;
      };
      if (!augment(augment, k)) throw DecodeError("no slot correspondence");
    }
    for (std::size_t j = 0; j < owner.size(); ++j) slotOf[owner[j]] = static_cast<std::uint16_t>(j);
    return slotOf;
  };

  // Incoming edges per node as (parent, argument index), in node order.
  std::vector<std::vector<std::pair<NodeId, std::size_t>>> incoming(n);
  for (NodeId p = 0; p < n; ++p)
    for (std::size_t k = 0; k < masked[p].args.size(); ++k) incoming[masked[p].args[k]].push_back({p, k});

  std::map<Tuple, std::uint32_t> index;
  for (std::uint32_t r = 0; r < f.tuples.size(); ++r) index.emplace(f.tuples[r], r);
  std::vector<bool> tupleTrue(f.tuples.size(), false);
  auto mark = [&](const Tuple& x) {
    auto it = index.find(x);
    if (it == index.end()) throw DecodeError("no tuple for " + describe(x, system.signature()));
    tupleTrue[it->second] = true;
  };

  std::vector<std::vector<std::vector<std::uint16_t>>> argSlots(n, std::vector<std::vector<std::uint16_t>>(t));
  for (NodeId p = 0; p < n; ++p) {
    if (masked[p].args.empty()) continue;
    std::vector<SymbolId> syms;
    for (NodeId a : masked[p].args) syms.push_back(masked[a].symbol);
    for (std::size_t i = 0; i < t; ++i)
      argSlots[p][i] = assignSlots(system.set(i), system.set(i)[*matched[p][i].node], syms);
  }

  std::unordered_map<SymbolId, std::uint32_t> rootCopies;
  for (NodeId v = 0; v < n; ++v) {
    Tuple x;
    x.s = masked[v].symbol;
    x.lead = leadInst[v];
    if (incoming[v].empty()) {
      if (x.lead.empty()) x.copy = rootCopies[x.s]++;
      mark(x);
      continue;
    }
    std::vector<std::vector<std::uint16_t>> parentSlots(t);
    if (!parentInst[v].empty()) {
      std::vector<SymbolId> syms;
      for (const auto& [p, k] : incoming[v]) syms.push_back(masked[p].symbol);
      for (std::size_t i = 0; i < t; ++i)
        parentSlots[i] = assignSlots(system.set(i), system.set(i)[*matched[v][i].parent], syms);
    }
    for (std::size_t e = 0; e < incoming[v].size(); ++e) {
      const auto [p, k] = incoming[v][e];
      Tuple y = x;
      y.p = masked[p].symbol;
      y.parentLead = leadInst[p];
      for (std::size_t i = 0; i < t; ++i) y.argSlot.push_back(argSlots[p][i][k]);
      if (!parentInst[v].empty()) {
        y.parentInst = parentInst[v];
        for (std::size_t i = 0; i < t; ++i) y.parentSlot.push_back(parentSlots[i][e]);
      }
      mark(y);
    }
  }

  std::vector<int> units;
  std::vector<bool> groupTrue(f.groups.size(), false);
  for (std::uint32_t r = 0; r < f.tuples.size(); ++r) {
    units.push_back(tupleTrue[r] ? f.tupleVar(r) : -f.tupleVar(r));
    if (tupleTrue[r]) groupTrue[f.groupOf[r]] = true;
  }
  for (std::uint32_t g = 0; g < f.groups.size(); ++g) units.push_back(groupTrue[g] ? f.groupVar(g) : -f.groupVar(g));
  return units;
}

}  // namespace satvec
