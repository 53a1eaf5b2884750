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
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "satvec/rng.hpp"
#include "satvec/signature.hpp"

namespace satvec {

/// Random near-equal partition of a symbol set into at most w cells.
///
/// Cells are numbered 0..cells()-1. Membership is stored densely over the
/// id range spanned by the input set, so lookups are O(1).
class Partition {
public:
  static constexpr std::uint16_t kAbsent = 0xFFFF;

  Partition() = default;

  [[nodiscard]] std::uint16_t cells() const noexcept { return cells_; }
  [[nodiscard]] std::size_t members() const noexcept { return members_; }

  [[nodiscard]] std::optional<std::uint16_t> cellOf(SymbolId s) const noexcept {
    if (s < lo_ || s - lo_ >= cellOf_.size()) return std::nullopt;
    const auto c = cellOf_[s - lo_];
    if (c == kAbsent) return std::nullopt;
    return c;
  }

  [[nodiscard]] bool contains(SymbolId s, std::uint16_t cell) const noexcept {
    auto c = cellOf(s);
    return c && *c == cell;
  }

  /// Members of one cell in ascending id order.
  [[nodiscard]] std::vector<SymbolId> cell(std::uint16_t c) const {
    std::vector<SymbolId> out;
    for (std::size_t i = 0; i < cellOf_.size(); ++i)
      if (cellOf_[i] == c) out.push_back(lo_ + static_cast<SymbolId>(i));
    return out;
  }

  [[nodiscard]] std::vector<std::size_t> cellSizes() const {
    std::vector<std::size_t> sizes(cells_, 0);
    for (auto c : cellOf_)
      if (c != kAbsent) ++sizes[c];
    return sizes;
  }

  void digest(Digest& d) const {
    d.add(cells_);
    d.add(lo_);
    d.add(cellOf_.size());
    for (auto c : cellOf_) d.add(c);
  }

  /// Shuffle `set` and deal it round-robin into min(w, |set|) cells, then
  /// optionally append `extra` as one more cell of its own.
  static Partition deal(std::uint32_t w, std::vector<SymbolId> set, RandomStream& rng,
                        std::span<const SymbolId> extra = {}) {
    if (w == 0) throw std::invalid_argument("split width must be positive");
    Partition p;
    std::vector<SymbolId> all = set;
    all.insert(all.end(), extra.begin(), extra.end());
    if (all.empty()) return p;
    auto [mn, mx] = std::minmax_element(all.begin(), all.end());
    p.lo_ = *mn;
    p.cellOf_.assign(*mx - *mn + 1, kAbsent);
    rng.shuffle(std::span<SymbolId>(set));
    const auto width = static_cast<std::uint16_t>(std::min<std::size_t>(w, set.size()));
    for (std::size_t i = 0; i < set.size(); ++i) {
      auto& slot = p.cellOf_[set[i] - p.lo_];
      if (slot != kAbsent) throw std::invalid_argument("split input contains duplicates");
      slot = static_cast<std::uint16_t>(i % width);
    }
    p.cells_ = width;
    p.members_ = all.size();
    if (!extra.empty()) {
      for (SymbolId s : extra) {
        auto& slot = p.cellOf_[s - p.lo_];
        if (slot != kAbsent) throw std::invalid_argument("isolated symbol also in split input");
        slot = p.cells_;
      }
      ++p.cells_;
    }
    return p;
  }

  /// A partition whose only cell is {s}.
  static Partition singleton(SymbolId s) {
    Partition p;
    p.lo_ = s;
    p.cellOf_.assign(1, 0);
    p.cells_ = 1;
    p.members_ = 1;
    return p;
  }

private:
  SymbolId lo_ = 0;
  std::vector<std::uint16_t> cellOf_;
  std::uint16_t cells_ = 0;
  std::size_t members_ = 0;
};

/// split(w, M): random partition of M into at most w equally-sized cells.
inline Partition split(std::uint32_t w, std::vector<SymbolId> set, RandomStream& rng) {
  return Partition::deal(w, std::move(set), rng);
}

/// All length-l sequences over cells 0..w-1 that never step to a lower cell,
/// in lexicographic order. There are C(l+w-1, l) of them.
inline std::vector<std::vector<std::uint16_t>> nonDecreasingSequences(std::uint16_t w, std::uint32_t l) {
  std::vector<std::vector<std::uint16_t>> out;
  if (w == 0) return out;
  std::vector<std::uint16_t> cur(l, 0);
  for (;;) {
    out.push_back(cur);
    std::size_t i = l;
    while (i > 0 && cur[i - 1] == w - 1) --i;
    if (i == 0) break;
    const auto v = static_cast<std::uint16_t>(cur[i - 1] + 1);
    for (std::size_t j = i - 1; j < l; ++j) cur[j] = v;
  }
  return out;
}

struct OrderedCells {
  Partition partition;
  std::vector<std::vector<std::uint16_t>> sequences;
};

/// order(w, l, M): split M into w cells, then every non-decreasing
/// length-l sequence of those cells.
inline OrderedCells order(std::uint32_t w, std::uint32_t l, std::vector<SymbolId> set, RandomStream& rng) {
  OrderedCells out{split(w, std::move(set), rng), {}};
  out.sequences = nonDecreasingSequences(out.partition.cells(), l);
  return out;
}

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline std::uint64_t ipow(std::uint64_t b, std::uint32_t e) {
  std::uint64_t r = 1;
  while (e--) r *= b;
  return r;
}

enum class Family : std::uint8_t { ordered, unordered, parent, sequence };

inline std::string_view familyName(Family f) noexcept {
  switch (f) {
    case Family::ordered: return "ordered";
    case Family::unordered: return "unordered";
    case Family::parent: return "parent";
    case Family::sequence: return "sequence";
  }
  return "?";
}

struct CellRef {
  std::uint32_t partition = 0;
  std::uint16_t cell = 0;
  friend bool operator==(const CellRef&, const CellRef&) = default;
  friend auto operator<=>(const CellRef&, const CellRef&) = default;
};

/// One generated pattern. For node families `lead` is the lead cell and
/// `args` the argument cells; for parent constraints `lead` is the child
/// cell and `args` the parent cells; for sequences `args` are the slot cells
/// followed by the next-position (or end) cell.
struct Constraint {
  Family family = Family::ordered;
  bool rootLead = false;
  CellRef lead;
  std::vector<CellRef> args;
  std::uint32_t block = 0;

  [[nodiscard]] bool nodeConstraint() const noexcept { return family != Family::parent; }
  [[nodiscard]] bool positional() const noexcept { return family == Family::ordered || family == Family::sequence; }
};

/// Constraints sharing one lead cell (or child cell) and one set of argument
/// partitions. Its constraints are contiguous: [first, first + count).
struct Block {
  Family family = Family::ordered;
  bool rootLead = false;
  std::uint32_t arity = 0;
  CellRef lead;
  std::vector<std::uint32_t> argPartitions;  // per position, or one shared
  std::uint32_t first = 0;
  std::uint32_t count = 0;
  std::uint32_t position = 0;  // sequence position j
  bool terminated = false;     // sequence variant
};

struct Widths {
  std::uint32_t ordered = 5;
  std::uint32_t unordered = 4;
  std::uint32_t parent = 4;       // child width w of parent constraints
  std::uint32_t parentCells = 4;  // parent width c
  std::uint32_t sequence = 5;
  friend bool operator==(const Widths&, const Widths&) = default;
};

struct FamilyCounts {
  std::uint64_t ordered = 0, unordered = 0, parent = 0, sequence = 0;
  [[nodiscard]] std::uint64_t total() const noexcept { return ordered + unordered + parent + sequence; }
  friend bool operator==(const FamilyCounts&, const FamilyCounts&) = default;
};

/// One of the t parallel constraint collections.
class ConstraintSet {
public:
  [[nodiscard]] std::size_t size() const noexcept { return constraints_.size(); }
  [[nodiscard]] const Constraint& operator[](std::size_t i) const { return constraints_.at(i); }
  [[nodiscard]] const std::vector<Constraint>& constraints() const noexcept { return constraints_; }
  [[nodiscard]] const Partition& partition(std::uint32_t i) const { return partitions_.at(i); }
  [[nodiscard]] const std::vector<Partition>& partitions() const noexcept { return partitions_; }
  [[nodiscard]] const Block& block(std::uint32_t i) const { return blocks_.at(i); }
  [[nodiscard]] const std::vector<Block>& blocks() const noexcept { return blocks_; }

  [[nodiscard]] bool contains(CellRef ref, SymbolId s) const { return partitions_[ref.partition].contains(s, ref.cell); }

  /// Node block whose lead cell holds `s` on the given side.
  [[nodiscard]] std::optional<std::uint32_t> nodeBlock(SymbolId s, bool rootSide) const {
    const auto& idx = rootSide ? rootLead_ : internalLead_;
    if (s >= idx.size() || idx[s] == kNone) return std::nullopt;
    return idx[s];
  }

  /// Sequence block for position j (1-based) and variant.
  [[nodiscard]] std::optional<std::uint32_t> sequenceBlock(std::uint32_t j, bool terminated) const {
    auto it = sequenceIndex_.find({j, terminated});
    if (it == sequenceIndex_.end()) return std::nullopt;
    return it->second;
  }

  /// Parent block for a child with `parents` incoming edges.
  [[nodiscard]] std::optional<std::uint32_t> parentBlock(SymbolId child, std::uint32_t parents) const {
    if (parents == 0 || parents > parentIndex_.size()) return std::nullopt;
    const auto& idx = parentIndex_[parents - 1];
    if (child >= idx.size() || idx[child] == kNone) return std::nullopt;
    return idx[child];
  }

  [[nodiscard]] FamilyCounts counts() const {
    FamilyCounts c;
    for (const auto& k : constraints_) {
      switch (k.family) {
        case Family::ordered: ++c.ordered; break;
        case Family::unordered: ++c.unordered; break;
        case Family::parent: ++c.parent; break;
        case Family::sequence: ++c.sequence; break;
      }
    }
    return c;
  }

  void digest(Digest& d) const {
    d.add(partitions_.size());
    for (const auto& p : partitions_) p.digest(d);
    d.add(constraints_.size());
    for (const auto& c : constraints_) {
      d.add(static_cast<std::uint64_t>(c.family));
      d.add(c.rootLead);
      d.add(c.lead.partition);
      d.add(c.lead.cell);
      d.add(c.args.size());
      for (const auto& a : c.args) {
        d.add(a.partition);
        d.add(a.cell);
      }
    }
  }

private:
  friend class ConstraintSetBuilder;
  static constexpr std::uint32_t kNone = 0xFFFFFFFFU;

  std::vector<Partition> partitions_;
  std::vector<Constraint> constraints_;
  std::vector<Block> blocks_;
  std::vector<std::uint32_t> rootLead_, internalLead_;
  std::vector<std::vector<std::uint32_t>> parentIndex_;
  std::map<std::pair<std::uint32_t, bool>, std::uint32_t> sequenceIndex_;
};

/// Generates the constraint families of one parallel set.
class ConstraintSetBuilder {
public:
  ConstraintSetBuilder(const Signature& sig, const Widths& widths, RandomStream rng)
      : sig_(sig), widths_(widths), rng_(rng) {
    set_.rootLead_.assign(sig.size(), ConstraintSet::kNone);
    set_.internalLead_.assign(sig.size(), ConstraintSet::kNone);
    for (SymbolId s : sig.internals()) {
      if (sig.negation() != kNoSymbol && sig.options().negationIsolate && sig[s].base == sig.negation())
        negations_.push_back(s);
      else
        omega_.push_back(s);
    }
  }

  void generateOrdered() { generateNode(Ordering::ordered); }
  void generateUnordered() { generateNode(Ordering::unordered); }

  void generateParent() {
    const auto parents = sig_.parentCapable();
    set_.parentIndex_.assign(sig_.maxParents(), std::vector<std::uint32_t>(sig_.size(), ConstraintSet::kNone));
    for (std::uint32_t i = 1; i <= sig_.maxParents(); ++i) {
      const auto childPart = addPartition(splitOmega(widths_.parent));
      const auto childCells = set_.partitions_[childPart].cells();
      for (std::uint16_t f = 0; f < childCells; ++f) {
        const auto parentPart = addPartition(split(widths_.parentCells, parents, rng_));
        Block b;
        b.family = Family::parent;
        b.arity = i;
        b.lead = {childPart, f};
        b.argPartitions = {parentPart};
        const auto blockId = beginBlock(b);
        for (const auto& seq : nonDecreasingSequences(set_.partitions_[parentPart].cells(), i)) {
          Constraint c;
          c.family = Family::parent;
          c.lead = b.lead;
          for (auto cell : seq) c.args.push_back({parentPart, cell});
          addConstraint(std::move(c), blockId);
        }
        for (SymbolId s : set_.partitions_[childPart].cell(f)) set_.parentIndex_[i - 1][s] = blockId;
      }
    }
  }

  void generateSequence() {
    const auto& seq = *sig_.options().sequence;
    std::vector<std::vector<SymbolId>> pools(seq.slots);
    for (SymbolId s = 0; s < sig_.size(); ++s)
      if (sig_[s].slot) pools[*sig_[s].slot - 1].push_back(s);
    std::vector<std::uint32_t> leadPart, nextPart;
    for (std::uint32_t j = 1; j <= seq.length; ++j) {
      leadPart.push_back(addPartition(Partition::singleton(sig_.position(j))));
      nextPart.push_back(j < seq.length ? addPartition(Partition::singleton(sig_.position(j + 1))) : 0);
    }
    const auto eosPart = addPartition(Partition::singleton(sig_.eos()));
    for (std::uint32_t j = 1; j <= seq.length; ++j) {
      for (bool terminated : {true, false}) {
        if (!terminated && j == seq.length) continue;
        Block b;
        b.family = Family::sequence;
        b.rootLead = j == 1;
        b.arity = seq.slots + 1;
        b.lead = {leadPart[j - 1], 0};
        b.position = j;
        b.terminated = terminated;
        for (std::uint32_t r = 0; r < seq.slots; ++r)
          b.argPartitions.push_back(addPartition(split(widths_.sequence, pools[r], rng_)));
        b.argPartitions.push_back(terminated ? eosPart : nextPart[j - 1]);
        const auto blockId = beginBlock(b);
        emitProduct(b, blockId);
        set_.sequenceIndex_[{j, terminated}] = blockId;
      }
    }
  }

  ConstraintSet finish() && { return std::move(set_); }

private:
  void generateNode(Ordering ordering) {
    const Family family = ordering == Ordering::ordered ? Family::ordered : Family::unordered;
    const std::uint32_t w = ordering == Ordering::ordered ? widths_.ordered : widths_.unordered;
    for (bool rootSide : {true, false}) {
      std::map<std::uint32_t, std::vector<SymbolId>> groups;
      for (SymbolId s = 0; s < sig_.size(); ++s) {
        const SymbolInfo& info = sig_[s];
        if (info.leaf() || info.ordering != ordering || info.positionSymbol) continue;
        if (rootSide ? info.root : info.internal) groups[info.arity].push_back(s);
      }
      for (const auto& [arity, group] : groups) {
        const auto leadPart = addPartition(split(w, group, rng_));
        for (std::uint16_t cell = 0; cell < set_.partitions_[leadPart].cells(); ++cell) {
          Block b;
          b.family = family;
          b.rootLead = rootSide;
          b.arity = arity;
          b.lead = {leadPart, cell};
          if (family == Family::ordered) {
            for (std::uint32_t k = 0; k < arity; ++k) b.argPartitions.push_back(addPartition(splitOmega(w)));
          } else {
            b.argPartitions.push_back(addPartition(splitOmega(w)));
          }
          const auto blockId = beginBlock(b);
          if (family == Family::ordered) {
            emitProduct(b, blockId);
          } else {
            for (const auto& seq : nonDecreasingSequences(set_.partitions_[b.argPartitions[0]].cells(), arity)) {
              Constraint c;
              c.family = family;
              c.rootLead = rootSide;
              c.lead = b.lead;
              for (auto cellIdx : seq) c.args.push_back({b.argPartitions[0], cellIdx});
              addConstraint(std::move(c), blockId);
            }
          }
          auto& idx = rootSide ? set_.rootLead_ : set_.internalLead_;
          for (SymbolId s : set_.partitions_[leadPart].cell(cell)) idx[s] = blockId;
        }
      }
    }
  }

  // Every combination of one cell per argument partition, first position
  // most significant.
  void emitProduct(const Block& b, std::uint32_t blockId) {
    std::vector<std::uint16_t> radix;
    for (auto p : b.argPartitions) radix.push_back(set_.partitions_[p].cells());
    if (std::any_of(radix.begin(), radix.end(), [](auto r) { return r == 0; })) return;
    std::vector<std::uint16_t> cur(radix.size(), 0);
    for (;;) {
      Constraint c;
      c.family = b.family;
      c.rootLead = b.rootLead;
      c.lead = b.lead;
      for (std::size_t k = 0; k < cur.size(); ++k) c.args.push_back({b.argPartitions[k], cur[k]});
      addConstraint(std::move(c), blockId);
      std::size_t k = cur.size();
      while (k > 0 && ++cur[k - 1] == radix[k - 1]) cur[--k] = 0;
      if (k == 0) break;
    }
  }

  Partition splitOmega(std::uint32_t w) { return Partition::deal(w, omega_, rng_, negations_); }

  std::uint32_t addPartition(Partition p) {
    set_.partitions_.push_back(std::move(p));
    return static_cast<std::uint32_t>(set_.partitions_.size() - 1);
  }

  std::uint32_t beginBlock(Block b) {
    b.first = static_cast<std::uint32_t>(set_.constraints_.size());
    set_.blocks_.push_back(std::move(b));
    return static_cast<std::uint32_t>(set_.blocks_.size() - 1);
  }

  void addConstraint(Constraint c, std::uint32_t blockId) {
    c.block = blockId;
    set_.constraints_.push_back(std::move(c));
    ++set_.blocks_[blockId].count;
  }

  const Signature& sig_;
  Widths widths_;
  RandomStream rng_;
  std::vector<SymbolId> omega_, negations_;
  ConstraintSet set_;
};

class SystemError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SystemConfig {
  Widths widths;
  std::uint32_t t = 1;
  std::uint64_t seed = 0;
  bool parentConstraints = true;  // ignored (off) for sequence signatures
  std::uint32_t maxOrderedArity = 0;    // 0 = unlimited
  std::uint32_t maxUnorderedArity = 0;  // 0 = unlimited
};

/// Closed-form family sizes per parallel set, from the maximum arities.
inline FamilyCounts closedFormCounts(const Signature& sig, const SystemConfig& config) {
  FamilyCounts out;
  const auto& w = config.widths;
  if (sig.sequenceMode()) {
    const auto& seq = *sig.options().sequence;
    const std::uint64_t ws = ipow(w.sequence, seq.slots);
    const std::uint64_t piCount = 1, funcCount = seq.length - 1;
    // w^s + 2*sum_{|Pi|} w^s + 2*sum_{|Omega_func|-1} w^s
    out.sequence = ws + 2 * piCount * ws + (funcCount >= 1 ? 2 * (funcCount - 1) * ws : 0);
    if (seq.length == 1) out.sequence = ws;
    return out;
  }
  std::uint32_t mOrd = 0, nOrd = 0, mUn = 0, nUn = 0;
  for (const auto& s : sig.symbols()) {
    if (s.leaf()) continue;
    auto& m = s.ordering == Ordering::ordered ? mOrd : mUn;
    auto& n = s.ordering == Ordering::ordered ? nOrd : nUn;
    if (s.root) m = std::max(m, s.arity);
    if (s.internal) n = std::max(n, s.arity);
  }
  for (std::uint32_t i = 1; i <= mOrd; ++i) out.ordered += w.ordered * ipow(w.ordered, i);
  for (std::uint32_t i = 1; i <= nOrd; ++i) out.ordered += w.ordered * ipow(w.ordered, i);
  for (std::uint32_t i = 1; i <= mUn; ++i) out.unordered += w.unordered * binomial(i + w.unordered - 1, i);
  for (std::uint32_t i = 1; i <= nUn; ++i) out.unordered += w.unordered * binomial(i + w.unordered - 1, i);
  if (config.parentConstraints)
    for (std::uint32_t i = 1; i <= sig.maxParents(); ++i)
      out.parent += w.parent * binomial(i + w.parentCells - 1, i);
  return out;
}

/// Reasons the closed forms do not apply (empty when every arity group and
/// split input is large enough to fill its cells).
inline std::vector<std::string> fullnessViolations(const Signature& sig, const SystemConfig& config) {
  std::vector<std::string> out;
  const auto& w = config.widths;
  if (sig.sequenceMode()) {
    const auto& seq = *sig.options().sequence;
    std::vector<std::size_t> pool(seq.slots, 0);
    for (const auto& s : sig.symbols())
      if (s.slot) ++pool[*s.slot - 1];
    for (std::uint32_t r = 0; r < seq.slots; ++r)
      if (pool[r] < w.sequence) out.push_back("slot " + std::to_string(r + 1) + " pool smaller than width");
    return out;
  }
  const auto omega = sig.internals().size();
  if (sig.options().negationIsolate && sig.negation() != kNoSymbol) out.push_back("negation isolation adds a cell");
  for (auto ordering : {Ordering::ordered, Ordering::unordered}) {
    const std::uint32_t width = ordering == Ordering::ordered ? w.ordered : w.unordered;
    for (bool rootSide : {true, false}) {
      std::map<std::uint32_t, std::size_t> groups;
      std::uint32_t maxArity = 0;
      for (const auto& s : sig.symbols()) {
        if (s.leaf() || s.ordering != ordering || !(rootSide ? s.root : s.internal)) continue;
        ++groups[s.arity];
        maxArity = std::max(maxArity, s.arity);
      }
      for (std::uint32_t k = 1; k <= maxArity; ++k)
        if (groups[k] < width)
          out.push_back(std::string(Signature::orderingName(ordering)) + (rootSide ? " root" : " internal") +
                        " arity " + std::to_string(k) + " group has " + std::to_string(groups[k]) +
                        " symbols, fewer than width " + std::to_string(width));
      if (maxArity > 0 && omega < width) out.push_back("internal symbol set smaller than width");
    }
  }
  if (config.parentConstraints) {
    if (omega < w.parent) out.push_back("internal symbol set smaller than parent child width");
    if (sig.parentCapable().size() < w.parentCells) out.push_back("parent-capable set smaller than parent width");
  }
  return out;
}

/// t independent constraint sets plus the frozen index layout:
/// symbols occupy [0, |S|), set i occupies [offset(i), offset(i) + |C_i|).
class ConstraintSystem {
public:
  ConstraintSystem(std::shared_ptr<const Signature> sig, SystemConfig config)
      : sig_(std::move(sig)), config_(config) {
    if (config_.t == 0) throw SystemError("t must be at least 1");
    if (sig_->sequenceMode()) config_.parentConstraints = false;
    for (const auto& s : sig_->symbols()) {
      if (s.leaf()) continue;
      const auto cap = s.ordering == Ordering::ordered ? config_.maxOrderedArity : config_.maxUnorderedArity;
      if (cap > 0 && s.arity > cap && !s.positionSymbol)
        throw SystemError(s.name() + "/" + std::to_string(s.arity) + " exceeds the arity cap " + std::to_string(cap));
    }
    const RandomStream root(config_.seed);
    sets_.reserve(config_.t);
    for (std::uint32_t i = 0; i < config_.t; ++i) {
      ConstraintSetBuilder b(*sig_, config_.widths, root.split(i));
      if (sig_->sequenceMode()) {
        b.generateSequence();
      } else {
        b.generateOrdered();
        b.generateUnordered();
        if (config_.parentConstraints) b.generateParent();
      }
      sets_.push_back(std::move(b).finish());
    }
    offsets_.push_back(sig_->size());
    for (const auto& s : sets_) offsets_.push_back(offsets_.back() + s.size());
    Digest d;
    d.add(sig_->serialize());
    d.add(config_.t);
    d.add(config_.seed);
    for (auto v : {config_.widths.ordered, config_.widths.unordered, config_.widths.parent,
                   config_.widths.parentCells, config_.widths.sequence})
      d.add(v);
    d.add(config_.parentConstraints);
    for (const auto& s : sets_) s.digest(d);
    digest_ = d.value();
  }

  [[nodiscard]] const Signature& signature() const noexcept { return *sig_; }
  [[nodiscard]] std::shared_ptr<const Signature> signaturePtr() const noexcept { return sig_; }
  [[nodiscard]] const SystemConfig& config() const noexcept { return config_; }
  [[nodiscard]] std::uint32_t t() const noexcept { return config_.t; }
  [[nodiscard]] const ConstraintSet& set(std::size_t i) const { return sets_.at(i); }
  [[nodiscard]] const std::vector<ConstraintSet>& sets() const noexcept { return sets_; }
  [[nodiscard]] bool parentConstraints() const noexcept { return config_.parentConstraints; }

  [[nodiscard]] std::size_t symbolCount() const noexcept { return sig_->size(); }
  [[nodiscard]] std::size_t constraintCount() const noexcept { return offsets_.back() - offsets_.front(); }
  [[nodiscard]] std::size_t vectorLength() const noexcept { return offsets_.back(); }
  /// First vector index of parallel set i.
  [[nodiscard]] std::size_t offset(std::size_t i) const { return offsets_.at(i); }
  [[nodiscard]] std::size_t indexOf(std::size_t set, std::size_t constraint) const {
    return offsets_.at(set) + constraint;
  }
  [[nodiscard]] std::uint64_t digest() const noexcept { return digest_; }

  [[nodiscard]] std::string digestHex() const {
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << digest_;
    return out.str();
  }

  /// Canonical text: configuration, layout, digest and the signature. The
  /// constraint tables are regenerated on load and checked against the
  /// stored digest and layout, so a load never yields a different system.
  [[nodiscard]] std::string serialize() const {
    std::ostringstream out;
    const auto& w = config_.widths;
    out << "satvec-system 1\n";
    out << "generator xoshiro256ss-splitmix64-deal\n";
    out << "t " << config_.t << "\n";
    out << "seed " << config_.seed << "\n";
    out << "widths " << w.ordered << " " << w.unordered << " " << w.parent << " " << w.parentCells << " "
        << w.sequence << "\n";
    out << "parent-constraints " << (config_.parentConstraints ? 1 : 0) << "\n";
    out << "arity-caps " << config_.maxOrderedArity << " " << config_.maxUnorderedArity << "\n";
    out << "symbols " << symbolCount() << "\n";
    out << "constraints";
    for (const auto& s : sets_) out << " " << s.size();
    out << "\n";
    out << "digest " << digestHex() << "\n";
    out << "signature\n" << sig_->serialize() << "end-signature\n";
    return out.str();
  }

  static ConstraintSystem parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line, word;
    auto expect = [&](std::string_view k) -> std::istringstream {
      if (!std::getline(in, line)) throw SystemError("truncated system file, expected " + std::string(k));
      std::istringstream ls(line);
      ls >> word;
      if (word != k) throw SystemError("expected '" + std::string(k) + "', got '" + word + "'");
      return ls;
    };
    {
      auto ls = expect("satvec-system");
      int version = 0;
      ls >> version;
      if (version != 1) throw SystemError("unsupported system file version");
    }
    {
      auto ls = expect("generator");
      ls >> word;
      if (word != "xoshiro256ss-splitmix64-deal") throw SystemError("unknown generator " + word);
    }
    SystemConfig config;
    expect("t") >> config.t;
    expect("seed") >> config.seed;
    {
      auto ls = expect("widths");
      auto& w = config.widths;
      ls >> w.ordered >> w.unordered >> w.parent >> w.parentCells >> w.sequence;
    }
    {
      int pc = 0;
      expect("parent-constraints") >> pc;
      config.parentConstraints = pc != 0;
    }
    {
      auto ls = expect("arity-caps");
      ls >> config.maxOrderedArity >> config.maxUnorderedArity;
    }
    std::size_t symbols = 0;
    expect("symbols") >> symbols;
    std::vector<std::size_t> sizes;
    {
      auto ls = expect("constraints");
      for (std::size_t v; ls >> v;) sizes.push_back(v);
    }
    std::string digest;
    expect("digest") >> digest;
    expect("signature");
    std::string sigText;
    for (;;) {
      if (!std::getline(in, line)) throw SystemError("unterminated signature section");
      if (line == "end-signature") break;
      sigText += line + "\n";
    }
    auto sig = std::make_shared<const Signature>(Signature::parse(sigText));
    ConstraintSystem system(std::move(sig), config);
    if (system.symbolCount() != symbols || sizes.size() != system.t())
      throw SystemError("system layout mismatch");
    for (std::size_t i = 0; i < sizes.size(); ++i)
      if (system.set(i).size() != sizes[i]) throw SystemError("system layout mismatch in set " + std::to_string(i));
    if (system.digestHex() != digest) throw SystemError("system digest mismatch: file " + digest + ", regenerated " + system.digestHex());
    return system;
  }

private:
  std::shared_ptr<const Signature> sig_;
  SystemConfig config_;
  std::vector<ConstraintSet> sets_;
  std::vector<std::size_t> offsets_;
  std::uint64_t digest_ = 0;
};

inline ConstraintSystem buildSystem(Signature sig, SystemConfig config) {
  return ConstraintSystem(std::make_shared<const Signature>(std::move(sig)), config);
}

inline ConstraintSystem buildSystem(std::shared_ptr<const Signature> sig, SystemConfig config) {
  return ConstraintSystem(std::move(sig), config);
}

}  // namespace satvec
