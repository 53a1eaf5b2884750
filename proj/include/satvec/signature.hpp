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
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace satvec {

using SymbolId = std::uint32_t;
inline constexpr SymbolId kNoSymbol = std::numeric_limits<SymbolId>::max();

enum class SymbolKind { root, internal };
enum class Ordering { ordered, unordered };

class SignatureError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// One entry of the effective symbol universe.
///
/// A base symbol is identified by (label, arity); it may be a root, an
/// internal symbol, or both. Masked variants share the base's label, arity and
/// ordering and differ only in (depth, argPosition); they are always internal.
struct SymbolInfo {
  std::string label;
  std::uint32_t arity = 0;
  Ordering ordering = Ordering::ordered;
  bool root = false;
  bool internal = false;
  SymbolId base = kNoSymbol;
  std::optional<std::uint32_t> depth;
  std::optional<std::uint32_t> argPosition;
  std::optional<std::uint32_t> slot;  // sequence entry index for constants
  std::string pool;                   // placeholder pool prefix, empty otherwise
  bool positionSymbol = false;        // f_j of a sequence signature
  bool eos = false;

  [[nodiscard]] bool leaf() const noexcept { return arity == 0; }
  [[nodiscard]] bool masked() const noexcept { return depth.has_value() || argPosition.has_value(); }

  /// Display name: label plus "@d<depth>" and "@<position>" suffixes.
  [[nodiscard]] std::string name() const {
    std::string out = label;
    if (depth) out += "@d" + std::to_string(*depth);
    if (argPosition) out += "@" + std::to_string(*argPosition);
    return out;
  }
};

struct SymbolDecl {
  std::string label;
  std::uint32_t arity = 0;
  Ordering ordering = Ordering::ordered;
  std::optional<std::uint32_t> slot;
};

/// A pool of placeholder symbols `prefix1 ... prefixN` to which concrete
/// labels are bound on first encounter.
struct PoolDecl {
  bool root = false;
  bool internal = true;
  std::string prefix;
  std::uint32_t arity = 0;
  std::uint32_t count = 0;
  Ordering ordering = Ordering::ordered;
  std::optional<std::uint32_t> slot;
};

/// Sequence signatures: root f1, internals f2..fL, each of arity slots+1.
/// The last argument of f_j is f_{j+1} or the end-of-sequence constant.
struct SequenceDecl {
  std::string prefix = "f";
  std::uint32_t length = 1;
  std::uint32_t slots = 1;
  std::string eos = "EOS";
};

struct SignatureOptions {
  std::uint32_t maxParents = 1;
  std::uint32_t maxDepth = 0;  // 0 disables depth masks
  bool argNumberMask = false;
  std::string negation;        // label of the negation symbol (arity 1), if any
  bool negationBypass = false;
  bool negationIsolate = false;
  std::optional<SequenceDecl> sequence;
  std::vector<PoolDecl> pools;
};

/// Declared symbol universe. Immutable after construction.
class Signature {
public:
  Signature() = default;

  Signature(std::vector<SymbolDecl> roots, std::vector<SymbolDecl> internals, SignatureOptions options)
      : rootDecls_(std::move(roots)), internalDecls_(std::move(internals)), options_(std::move(options)) {
    build();
  }

  [[nodiscard]] const SignatureOptions& options() const noexcept { return options_; }
  [[nodiscard]] const std::vector<SymbolDecl>& rootDecls() const noexcept { return rootDecls_; }
  [[nodiscard]] const std::vector<SymbolDecl>& internalDecls() const noexcept { return internalDecls_; }

  [[nodiscard]] std::size_t size() const noexcept { return symbols_.size(); }
  [[nodiscard]] std::size_t baseSize() const noexcept { return baseCount_; }
  [[nodiscard]] const SymbolInfo& operator[](SymbolId id) const { return symbols_.at(id); }
  [[nodiscard]] const std::vector<SymbolInfo>& symbols() const noexcept { return symbols_; }

  [[nodiscard]] bool sequenceMode() const noexcept { return options_.sequence.has_value(); }
  [[nodiscard]] std::uint32_t maxParents() const noexcept { return options_.maxParents; }
  [[nodiscard]] bool masksEnabled() const noexcept { return options_.maxDepth > 0 || options_.argNumberMask; }
  [[nodiscard]] std::uint32_t maxArgPosition() const noexcept { return maxArgPosition_; }
  [[nodiscard]] SymbolId negation() const noexcept { return negation_; }
  [[nodiscard]] SymbolId eos() const noexcept { return eos_; }

  /// Base symbol by label and arity.
  [[nodiscard]] std::optional<SymbolId> find(std::string_view label, std::uint32_t arity) const {
    auto it = byKey_.find(key(label, arity));
    if (it == byKey_.end()) return std::nullopt;
    return it->second;
  }

  [[nodiscard]] SymbolId require(std::string_view label, std::uint32_t arity) const {
    if (auto id = find(label, arity)) return *id;
    throw SignatureError("unknown symbol " + std::string(label) + "/" + std::to_string(arity));
  }

  /// Masked variant of `base`; nullopt when the signature does not declare it.
  [[nodiscard]] std::optional<SymbolId> masked(SymbolId base, std::optional<std::uint32_t> depth,
                                               std::optional<std::uint32_t> argPosition) const {
    if (!depth && !argPosition) return base;
    auto it = maskIndex_.find({base, encodeOpt(depth), encodeOpt(argPosition)});
    if (it == maskIndex_.end()) return std::nullopt;
    return it->second;
  }

  /// Position symbol f_j (1-based) of a sequence signature.
  [[nodiscard]] SymbolId position(std::uint32_t j) const {
    if (!sequenceMode() || j == 0 || j > options_.sequence->length)
      throw SignatureError("sequence position out of range: " + std::to_string(j));
    return firstPosition_ + (j - 1);
  }

  /// 1-based position index of a position symbol, 0 otherwise.
  [[nodiscard]] std::uint32_t positionIndex(SymbolId id) const noexcept {
    if (!sequenceMode() || id < firstPosition_ || id >= firstPosition_ + options_.sequence->length) return 0;
    return id - firstPosition_ + 1;
  }

  /// Symbols that can occur below a parent (Omega), including mask variants.
  [[nodiscard]] std::vector<SymbolId> internals() const { return collect([](const SymbolInfo& s) { return s.internal; }); }
  [[nodiscard]] std::vector<SymbolId> roots() const { return collect([](const SymbolInfo& s) { return s.root; }); }
  /// Symbols that can be parents (non-leaf), including mask variants.
  [[nodiscard]] std::vector<SymbolId> parentCapable() const { return collect([](const SymbolInfo& s) { return !s.leaf(); }); }

  /// Number of symbols added by mask expansion.
  [[nodiscard]] std::size_t maskExpansionCount() const noexcept { return symbols_.size() - baseCount_; }

  [[nodiscard]] const std::vector<PoolDecl>& pools() const noexcept { return options_.pools; }

  friend bool operator==(const Signature& a, const Signature& b) { return a.serialize() == b.serialize(); }

  /// Canonical text form; `parse(serialize())` reproduces the signature and
  /// serializing again yields identical bytes.
  [[nodiscard]] std::string serialize() const {
    std::ostringstream out;
    out << "satvec-signature 1\n";
    out << "max-parents " << options_.maxParents << "\n";
    if (options_.maxDepth > 0) out << "mask depth " << options_.maxDepth << "\n";
    if (options_.argNumberMask) out << "mask argnumber\n";
    if (!options_.negation.empty()) {
      out << "negation " << options_.negation;
      if (options_.negationBypass) out << " bypass";
      if (options_.negationIsolate) out << " isolate";
      out << "\n";
    }
    if (options_.sequence) {
      const auto& s = *options_.sequence;
      out << "sequence " << s.prefix << " " << s.length << " " << s.slots << " " << s.eos << "\n";
    }
    for (const auto& p : options_.pools) {
      out << "pool " << (p.root && p.internal ? "both" : p.root ? "root" : "internal") << " " << p.prefix << "/"
          << p.arity << " " << p.count;
      if (p.arity > 0) out << " " << orderingName(p.ordering);
      if (p.slot) out << " slot " << *p.slot;
      out << "\n";
    }
    auto emit = [&](std::string_view kind, const SymbolDecl& d) {
      out << kind << " " << d.label << "/" << d.arity;
      if (d.arity > 0) out << " " << orderingName(d.ordering);
      if (d.slot) out << " slot " << *d.slot;
      out << "\n";
    };
    for (const auto& d : rootDecls_) emit("root", d);
    for (const auto& d : internalDecls_) emit("internal", d);
    return out.str();
  }

  static Signature parse(std::string_view text) {
    std::vector<SymbolDecl> roots, internals;
    SignatureOptions options;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineNo = 0;
    bool sawHeader = false;
    while (std::getline(in, line)) {
      ++lineNo;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream words(line);
      std::vector<std::string> tok;
      for (std::string w; words >> w;) tok.push_back(w);
      if (tok.empty()) continue;
      auto fail = [&](const std::string& msg) -> SignatureError {
        return SignatureError("signature line " + std::to_string(lineNo) + ": " + msg);
      };
      const std::string& head = tok[0];
      if (head == "satvec-signature") {
        if (tok.size() != 2 || tok[1] != "1") throw fail("unsupported signature version");
        sawHeader = true;
      } else if (head == "max-parents") {
        if (tok.size() != 2) throw fail("expected max-parents N");
        options.maxParents = parseUnsigned(tok[1], fail);
      } else if (head == "mask") {
        if (tok.size() == 3 && tok[1] == "depth") {
          options.maxDepth = parseUnsigned(tok[2], fail);
        } else if (tok.size() == 2 && tok[1] == "argnumber") {
          options.argNumberMask = true;
        } else {
          throw fail("expected 'mask depth N' or 'mask argnumber'");
        }
      } else if (head == "negation") {
        if (tok.size() < 2) throw fail("expected negation LABEL");
        options.negation = tok[1];
        for (std::size_t i = 2; i < tok.size(); ++i) {
          if (tok[i] == "bypass") options.negationBypass = true;
          else if (tok[i] == "isolate") options.negationIsolate = true;
          else throw fail("unknown negation option " + tok[i]);
        }
      } else if (head == "sequence") {
        if (tok.size() != 5) throw fail("expected sequence PREFIX LENGTH SLOTS EOS");
        options.sequence = SequenceDecl{tok[1], parseUnsigned(tok[2], fail), parseUnsigned(tok[3], fail), tok[4]};
      } else if (head == "pool") {
        if (tok.size() < 4) throw fail("expected pool KIND PREFIX/ARITY COUNT");
        PoolDecl p;
        if (tok[1] == "root") { p.root = true; p.internal = false; }
        else if (tok[1] == "internal") { p.root = false; p.internal = true; }
        else if (tok[1] == "both") { p.root = true; p.internal = true; }
        else throw fail("unknown pool kind " + tok[1]);
        auto [label, arity] = splitLabel(tok[2], fail);
        p.prefix = label;
        p.arity = arity;
        p.count = parseUnsigned(tok[3], fail);
        parseTail(tok, 4, p.ordering, p.slot, fail);
        options.pools.push_back(std::move(p));
      } else if (head == "root" || head == "internal") {
        if (tok.size() < 2) throw fail("expected " + head + " LABEL/ARITY");
        SymbolDecl d;
        auto [label, arity] = splitLabel(tok[1], fail);
        d.label = label;
        d.arity = arity;
        parseTail(tok, 2, d.ordering, d.slot, fail);
        (head == "root" ? roots : internals).push_back(std::move(d));
      } else {
        throw fail("unknown directive " + head);
      }
    }
    if (!sawHeader) throw SignatureError("missing 'satvec-signature 1' header");
    return Signature(std::move(roots), std::move(internals), std::move(options));
  }

  static std::string_view orderingName(Ordering o) noexcept { return o == Ordering::ordered ? "ordered" : "unordered"; }

private:
  template <typename Pred>
  std::vector<SymbolId> collect(Pred pred) const {
    std::vector<SymbolId> out;
    for (SymbolId i = 0; i < symbols_.size(); ++i)
      if (pred(symbols_[i])) out.push_back(i);
    return out;
  }

  static std::string key(std::string_view label, std::uint32_t arity) {
    return std::string(label) + "/" + std::to_string(arity);
  }
  static std::uint32_t encodeOpt(std::optional<std::uint32_t> v) noexcept { return v ? *v + 1 : 0; }

  template <typename Fail>
  static std::uint32_t parseUnsigned(const std::string& s, Fail& fail) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
      throw fail("expected a non-negative integer, got '" + s + "'");
    unsigned long long v = std::stoull(s);
    if (v > std::numeric_limits<std::uint32_t>::max()) throw fail("integer out of range: " + s);
    return static_cast<std::uint32_t>(v);
  }

  template <typename Fail>
  static std::pair<std::string, std::uint32_t> splitLabel(const std::string& s, Fail& fail) {
    auto slash = s.rfind('/');
    if (slash == std::string::npos || slash == 0) throw fail("expected LABEL/ARITY, got '" + s + "'");
    return {s.substr(0, slash), parseUnsigned(s.substr(slash + 1), fail)};
  }

  template <typename Fail>
  static void parseTail(const std::vector<std::string>& tok, std::size_t i, Ordering& ordering,
                        std::optional<std::uint32_t>& slot, Fail& fail) {
    for (; i < tok.size(); ++i) {
      if (tok[i] == "ordered") ordering = Ordering::ordered;
      else if (tok[i] == "unordered") ordering = Ordering::unordered;
      else if (tok[i] == "slot" && i + 1 < tok.size()) slot = parseUnsigned(tok[++i], fail);
      else throw fail("unexpected token '" + tok[i] + "'");
    }
  }

  SymbolId addBase(const std::string& label, std::uint32_t arity, Ordering ordering, bool root,
                   std::optional<std::uint32_t> slot, const std::string& pool) {
    if (label.empty()) throw SignatureError("empty symbol label");
    if (arity == 0 && ordering == Ordering::unordered)
      throw SignatureError("zero-arity symbol " + label + " cannot be unordered");
    auto k = key(label, arity);
    if (auto it = byKey_.find(k); it != byKey_.end()) {
      SymbolInfo& s = symbols_[it->second];
      bool& flag = root ? s.root : s.internal;
      if (flag) throw SignatureError("duplicate declaration of " + std::string(root ? "root " : "internal ") + k);
      if (s.ordering != ordering) throw SignatureError("conflicting ordering for " + k);
      if (s.slot != slot) throw SignatureError("conflicting slot for " + k);
      flag = true;
      return it->second;
    }
    SymbolInfo s;
    s.label = label;
    s.arity = arity;
    s.ordering = ordering;
    s.root = root;
    s.internal = !root;
    s.slot = slot;
    s.pool = pool;
    s.base = static_cast<SymbolId>(symbols_.size());
    byKey_.emplace(k, s.base);
    symbols_.push_back(std::move(s));
    return symbols_.back().base;
  }

  void build() {
    if (options_.maxParents < 1) throw SignatureError("maxParents must be at least 1");
    for (const auto& d : rootDecls_) addBase(d.label, d.arity, d.ordering, true, d.slot, {});
    for (const auto& d : internalDecls_) addBase(d.label, d.arity, d.ordering, false, d.slot, {});
    for (const auto& p : options_.pools) {
      if (p.prefix.empty()) throw SignatureError("empty pool prefix");
      for (std::uint32_t i = 1; i <= p.count; ++i) {
        const std::string label = p.prefix + std::to_string(i);
        if (p.root) addBase(label, p.arity, p.ordering, true, p.slot, p.prefix);
        if (p.internal) addBase(label, p.arity, p.ordering, false, p.slot, p.prefix);
      }
    }
    if (options_.sequence) {
      const auto& seq = *options_.sequence;
      if (seq.length < 1 || seq.slots < 1) throw SignatureError("sequence length and slots must be positive");
      if (masksEnabled()) throw SignatureError("masks are not supported for sequence signatures");
      firstPosition_ = static_cast<SymbolId>(symbols_.size());
      for (std::uint32_t j = 1; j <= seq.length; ++j) {
        SymbolId id = addBase(seq.prefix + std::to_string(j), seq.slots + 1, Ordering::ordered, j == 1, {}, {});
        if (id != firstPosition_ + j - 1) throw SignatureError("sequence position symbols clash with declarations");
        symbols_[id].positionSymbol = true;
      }
      eos_ = addBase(seq.eos, 0, Ordering::ordered, true, {}, {});
      addBase(seq.eos, 0, Ordering::ordered, false, {}, {});
      symbols_[eos_].eos = true;
      for (const auto& s : symbols_) {
        if (s.leaf() && !s.eos && (!s.slot || *s.slot < 1 || *s.slot > seq.slots))
          throw SignatureError("sequence constant " + s.label + " needs a slot in 1.." + std::to_string(seq.slots));
        if (!s.leaf() && !s.positionSymbol) throw SignatureError("sequence signatures only allow constants");
      }
    }
    if (!options_.negation.empty()) {
      auto neg = find(options_.negation, 1);
      if (!neg) throw SignatureError("negation symbol " + options_.negation + "/1 is not declared");
      negation_ = *neg;
    }
    baseCount_ = symbols_.size();
    for (const auto& s : symbols_)
      if (!s.leaf()) maxArgPosition_ = std::max(maxArgPosition_, s.arity);
    if (!masksEnabled()) return;
    std::vector<std::optional<std::uint32_t>> depths{std::nullopt}, positions{std::nullopt};
    if (options_.maxDepth > 0) {
      depths.clear();
      for (std::uint32_t d = 1; d <= options_.maxDepth; ++d) depths.emplace_back(d);
    }
    if (options_.argNumberMask) {
      positions.clear();
      for (std::uint32_t p = 1; p <= maxArgPosition_; ++p) positions.emplace_back(p);
    }
    for (SymbolId b = 0; b < baseCount_; ++b) {
      const SymbolInfo base = symbols_[b];
      if (base.leaf() || !base.internal) continue;
      const bool bypass = b == negation_ && options_.negationBypass;
      const std::vector<std::optional<std::uint32_t>> none{std::nullopt};
      for (auto d : depths) {
        for (auto p : bypass ? none : positions) {
          if (!d && !p) continue;
          SymbolInfo m = base;
          m.root = false;
          m.internal = true;
          m.base = b;
          m.depth = d;
          m.argPosition = p;
          maskIndex_.emplace(std::tuple{b, encodeOpt(d), encodeOpt(p)}, static_cast<SymbolId>(symbols_.size()));
          symbols_.push_back(std::move(m));
        }
      }
    }
  }

  std::vector<SymbolDecl> rootDecls_;
  std::vector<SymbolDecl> internalDecls_;
  SignatureOptions options_;
  std::vector<SymbolInfo> symbols_;
  std::map<std::string, SymbolId, std::less<>> byKey_;
  std::map<std::tuple<SymbolId, std::uint32_t, std::uint32_t>, SymbolId> maskIndex_;
  std::size_t baseCount_ = 0;
  std::uint32_t maxArgPosition_ = 0;
  SymbolId negation_ = kNoSymbol;
  SymbolId eos_ = kNoSymbol;
  SymbolId firstPosition_ = 0;
};

inline Signature declareSignature(std::vector<SymbolDecl> roots, std::vector<SymbolDecl> internals,
                                  SignatureOptions options = {}) {
  return Signature(std::move(roots), std::move(internals), std::move(options));
}

/// First-come-first-served binding of concrete labels to placeholder symbols.
///
/// Not thread-safe; bind in a dedicated phase before concurrent encoding.
class PlaceholderBinder {
public:
  PlaceholderBinder() = default;
  explicit PlaceholderBinder(const Signature& sig) : sig_(&sig) {}

  /// Declared symbols resolve to themselves; anything else takes the next
  /// free placeholder of a pool with matching arity (the named pool when
  /// `pool` is non-empty).
  SymbolId bind(std::string_view label, std::uint32_t arity, std::string_view pool = {}) {
    if (auto id = sig_->find(label, arity); id && (*sig_)[*id].pool.empty()) return *id;
    const std::string k = std::string(label) + "/" + std::to_string(arity);
    if (auto it = bound_.find(k); it != bound_.end()) return it->second.second;
    const auto& pools = sig_->pools();
    for (std::size_t i = 0; i < pools.size(); ++i) {
      const auto& p = pools[i];
      if (p.arity != arity || (!pool.empty() && p.prefix != pool)) continue;
      auto& used = next_[p.prefix + "/" + std::to_string(arity)];
      if (used >= p.count) continue;
      ++used;
      SymbolId id = sig_->require(p.prefix + std::to_string(used), arity);
      bound_.emplace(k, std::pair{p.prefix, id});
      order_.push_back(k);
      return id;
    }
    throw SignatureError("no free placeholder for " + k + (pool.empty() ? "" : " in pool " + std::string(pool)));
  }

  [[nodiscard]] std::optional<SymbolId> lookup(std::string_view label, std::uint32_t arity) const {
    if (auto id = sig_->find(label, arity); id && (*sig_)[*id].pool.empty()) return *id;
    auto it = bound_.find(std::string(label) + "/" + std::to_string(arity));
    if (it == bound_.end()) return std::nullopt;
    return it->second.second;
  }

  /// Concrete label bound to a placeholder, or the placeholder's own label.
  [[nodiscard]] std::string concrete(SymbolId id) const {
    const auto& s = (*sig_)[(*sig_)[id].base];
    if (s.pool.empty()) return s.label;
    for (const auto& [k, v] : bound_)
      if (v.second == (*sig_)[id].base || v.second == id) return k.substr(0, k.rfind('/'));
    return s.label;
  }

  [[nodiscard]] std::size_t size() const noexcept { return bound_.size(); }

  /// Lines `bind LABEL/ARITY POOL PLACEHOLDER` in binding order.
  [[nodiscard]] std::string serialize() const {
    std::ostringstream out;
    for (const auto& k : order_) {
      const auto& [pool, id] = bound_.at(k);
      out << "bind " << k << " " << pool << " " << (*sig_)[id].label << "\n";
    }
    return out.str();
  }

  void load(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string word, k, pool, placeholder;
    while (in >> word) {
      if (word != "bind" || !(in >> k >> pool >> placeholder)) throw SignatureError("malformed binding line");
      auto slash = k.rfind('/');
      if (slash == std::string::npos) throw SignatureError("malformed binding label " + k);
      const auto arity = static_cast<std::uint32_t>(std::stoul(k.substr(slash + 1)));
      SymbolId id = sig_->require(placeholder, arity);
      bound_[k] = {pool, id};
      order_.push_back(k);
      const auto index = static_cast<std::uint32_t>(std::stoul(placeholder.substr(pool.size())));
      auto& used = next_[pool + "/" + std::to_string(arity)];
      used = std::max(used, index);
    }
  }

private:
  const Signature* sig_ = nullptr;
  std::map<std::string, std::pair<std::string, SymbolId>, std::less<>> bound_;
  std::map<std::string, std::uint32_t, std::less<>> next_;
  std::vector<std::string> order_;
};

}  // namespace satvec
