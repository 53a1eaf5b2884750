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

#include <sys/types.h>
#include <sys/wait.h>
#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace satvec::sat {

/// Wall-clock budget. A default-constructed deadline never expires.
class Deadline {
public:
  using Clock = std::chrono::steady_clock;
  Deadline() = default;
  static Deadline after(double seconds) {
    Deadline d;
    d.end_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds));
    return d;
  }
  [[nodiscard]] bool expired() const { return end_ && Clock::now() >= *end_; }
  [[nodiscard]] bool bounded() const { return end_.has_value(); }
  [[nodiscard]] double remaining() const {
    if (!end_) return 1e300;
    return std::max(0.0, std::chrono::duration<double>(*end_ - Clock::now()).count());
  }

private:
  std::optional<Clock::time_point> end_;
};

/// CNF in DIMACS conventions: variables 1..vars, literal -v is the negation.
struct Cnf {
  int vars = 0;
  std::vector<std::vector<int>> clauses;

  int newVar() { return ++vars; }
  void add(std::vector<int> clause) { clauses.push_back(std::move(clause)); }
  void add(std::initializer_list<int> clause) { clauses.emplace_back(clause); }

  void writeDimacs(std::ostream& out, const std::vector<std::string>& comments = {}) const {
    for (const auto& c : comments) out << "c " << c << "\n";
    out << "p cnf " << vars << " " << clauses.size() << "\n";
    for (const auto& cl : clauses) {
      for (int l : cl) out << l << " ";
      out << "0\n";
    }
  }
  [[nodiscard]] std::string dimacs() const {
    std::ostringstream out;
    writeDimacs(out);
    return out.str();
  }

  static Cnf parseDimacs(std::istream& in) {
    Cnf cnf;
    std::string line;
    bool header = false;
    std::size_t declared = 0;
    std::vector<int> current;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::string first;
      if (!(ls >> first) || first[0] == 'c' || first[0] == '%') continue;
      if (first == "p") {
        std::string fmt;
        if (!(ls >> fmt >> cnf.vars >> declared) || fmt != "cnf" || cnf.vars < 0)
          throw std::invalid_argument("malformed DIMACS problem line");
        header = true;
        continue;
      }
      if (!header) throw std::invalid_argument("DIMACS clause before problem line");
      std::istringstream all(line);
      for (long long x; all >> x;) {
        if (x == 0) {
          cnf.clauses.push_back(std::move(current));
          current.clear();
        } else {
          if (std::llabs(x) > cnf.vars) throw std::invalid_argument("DIMACS literal out of range");
          current.push_back(static_cast<int>(x));
        }
      }
      if (!all.eof()) throw std::invalid_argument("malformed DIMACS clause line: " + line);
    }
    if (!header) throw std::invalid_argument("missing DIMACS problem line");
    if (!current.empty()) cnf.clauses.push_back(std::move(current));
    if (cnf.clauses.size() != declared) throw std::invalid_argument("DIMACS clause count does not match problem line");
    return cnf;
  }
};

enum class Status { sat, unsat, unknown };

inline const char* statusName(Status s) {
  switch (s) {
    case Status::sat: return "SATISFIABLE";
    case Status::unsat: return "UNSATISFIABLE";
    default: return "UNKNOWN";
  }
}

struct Result {
  Status status = Status::unknown;
  std::vector<bool> model;  // index 0 unused
  std::string diagnostic;

  [[nodiscard]] bool value(int var) const { return model.at(static_cast<std::size_t>(var)); }
};

/// Conflict-driven clause learning with two watched literals, VSIDS, phase
/// saving, Luby restarts and activity-based learnt clause deletion.
class Solver {
public:
  int newVar() {
    const int v = static_cast<int>(assigns_.size());
    assigns_.push_back(kUndef);
    level_.push_back(0);
    reason_.push_back(kNoReason);
    activity_.push_back(0.0);
    phase_.push_back(1);
    seen_.push_back(0);
    heapIndex_.push_back(-1);
    watches_.emplace_back();
    watches_.emplace_back();
    heapInsert(v);
    return v + 1;
  }

  void reserveVars(int n) {
    while (static_cast<int>(assigns_.size()) < n) newVar();
  }

  [[nodiscard]] int vars() const noexcept { return static_cast<int>(assigns_.size()); }

  /// Adds a DIMACS clause. Returns false once the formula is known unsat.
  bool addClause(const std::vector<int>& dimacs) {
    if (!ok_) return false;
    cancelUntil(0);
    std::vector<Lit> lits;
    lits.reserve(dimacs.size());
    for (int x : dimacs) {
      if (x == 0) throw std::invalid_argument("literal 0 in clause");
      reserveVars(std::abs(x));
      lits.push_back(fromDimacs(x));
    }
    std::sort(lits.begin(), lits.end());
    std::vector<Lit> kept;
    Lit prev = kNoLit;
    for (Lit l : lits) {
      if (l == prev) continue;
      if (prev != kNoLit && l == (prev ^ 1U)) return true;  // tautology
      if (value(l) == kTrue) return true;
      if (value(l) != kFalse) kept.push_back(l);
      prev = l;
    }
    if (kept.empty()) return ok_ = false;
    if (kept.size() == 1) {
      assign(kept[0], kNoReason);
      if (propagate() != kNoReason) ok_ = false;
      return ok_;
    }
    attach(newClause(std::move(kept), false));
    return true;
  }

  void load(const Cnf& cnf) {
    reserveVars(cnf.vars);
    for (const auto& c : cnf.clauses) addClause(c);
  }

  Result solve(const Deadline& deadline = {}, const std::atomic<bool>* cancel = nullptr) {
    Result r;
    if (!ok_) {
      r.status = Status::unsat;
      return r;
    }
    if (maxLearnts_ == 0) maxLearnts_ = std::max<double>(clauses_.size() / 3.0, 2000.0);
    for (std::uint64_t restart = 0;; ++restart) {
      const auto budget = static_cast<std::uint64_t>(luby(2.0, restart) * 100.0);
      const Status s = search(budget, deadline, cancel);
      if (s == Status::sat) {
        r.status = Status::sat;
        r.model.assign(assigns_.size() + 1, false);
        for (std::size_t v = 0; v < assigns_.size(); ++v) r.model[v + 1] = assigns_[v] == kTrue;
        cancelUntil(0);
        return r;
      }
      if (s == Status::unsat) {
        ok_ = false;
        r.status = Status::unsat;
        return r;
      }
      if (stop_) {
        cancelUntil(0);
        stop_ = false;
        r.status = Status::unknown;
        r.diagnostic = "budget exhausted";
        return r;
      }
      maxLearnts_ *= 1.05;
    }
  }

  [[nodiscard]] std::uint64_t conflicts() const noexcept { return conflicts_; }

private:
  using Lit = std::uint32_t;
  using CRef = std::uint32_t;
  static constexpr Lit kNoLit = 0xFFFFFFFFU;
  static constexpr CRef kNoReason = 0xFFFFFFFFU;
  static constexpr std::int8_t kTrue = 1, kFalse = -1, kUndef = 0;

  struct Clause {
    std::vector<Lit> lits;
    double activity = 0;
    bool learnt = false;
    bool removed = false;
  };
  struct Watcher {
    CRef clause;
    Lit blocker;
  };

  static Lit fromDimacs(int x) { return (static_cast<Lit>(std::abs(x) - 1) << 1) | (x < 0 ? 1U : 0U); }
  static int var(Lit l) { return static_cast<int>(l >> 1); }
  static bool sign(Lit l) { return l & 1U; }

  [[nodiscard]] std::int8_t value(Lit l) const {
    const std::int8_t a = assigns_[static_cast<std::size_t>(var(l))];
    return sign(l) ? static_cast<std::int8_t>(-a) : a;
  }
  [[nodiscard]] int decisionLevel() const { return static_cast<int>(trailLim_.size()); }

  CRef newClause(std::vector<Lit> lits, bool learnt) {
    clauses_.push_back(Clause{std::move(lits), 0.0, learnt, false});
    return static_cast<CRef>(clauses_.size() - 1);
  }

  void attach(CRef c) {
    const auto& l = clauses_[c].lits;
    watches_[l[0] ^ 1U].push_back({c, l[1]});
    watches_[l[1] ^ 1U].push_back({c, l[0]});
    if (clauses_[c].learnt) learnts_.push_back(c);
  }

  void assign(Lit l, CRef reason) {
    const auto v = static_cast<std::size_t>(var(l));
    assigns_[v] = sign(l) ? kFalse : kTrue;
    level_[v] = decisionLevel();
    reason_[v] = reason;
    trail_.push_back(l);
  }

  CRef propagate() {
    CRef conflict = kNoReason;
    while (qhead_ < trail_.size()) {
      const Lit p = trail_[qhead_++];
      auto& ws = watches_[p];
      const Lit falseLit = p ^ 1U;
      std::size_t i = 0, j = 0;
      while (i < ws.size()) {
        const Watcher w = ws[i];
        if (value(w.blocker) == kTrue) {
          ws[j++] = ws[i++];
          continue;
        }
        Clause& c = clauses_[w.clause];
        if (c.removed) {
          ++i;
          continue;
        }
        auto& lits = c.lits;
        if (lits[0] == falseLit) std::swap(lits[0], lits[1]);
        ++i;
        const Lit first = lits[0];
        if (first != w.blocker && value(first) == kTrue) {
          ws[j++] = {w.clause, first};
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < lits.size(); ++k) {
          if (value(lits[k]) != kFalse) {
            std::swap(lits[1], lits[k]);
            watches_[lits[1] ^ 1U].push_back({w.clause, first});
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = {w.clause, first};
        if (value(first) == kFalse) {
          conflict = w.clause;
          qhead_ = trail_.size();
          while (i < ws.size()) ws[j++] = ws[i++];
        } else {
          assign(first, w.clause);
        }
      }
      ws.resize(j);
      if (conflict != kNoReason) break;
    }
    return conflict;
  }

  void analyze(CRef conflict, std::vector<Lit>& learnt, int& backLevel) {
    learnt.assign(1, kNoLit);
    int pathCount = 0;
    Lit p = kNoLit;
    std::size_t index = trail_.size();
    do {
      Clause& c = clauses_[conflict];
      if (c.learnt) bumpClause(c);
      for (std::size_t k = (p == kNoLit ? 0 : 1); k < c.lits.size(); ++k) {
        const Lit q = c.lits[k];
        const auto v = static_cast<std::size_t>(var(q));
        if (!seen_[v] && level_[v] > 0) {
          bumpVar(var(q));
          seen_[v] = 1;
          if (level_[v] >= decisionLevel())
            ++pathCount;
          else
            learnt.push_back(q);
        }
      }
      while (!seen_[static_cast<std::size_t>(var(trail_[--index]))]) {
      }
      p = trail_[index];
      conflict = reason_[static_cast<std::size_t>(var(p))];
      seen_[static_cast<std::size_t>(var(p))] = 0;
      --pathCount;
    } while (pathCount > 0);
    learnt[0] = p ^ 1U;

    // Local minimisation: drop literals implied by other learnt literals.
    toClear_ = learnt;
    std::size_t j = 1;
    for (std::size_t i = 1; i < learnt.size(); ++i) {
      const CRef r = reason_[static_cast<std::size_t>(var(learnt[i]))];
      bool redundant = r != kNoReason;
      if (redundant) {
        for (Lit q : clauses_[r].lits) {
          const auto v = static_cast<std::size_t>(var(q));
          if (var(q) != var(learnt[i]) && !seen_[v] && level_[v] > 0) {
            redundant = false;
            break;
          }
        }
      }
      if (!redundant) learnt[j++] = learnt[i];
    }
    learnt.resize(j);
    for (Lit l : toClear_) seen_[static_cast<std::size_t>(var(l))] = 0;

    backLevel = 0;
    if (learnt.size() > 1) {
      std::size_t maxI = 1;
      for (std::size_t i = 2; i < learnt.size(); ++i)
        if (level_[static_cast<std::size_t>(var(learnt[i]))] > level_[static_cast<std::size_t>(var(learnt[maxI]))])
          maxI = i;
      std::swap(learnt[1], learnt[maxI]);
      backLevel = level_[static_cast<std::size_t>(var(learnt[1]))];
    }
  }

  void cancelUntil(int level) {
    if (decisionLevel() <= level) return;
    for (std::size_t c = trail_.size(); c-- > trailLim_[static_cast<std::size_t>(level)];) {
      const int v = var(trail_[c]);
      assigns_[static_cast<std::size_t>(v)] = kUndef;
      phase_[static_cast<std::size_t>(v)] = sign(trail_[c]) ? 0 : 1;
      if (heapIndex_[static_cast<std::size_t>(v)] < 0) heapInsert(v);
    }
    trail_.resize(trailLim_[static_cast<std::size_t>(level)]);
    trailLim_.resize(static_cast<std::size_t>(level));
    qhead_ = trail_.size();
  }

  Status search(std::uint64_t conflictBudget, const Deadline& deadline, const std::atomic<bool>* cancel) {
    std::uint64_t localConflicts = 0;
    std::vector<Lit> learnt;
    for (std::uint64_t tick = 0;; ++tick) {
      if ((tick & 255U) == 0 && (deadline.expired() || (cancel && cancel->load(std::memory_order_relaxed)))) {
        stop_ = true;
        return Status::unknown;
      }
      const CRef conflict = propagate();
      if (conflict != kNoReason) {
        ++conflicts_;
        ++localConflicts;
        if (decisionLevel() == 0) return Status::unsat;
        int backLevel = 0;
        analyze(conflict, learnt, backLevel);
        cancelUntil(backLevel);
        if (learnt.size() == 1) {
          assign(learnt[0], kNoReason);
        } else {
          const CRef c = newClause(learnt, true);
          attach(c);
          bumpClause(clauses_[c]);
          assign(learnt[0], c);
        }
        varInc_ /= 0.95;
        clauseInc_ /= 0.999;
        continue;
      }
      if (localConflicts >= conflictBudget) {
        cancelUntil(0);
        return Status::unknown;
      }
      if (static_cast<double>(learnts_.size()) - static_cast<double>(trail_.size()) >= maxLearnts_) reduceLearnts();
      Lit next = kNoLit;
      while (next == kNoLit) {
        if (heap_.empty()) return Status::sat;
        const int v = heapPop();
        if (assigns_[static_cast<std::size_t>(v)] == kUndef)
          next = (static_cast<Lit>(v) << 1) | (phase_[static_cast<std::size_t>(v)] ? 0U : 1U);
      }
      trailLim_.push_back(trail_.size());
      assign(next, kNoReason);
    }
  }

  void reduceLearnts() {
    std::vector<CRef> sorted;
    for (CRef c : learnts_)
      if (!clauses_[c].removed) sorted.push_back(c);
    std::sort(sorted.begin(), sorted.end(), [&](CRef a, CRef b) {
      const auto& x = clauses_[a];
      const auto& y = clauses_[b];
      if ((x.lits.size() > 2) != (y.lits.size() > 2)) return x.lits.size() > 2;
      return x.activity < y.activity;
    });
    learnts_.clear();
    const double extra = clauseInc_ / static_cast<double>(std::max<std::size_t>(sorted.size(), 1));
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      Clause& c = clauses_[sorted[i]];
      const bool locked = reason_[static_cast<std::size_t>(var(c.lits[0]))] == sorted[i] && value(c.lits[0]) == kTrue;
      if (c.lits.size() > 2 && !locked && (i < sorted.size() / 2 || c.activity < extra)) {
        c.removed = true;
        c.lits.clear();
        c.lits.shrink_to_fit();
      } else {
        learnts_.push_back(sorted[i]);
      }
    }
    // Purge watchers of removed clauses so propagate never touches empty clauses.
    for (auto& ws : watches_)
      ws.erase(std::remove_if(ws.begin(), ws.end(), [&](const Watcher& w) { return clauses_[w.clause].removed; }),
               ws.end());
  }

  void bumpVar(int v) {
    auto& a = activity_[static_cast<std::size_t>(v)];
    if ((a += varInc_) > 1e100) {
      for (auto& x : activity_) x *= 1e-100;
      varInc_ *= 1e-100;
    }
    if (heapIndex_[static_cast<std::size_t>(v)] >= 0) heapUp(heapIndex_[static_cast<std::size_t>(v)]);
  }

  void bumpClause(Clause& c) {
    if ((c.activity += clauseInc_) > 1e20) {
      for (CRef r : learnts_) clauses_[r].activity *= 1e-20;
      clauseInc_ *= 1e-20;
    }
  }

  static double luby(double y, std::uint64_t x) {
    std::uint64_t size = 1, seq = 0;
    while (size < x + 1) {
      ++seq;
      size = 2 * size + 1;
    }
    while (size - 1 != x) {
      size = (size - 1) >> 1;
      --seq;
      x = x % size;
    }
    return std::pow(y, static_cast<double>(seq));
  }

  // Max-heap over variable activity.
  bool heapLess(int a, int b) const {
    return activity_[static_cast<std::size_t>(a)] > activity_[static_cast<std::size_t>(b)];
  }
  void heapInsert(int v) {
    heapIndex_[static_cast<std::size_t>(v)] = static_cast<int>(heap_.size());
    heap_.push_back(v);
    heapUp(static_cast<int>(heap_.size()) - 1);
  }
  void heapUp(int i) {
    const int v = heap_[static_cast<std::size_t>(i)];
    while (i > 0) {
      const int parent = (i - 1) / 2;
      if (!heapLess(v, heap_[static_cast<std::size_t>(parent)])) break;
      heap_[static_cast<std::size_t>(i)] = heap_[static_cast<std::size_t>(parent)];
      heapIndex_[static_cast<std::size_t>(heap_[static_cast<std::size_t>(i)])] = i;
      i = parent;
    }
    heap_[static_cast<std::size_t>(i)] = v;
    heapIndex_[static_cast<std::size_t>(v)] = i;
  }
  int heapPop() {
    const int top = heap_.front();
    heapIndex_[static_cast<std::size_t>(top)] = -1;
    const int last = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
      int i = 0;
      const int n = static_cast<int>(heap_.size());
      for (;;) {
        int child = 2 * i + 1;
        if (child >= n) break;
        if (child + 1 < n && heapLess(heap_[static_cast<std::size_t>(child + 1)], heap_[static_cast<std::size_t>(child)]))
          ++child;
        if (!heapLess(heap_[static_cast<std::size_t>(child)], last)) break;
        heap_[static_cast<std::size_t>(i)] = heap_[static_cast<std::size_t>(child)];
        heapIndex_[static_cast<std::size_t>(heap_[static_cast<std::size_t>(i)])] = i;
        i = child;
      }
      heap_[static_cast<std::size_t>(i)] = last;
      heapIndex_[static_cast<std::size_t>(last)] = i;
    }
    return top;
  }

  std::vector<Clause> clauses_;
  std::vector<CRef> learnts_;
  std::vector<std::vector<Watcher>> watches_;
  std::vector<std::int8_t> assigns_;
  std::vector<int> level_;
  std::vector<CRef> reason_;
  std::vector<double> activity_;
  std::vector<std::uint8_t> phase_;
  std::vector<std::uint8_t> seen_;
  std::vector<int> heapIndex_;
  std::vector<int> heap_;
  std::vector<Lit> trail_;
  std::vector<std::size_t> trailLim_;
  std::vector<Lit> toClear_;
  std::size_t qhead_ = 0;
  double varInc_ = 1.0;
  double clauseInc_ = 1.0;
  double maxLearnts_ = 0;
  std::uint64_t conflicts_ = 0;
  bool ok_ = true;
  bool stop_ = false;
};

class BackendError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// One formula instance under solution. Clauses may be added between solves.
class Session {
public:
  virtual ~Session() = default;
  virtual void load(const Cnf& cnf) = 0;
  virtual void addClause(const std::vector<int>& clause) = 0;
  virtual Result solve(const Deadline& deadline, const std::atomic<bool>* cancel = nullptr) = 0;
};

class InternalSession final : public Session {
public:
  void load(const Cnf& cnf) override { solver_.load(cnf); }
  void addClause(const std::vector<int>& clause) override { solver_.addClause(clause); }
  Result solve(const Deadline& deadline, const std::atomic<bool>* cancel = nullptr) override {
    return solver_.solve(deadline, cancel);
  }

private:
  Solver solver_;
};

/// Parses competition-format solver output ("s ..." and "v ..." lines).
inline Result parseSolverOutput(std::istream& in, int vars) {
  Result r;
  bool sawStatus = false;
  r.model.assign(static_cast<std::size_t>(vars) + 1, false);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("s ", 0) == 0) {
      sawStatus = true;
      if (line.find("UNSATISFIABLE") != std::string::npos)
        r.status = Status::unsat;
      else if (line.find("SATISFIABLE") != std::string::npos)
        r.status = Status::sat;
      else
        r.status = Status::unknown;
    } else if (line.rfind("v ", 0) == 0) {
      std::istringstream vs(line.substr(2));
      for (long long x; vs >> x;)
        if (x > 0 && x <= vars) r.model[static_cast<std::size_t>(x)] = true;
    }
  }
  if (!sawStatus) throw BackendError("solver output has no status line");
  if (r.status != Status::sat) r.model.clear();
  return r;
}

inline void writeSolverOutput(std::ostream& out, const Result& r) {
  out << "s " << statusName(r.status) << "\n";
  if (r.status != Status::sat) return;
  out << "v";
  for (std::size_t v = 1; v < r.model.size(); ++v) out << " " << (r.model[v] ? "" : "-") << v;
  out << " 0\n";
}

/// Writes the CNF to a temporary file and runs `command <file>` as a child
/// process, killing it when the deadline passes or cancellation is requested.
class ProcessSession final : public Session {
public:
  explicit ProcessSession(std::string command) : command_(std::move(command)) {}

  void load(const Cnf& cnf) override {
    cnf_.vars = std::max(cnf_.vars, cnf.vars);
    cnf_.clauses.insert(cnf_.clauses.end(), cnf.clauses.begin(), cnf.clauses.end());
  }
  void addClause(const std::vector<int>& clause) override {
    for (int l : clause) cnf_.vars = std::max(cnf_.vars, std::abs(l));
    cnf_.clauses.push_back(clause);
  }

  Result solve(const Deadline& deadline, const std::atomic<bool>* cancel = nullptr) override {
    namespace fs = std::filesystem;
    static std::atomic<std::uint64_t> counter{0};
    const fs::path dir = fs::temp_directory_path();
    const std::string stem = "satvec-" + std::to_string(::getpid()) + "-" + std::to_string(counter++);
    const fs::path input = dir / (stem + ".cnf"), output = dir / (stem + ".out");
    {
      std::ofstream f(input);
      cnf_.writeDimacs(f);
    }
    const std::string cmd =
        "exec >'" + output.string() + "' 2>/dev/null; " + command_ + " '" + input.string() + "'";
    const pid_t pid = ::fork();
    if (pid < 0) throw BackendError("fork failed");
    if (pid == 0) {
      ::setpgid(0, 0);
      ::execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    int status = 0;
    bool killed = false;
    for (;;) {
      const pid_t done = ::waitpid(pid, &status, WNOHANG);
      if (done == pid) break;
      if (deadline.expired() || (cancel && cancel->load())) {
        ::kill(-pid, SIGKILL);
        ::kill(pid, SIGKILL);
        ::waitpid(pid, &status, 0);
        killed = true;
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    Result r;
    if (killed) {
      r.diagnostic = "budget exhausted";
    } else if (WIFEXITED(status) && WEXITSTATUS(status) == 127) {
      fs::remove(input);
      fs::remove(output);
      throw BackendError("solver command not available: " + command_);
    } else {
      std::ifstream out(output);
      try {
        r = parseSolverOutput(out, cnf_.vars);
      } catch (...) {
        fs::remove(input);
        fs::remove(output);
        throw;
      }
    }
    fs::remove(input);
    fs::remove(output);
    return r;
  }

private:
  std::string command_;
  Cnf cnf_;
};

/// Empty command selects the built-in solver.
struct BackendSpec {
  std::string command;
};

inline std::unique_ptr<Session> openSession(const BackendSpec& spec) {
  if (spec.command.empty()) return std::make_unique<InternalSession>();
  return std::make_unique<ProcessSession>(spec.command);
}

}  // namespace satvec::sat
