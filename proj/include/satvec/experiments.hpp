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
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "satvec/decoder.hpp"
#include "satvec/formats.hpp"
#include "satvec/similarity.hpp"

namespace satvec {

/// Runs fn(0) ... fn(n-1) on up to `threads` workers (0 = hardware
/// concurrency). The first exception thrown by any call is rethrown.
template <class Fn>
void parallelFor(std::size_t n, std::size_t threads, Fn fn) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex errorLock;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(errorLock);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ------------------------------------------------------------------ corpora

/// How corpus lines become graphs. clauseAnonymous replaces every variable
/// by one unshared `var` token; clause renames them var1..varN.
enum class Domain { term, sentence, clause, clauseAnonymous };

inline const char* domainName(Domain d) {
  switch (d) {
    case Domain::term: return "term";
    case Domain::sentence: return "sentence";
    case Domain::clause: return "clause";
    default: return "clause-anon";
  }
}

inline Domain parseDomain(std::string_view name) {
  for (Domain d : {Domain::term, Domain::sentence, Domain::clause, Domain::clauseAnonymous})
    if (name == domainName(d)) return d;
  throw std::invalid_argument("unknown corpus format " + std::string(name));
}

/// Sentence signatures read sentences, signatures with the `~` negation and
/// a "p" pool read clauses, anything else reads terms.
inline Domain inferDomain(const Signature& sig) {
  if (sig.sequenceMode()) return Domain::sentence;
  const bool predicates = std::any_of(sig.pools().begin(), sig.pools().end(), [](const PoolDecl& p) { return p.prefix == "p"; });
  if (sig.options().negation == "~" && predicates) return Domain::clause;
  return Domain::term;
}

/// Number of numbered variable placeholders var1..varN in a clause signature.
inline std::size_t clauseVariables(const Signature& sig) {
  std::size_t n = 0;
  while (sig.find("var" + std::to_string(n + 1), 0)) ++n;
  return n;
}

/// Non-blank lines; for clause corpora lines starting with '%' are comments.
inline std::vector<std::string> corpusLines(std::istream& in, Domain d) {
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if ((d == Domain::clause || d == Domain::clauseAnonymous) && line[first] == '%') continue;
    out.push_back(line);
  }
  return out;
}

struct CorpusItem {
  std::string text;
  std::optional<Graph> graph;  // empty when the item cannot be represented
  std::string error;
};

/// Converts corpus lines into graphs. Placeholder binding happens here, in
/// corpus order, so it is finished before any concurrent work starts. Items
/// that do not parse, exceed the caps or do not validate keep their error.
inline std::vector<CorpusItem> loadCorpus(const std::vector<std::string>& lines, Domain d, const Signature& sig,
                                          PlaceholderBinder& binder) {
  std::vector<CorpusItem> out;
  const std::size_t variables = clauseVariables(sig);
  for (const auto& line : lines) {
    CorpusItem item{line, std::nullopt, {}};
    try {
      Graph g;
      switch (d) {
        case Domain::term: g = parseTerm(line, sig); break;
        case Domain::sentence: {
          const auto length = sig.options().sequence ? sig.options().sequence->length : 0;
          g = sentenceGraph(sentenceToTree(tokenize(line), length), sig, binder);
          break;
        }
        case Domain::clause: g = clauseGraph(normalizeVariables(parseClause(line), variables), sig, binder); break;
        case Domain::clauseAnonymous: g = clauseGraph(anonymizeVariables(parseClause(line)), sig, binder); break;
      }
      if (auto v = validate(g, sig); !v.empty()) throw std::runtime_error(v.front().message);
      item.graph = std::move(g);
    } catch (const std::exception& e) {
      item.error = e.what();
    }
    out.push_back(std::move(item));
  }
  return out;
}

/// Domain rendering of a decoded graph, falling back to canonical text.
inline std::string renderGraph(const Graph& g, Domain d, const Signature& sig, const PlaceholderBinder& binder) {
  try {
    switch (d) {
      case Domain::sentence: {
        std::string out;
        for (const auto& w : graphSentence(g, sig, binder).tokens) out += (out.empty() ? "" : " ") + w;
        return out;
      }
      case Domain::clause:
      case Domain::clauseAnonymous: return renderClause(graphClause(g, sig, binder));
      default: break;
    }
  } catch (const std::exception&) {
  }
  return canonicalText(g, sig);
}

// ------------------------------------------------------------------ round trip

enum class Outcome { correct, incorrect, timeout, unrepresentable };

inline const char* outcomeName(Outcome o) {
  switch (o) {
    case Outcome::correct: return "correct";
    case Outcome::incorrect: return "incorrect";
    case Outcome::timeout: return "timeout";
    default: return "unrepresentable";
  }
}

struct ItemResult {
  std::size_t index = 0;
  Outcome outcome = Outcome::unrepresentable;
  std::string status;  // decoder status, or empty when never decoded
  std::string input, decoded, note;
  double encodeSeconds = 0, decodeSeconds = 0, compareSeconds = 0;
};

/// Percentage to one decimal place; 0 of 0 is 0.0.
inline std::string percent(std::size_t part, std::size_t whole) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", whole ? 100.0 * static_cast<double>(part) / static_cast<double>(whole) : 0.0);
  return buf;
}

struct ExperimentReport {
  std::string domain;
  std::size_t t = 0;
  std::string system;  // digest
  double budgetSeconds = 0;
  bool verify = false, unique = false;
  double prepareSeconds = 0, wallSeconds = 0;
  std::vector<ItemResult> items;

  [[nodiscard]] std::size_t count(Outcome o) const {
    return static_cast<std::size_t>(std::count_if(items.begin(), items.end(), [&](const ItemResult& r) { return r.outcome == o; }));
  }
  [[nodiscard]] std::string rate(Outcome o) const { return percent(count(o), items.size()); }

  [[nodiscard]] double phase(double ItemResult::*field) const {
    double s = 0;
    for (const auto& r : items) s += r.*field;
    return s;
  }

  [[nodiscard]] nlohmann::json json(bool perItem = true) const {
    nlohmann::json j;
    j["domain"] = domain;
    j["t"] = t;
    j["system"] = system;
    j["budget_seconds"] = budgetSeconds;
    j["verify"] = verify;
    j["unique"] = unique;
    j["items"] = items.size();
    std::map<std::string, std::size_t> statuses;
    for (const auto& r : items)
      if (!r.status.empty()) ++statuses[r.status];
    j["statuses"] = statuses;
    for (Outcome o : {Outcome::correct, Outcome::incorrect, Outcome::timeout, Outcome::unrepresentable}) {
      j["counts"][outcomeName(o)] = count(o);
      j["rates"][outcomeName(o)] = rate(o);
    }
    j["phases"] = {{"prepare", prepareSeconds},
                   {"encode", phase(&ItemResult::encodeSeconds)},
                   {"decode", phase(&ItemResult::decodeSeconds)},
                   {"compare", phase(&ItemResult::compareSeconds)},
                   {"wall", wallSeconds}};
    if (perItem) {
      j["results"] = nlohmann::json::array();
      for (const auto& r : items)
        j["results"].push_back({{"index", r.index},
                                {"outcome", outcomeName(r.outcome)},
                                {"status", r.status},
                                {"input", r.input},
                                {"decoded", r.decoded},
                                {"note", r.note},
                                {"decode_seconds", r.decodeSeconds}});
    }
    return j;
  }

  /// One line per item, then the aggregate table.
  [[nodiscard]] std::string text() const {
    std::ostringstream out;
    char secs[32];
    for (const auto& r : items) {
      std::snprintf(secs, sizeof secs, "%.3f", r.decodeSeconds);
      out << r.index << "\t" << outcomeName(r.outcome) << "\t" << (r.status.empty() ? "-" : r.status) << "\t" << secs
          << "s\t" << r.input;
      if (r.outcome == Outcome::incorrect) out << "\t=> " << r.decoded;
      if (!r.note.empty()) out << "\t# " << r.note;
      out << "\n";
    }
    out << "domain " << domain << "  t " << t << "  budget " << budgetSeconds << "s  verify "
        << (verify ? "on" : "off") << (unique ? "  unique on" : "") << "  items " << items.size() << "\n";
    for (Outcome o : {Outcome::correct, Outcome::incorrect, Outcome::timeout, Outcome::unrepresentable})
      out << outcomeName(o) << "\t" << count(o) << "\t" << rate(o) << "%\n";
    std::snprintf(secs, sizeof secs, "%.2f", wallSeconds);
    out << "wall " << secs << "s\n";
    return out.str();
  }
};

struct RoundtripOptions {
  double budgetSeconds = 5.0;
  bool verify = false;
  bool unique = false;
  std::size_t threads = 1;
  DecodeOptions decode;  // budget, verify and unique are overridden
};

/// encode, decode and compare every representable item. Decoder failures of
/// any kind count as timeouts and keep their status; a decoded graph counts
/// as correct when its canonical text equals the input's.
inline ExperimentReport roundtrip(const std::vector<CorpusItem>& corpus, Domain d, const ConstraintSystem& system,
                                  const PlaceholderBinder& binder, const RoundtripOptions& options) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const Signature& sig = system.signature();
  ExperimentReport report;
  report.domain = domainName(d);
  report.t = system.t();
  report.system = system.digestHex();
  report.budgetSeconds = options.budgetSeconds;
  report.verify = options.verify;
  report.unique = options.unique;
  report.items.resize(corpus.size());
  DecodeOptions dopt = options.decode;
  dopt.budgetSeconds = options.budgetSeconds;
  dopt.verify = options.verify;
  dopt.unique = options.unique;

  auto since = [](Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); };
  parallelFor(corpus.size(), options.threads, [&](std::size_t i) {
    const CorpusItem& item = corpus[i];
    ItemResult& r = report.items[i];
    r.index = i;
    r.input = item.text;
    if (!item.graph) {
      r.outcome = Outcome::unrepresentable;
      r.note = item.error;
      return;
    }
    auto t0 = Clock::now();
    CountVector v;
    try {
      v = encode(*item.graph, system);
    } catch (const std::exception& e) {
      r.outcome = Outcome::unrepresentable;
      r.note = e.what();
      return;
    }
    r.encodeSeconds = since(t0);
    t0 = Clock::now();
    DecodeResult res;
    try {
      res = decode(v, system, dopt);
    } catch (const DecodeError& e) {
      r.decodeSeconds = since(t0);
      r.outcome = Outcome::timeout;
      r.status = "error";
      r.note = e.what();
      return;
    }
    r.decodeSeconds = since(t0);
    r.status = decodeStatusName(res.status);
    if (!res.ok()) {
      r.outcome = Outcome::timeout;
      r.note = res.diagnostic;
      return;
    }
    t0 = Clock::now();
    const bool same = canonicalText(res.graph, sig) == canonicalText(*item.graph, sig);
    r.outcome = same ? Outcome::correct : Outcome::incorrect;
    if (!same) r.decoded = renderGraph(res.graph, d, sig, binder);
    r.compareSeconds = since(t0);
  });
  report.wallSeconds = since(start);
  return report;
}

// ------------------------------------------------------------------ k-NN

struct KnnOptions {
  std::vector<double> lambdas{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::size_t folds = 5;  // 1 tests on the training set itself
  std::uint64_t seed = 1;
  std::size_t k = 1;
  std::size_t threads = 1;
};

struct KnnReport {
  std::size_t items = 0, folds = 0, k = 1, t = 0;
  std::vector<double> lambdas;
  std::vector<double> accuracy;                  // mean over folds, per lambda
  std::vector<std::vector<double>> foldAccuracy;  // [fold][lambda]

  friend bool operator==(const KnnReport&, const KnnReport&) = default;

  [[nodiscard]] std::size_t best() const {
    return static_cast<std::size_t>(std::max_element(accuracy.begin(), accuracy.end()) - accuracy.begin());
  }

  [[nodiscard]] nlohmann::json json() const {
    nlohmann::json j;
    j["items"] = items;
    j["folds"] = folds;
    j["k"] = k;
    j["t"] = t;
    j["curve"] = nlohmann::json::array();
    for (std::size_t l = 0; l < lambdas.size(); ++l)
      j["curve"].push_back({{"lambda", lambdas[l]}, {"accuracy", accuracy[l]}, {"percent", percent(static_cast<std::size_t>(std::lround(accuracy[l] * 1000)), 1000)}});
    if (!lambdas.empty()) j["best_lambda"] = lambdas[best()];
    return j;
  }

  [[nodiscard]] std::string text() const {
    std::ostringstream out;
    out << "lambda\taccuracy\n";
    char buf[64];
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
      std::snprintf(buf, sizeof buf, "%.2f\t%.1f%%\n", lambdas[l], 100.0 * accuracy[l]);
      out << buf;
    }
    return out.str();
  }
};

namespace detail {

// Non-zero entries in index order. Sums follow the dense order, so cosines
// equal the dense ones bit for bit.
struct SparseRow {
  std::vector<std::uint32_t> index;
  std::vector<double> value;
  double norm2 = 0;
};

inline SparseRow sparse(const std::vector<double>& row) {
  SparseRow out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    out.norm2 += row[i] * row[i];
    if (row[i] != 0) {
      out.index.push_back(static_cast<std::uint32_t>(i));
      out.value.push_back(row[i]);
    }
  }
  return out;
}

inline double sparseCosine(const SparseRow& a, const SparseRow& b) {
  if (a.norm2 == 0 && b.norm2 == 0) return 1.0;
  if (a.norm2 == 0 || b.norm2 == 0) return 0.0;
  double ab = 0;
  for (std::size_t i = 0, j = 0; i < a.index.size() && j < b.index.size();) {
    if (a.index[i] < b.index[j]) ++i;
    else if (a.index[i] > b.index[j]) ++j;
    else ab += a.value[i++] * b.value[j++];
  }
  return ab / (std::sqrt(a.norm2) * std::sqrt(b.norm2));
}

}  // namespace detail

/// Cross-validated k-NN accuracy over a lambda grid. Items are shuffled by
/// `seed` and dealt round-robin into folds; each fold is classified against
/// the others in corpus order. With one fold the training set is the whole
/// corpus, queries included.
inline KnnReport knnCrossValidate(const std::vector<RowMatrix>& items, const std::vector<std::string>& labels,
                                  const KnnOptions& options) {
  if (items.size() != labels.size())
    throw std::invalid_argument("corpus has " + std::to_string(items.size()) + " items but " +
                                std::to_string(labels.size()) + " labels");
  if (items.empty()) throw std::invalid_argument("empty corpus");
  if (options.folds == 0 || options.folds > items.size()) throw std::invalid_argument("folds must lie in 1..items");
  for (double l : options.lambdas)
    if (!(l >= 0.0 && l <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
  const std::size_t n = items.size();

  std::vector<std::vector<detail::SparseRow>> rows(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& r : items[i].rows) rows[i].push_back(detail::sparse(r));
  for (const auto& r : rows)
    if (r.size() != rows[0].size()) throw std::invalid_argument("matrices have different row counts");

  // Structural and bag-of-words similarity of every pair.
  std::vector<double> structural(n * n), words(n * n);
  parallelFor(n, options.threads, [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 1.0;
      for (std::size_t k = 0; k < rows[i].size(); ++k) s = std::min(s, detail::sparseCosine(rows[i][k], rows[j][k]));
      const double b = detail::sparseCosine(rows[i][0], rows[j][0]);
      structural[i * n + j] = structural[j * n + i] = s;
      words[i * n + j] = words[j * n + i] = b;
    }
  });

  std::vector<std::size_t> order(n), fold(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  RandomStream rng = RandomStream(options.seed).split("folds");
  rng.shuffle(std::span<std::size_t>(order));
  for (std::size_t p = 0; p < n; ++p) fold[order[p]] = p % options.folds;

  KnnReport report;
  report.items = n;
  report.folds = options.folds;
  report.k = options.k;
  report.t = rows[0].size() - 1;
  report.lambdas = options.lambdas;
  report.foldAccuracy.assign(options.folds, std::vector<double>(options.lambdas.size(), 0.0));
  for (std::size_t f = 0; f < options.folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n; ++i) {
      const bool held = fold[i] == f;
      if (held) test.push_back(i);
      if (!held || options.folds == 1) train.push_back(i);
    }
    for (std::size_t l = 0; l < options.lambdas.size(); ++l) {
      std::size_t hits = 0;
      for (std::size_t q : test) {
        std::vector<std::pair<double, std::size_t>> scored;
        scored.reserve(train.size());
        for (std::size_t k = 0; k < train.size(); ++k)
          scored.push_back({blend(structural[q * n + train[k]], words[q * n + train[k]], options.lambdas[l]), k});
        const auto label = knnVote(std::move(scored), options.k, [&](std::size_t k) -> const std::string& { return labels[train[k]]; });
        if (label == labels[q]) ++hits;
      }
      report.foldAccuracy[f][l] = static_cast<double>(hits) / static_cast<double>(test.size());
    }
  }
  report.accuracy.assign(options.lambdas.size(), 0.0);
  for (const auto& row : report.foldAccuracy)
    for (std::size_t l = 0; l < row.size(); ++l) report.accuracy[l] += row[l] / static_cast<double>(options.folds);
  return report;
}

// ------------------------------------------------------------------ synthetic corpus

struct LabeledText {
  std::string text;
  std::string label;
};

/// A labelled clause corpus of `classes` classes. All classes draw from one
/// shared vocabulary (predicates q0..q11, functions g0..g7, constants k0..k7,
/// arity of q<i> and g<i> is 1 + i % 3) with a bias towards a few
/// class-preferred names, and each class has its own clause shape: number of
/// literals, nesting depth, negation and equality rates, variable density.
/// Classes sharing words but not shapes are what structure can tell apart.
inline std::vector<LabeledText> syntheticClauseCorpus(std::size_t perClass, std::size_t classes, RandomStream rng,
                                                      double bias = 0.3) {
  struct Shape {
    std::uint32_t minLiterals, maxLiterals, depth;
    double negation, equality, variables, nesting;
  };
  static const Shape shapes[] = {
      {1, 1, 3, 0.1, 0.0, 0.2, 0.9},  // deep unit clauses
      {3, 5, 1, 0.8, 0.0, 0.7, 0.1},  // flat, mostly negative
      {2, 3, 2, 0.5, 0.7, 0.4, 0.5},  // equational
      {2, 2, 2, 0.5, 0.1, 0.5, 0.6},  // two nested literals
      {1, 4, 2, 0.4, 0.2, 0.4, 0.4},  // mixed
  };
  constexpr std::uint32_t predicates = 12, functions = 8, constants = 8;
  auto arity = [](std::uint64_t i) { return 1 + i % 3; };
  std::vector<LabeledText> out;
  for (std::size_t c = 0; c < classes; ++c) {
    RandomStream r = rng.split(c);
    const Shape& s = shapes[c % std::size(shapes)];
    const std::uint64_t prefP[2] = {(3 * c) % predicates, (3 * c + 5) % predicates};
    const std::uint64_t prefF = (2 * c + 1) % functions;
    auto pick = [&](std::uint64_t n, const std::uint64_t* pref, std::size_t npref) {
      return r.uniform() < bias ? pref[r.below(npref)] : r.below(n);
    };
    auto term = [&](auto&& self, std::uint32_t depth) -> std::string {
      if (r.uniform() < s.variables) return "X" + std::to_string(r.below(3));
      if (depth >= s.depth || r.uniform() >= s.nesting) return "k" + std::to_string(r.below(constants));
      const auto f = pick(functions, &prefF, 1);
      std::string t = "g" + std::to_string(f) + "(";
      for (std::uint64_t k = 0; k < arity(f); ++k) t += (k ? "," : "") + self(self, depth + 1);
      return t + ")";
    };
    for (std::size_t i = 0; i < perClass; ++i) {
      const auto literals = s.minLiterals + r.below(s.maxLiterals - s.minLiterals + 1);
      std::string text;
      for (std::uint64_t l = 0; l < literals; ++l) {
        if (l) text += " | ";
        const bool negated = r.uniform() < s.negation;
        if (r.uniform() < s.equality) {
          text += term(term, 1) + (negated ? " != " : " = ") + term(term, 1);
          continue;
        }
        const auto p = pick(predicates, prefP, 2);
        text += (negated ? "~q" : "q") + std::to_string(p) + "(";
        for (std::uint64_t k = 0; k < arity(p); ++k) text += (k ? "," : "") + term(term, 1);
        text += ")";
      }
      out.push_back({text, "class" + std::to_string(c)});
    }
  }
  return out;
}

}  // namespace satvec
