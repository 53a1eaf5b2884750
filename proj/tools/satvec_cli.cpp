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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "satvec/experiments.hpp"
#include "satvec/generate.hpp"

using namespace satvec;

namespace {

// Bad flags, unreadable files and inconsistent inputs; exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void writeFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw ConfigError("cannot write " + path);
}

// Writes to the named file, or to stdout for "" and "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") std::cout << text;
  else writeFile(path, text);
}

ConstraintSystem loadSystem(const std::string& path) {
  try {
    return ConstraintSystem::parse(readFile(path));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

Domain domainFor(const std::string& format, const Signature& sig) {
  if (format.empty() || format == "auto") return inferDomain(sig);
  try {
    return parseDomain(format);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

void loadBindings(PlaceholderBinder& binder, const std::string& path) {
  if (path.empty() || !std::filesystem::exists(path)) return;
  binder.load(readFile(path));
}

std::string familyTable(const ConstraintSystem& sys) {
  std::ostringstream out;
  const auto closed = closedFormCounts(sys.signature(), sys.config());
  const auto notes = fullnessViolations(sys.signature(), sys.config());
  out << "symbols |S| " << sys.symbolCount() << "\n";
  out << "constraints sum |C_i| " << sys.constraintCount() << "  (t " << sys.t() << ")\n";
  out << "vector length " << sys.vectorLength() << "\n";
  out << "digest " << sys.digestHex() << "\n";
  out << "set\tfamily\tgenerated\tclosed-form\n";
  for (std::size_t i = 0; i < sys.t(); ++i) {
    const auto c = sys.set(i).counts();
    const std::pair<const char*, std::pair<std::uint64_t, std::uint64_t>> rows[] = {
        {"ordered", {c.ordered, closed.ordered}},
        {"unordered", {c.unordered, closed.unordered}},
        {"parent", {c.parent, closed.parent}},
        {"sequence", {c.sequence, closed.sequence}}};
    for (const auto& [name, v] : rows) {
      out << i + 1 << "\t" << name << "\t" << v.first << "\t" << v.second;
      if (notes.empty() && v.first != v.second) out << "\tMISMATCH";
      out << "\n";
    }
  }
  for (const auto& n : notes) out << "closed forms do not apply: " << n << "\n";
  return out.str();
}

std::vector<double> parseLambdas(const std::string& spec) {
  if (spec.empty() || spec == "grid") return KnnOptions{}.lambdas;
  std::vector<double> out;
  std::stringstream in(spec);
  for (std::string part; std::getline(in, part, ',');) {
    try {
      std::size_t used = 0;
      const double l = std::stod(part, &used);
      if (used != part.size() || !(l >= 0 && l <= 1)) throw std::invalid_argument(part);
      out.push_back(l);
    } catch (const std::exception&) {
      throw ConfigError("lambda values must be numbers in [0, 1]: " + part);
    }
  }
  if (out.empty()) throw ConfigError("empty lambda list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"satvec: reversible count-vector encodings of rooted DAGs"};
  app.require_subcommand(1);

  // signature
  std::string preset, sigOut;
  std::uint32_t vocab = 19999, length = 150, variables = 8;
  auto* cSig = app.add_subcommand("signature", "write a built-in signature");
  cSig->add_option("--preset", preset, "sentence or clause")->required()->check(CLI::IsMember({"sentence", "clause"}));
  cSig->add_option("--vocab", vocab, "word placeholders; with the end token they form the constants");
  cSig->add_option("--length", length, "sentence positions");
  cSig->add_option("--variables", variables, "clause variable placeholders");
  cSig->add_option("--out", sigOut, "output file (default stdout)");

  // gen
  std::string genSig, genOut;
  SystemConfig genCfg;
  bool noParent = false;
  auto* cGen = app.add_subcommand("gen", "generate and persist a constraint system");
  cGen->add_option("--sig", genSig, "signature file")->required();
  cGen->add_option("--w-ord", genCfg.widths.ordered, "ordered split width")->check(CLI::PositiveNumber);
  cGen->add_option("--w-unord", genCfg.widths.unordered, "unordered split width")->check(CLI::PositiveNumber);
  cGen->add_option("--w-par", genCfg.widths.parent, "parent constraint child width")->check(CLI::PositiveNumber);
  cGen->add_option("--w-pc", genCfg.widths.parentCells, "parent constraint parent width")->check(CLI::PositiveNumber);
  cGen->add_option("--w-seq", genCfg.widths.sequence, "sequence split width")->check(CLI::PositiveNumber);
  cGen->add_option("--t", genCfg.t, "parallel constraint sets")->check(CLI::PositiveNumber);
  cGen->add_option("--seed", genCfg.seed, "generator seed");
  cGen->add_option("--max-ord-arity", genCfg.maxOrderedArity, "ordered arity cap (0 = none)");
  cGen->add_option("--max-unord-arity", genCfg.maxUnorderedArity, "unordered arity cap (0 = none)");
  cGen->add_flag("--no-parent", noParent, "omit parent constraints");
  cGen->add_option("--out", genOut, "system file")->required();

  // stats
  std::string statsSystem;
  auto* cStats = app.add_subcommand("stats", "describe a persisted system");
  cStats->add_option("--system", statsSystem, "system file")->required();

  // encode
  std::string encSystem, encText, encInput, encFormat, encOut, encBindings;
  auto* cEnc = app.add_subcommand("encode", "encode one item to a count vector");
  cEnc->add_option("--system", encSystem, "system file")->required();
  auto* encT = cEnc->add_option("--text", encText, "item text");
  cEnc->add_option("--input", encInput, "file holding the item")->excludes(encT);
  cEnc->add_option("--format", encFormat, "term, sentence, clause or clause-anon (default from signature)");
  cEnc->add_option("--bindings", encBindings, "placeholder binding file, read and updated");
  cEnc->add_option("--out", encOut, "vector file (default stdout)");

  // decode
  std::string decSystem, decVector, decFormat, decBindings, decAudit, decBackend;
  double decBudget = 5.0;
  bool decVerify = false, decUnique = false;
  std::size_t decSolutions = 1;
  auto* cDec = app.add_subcommand("decode", "decode a count vector");
  cDec->add_option("--system", decSystem, "system file")->required();
  cDec->add_option("--vector", decVector, "vector file")->required();
  cDec->add_option("--budget", decBudget, "seconds")->check(CLI::PositiveNumber);
  cDec->add_flag("--verify", decVerify, "re-encode candidates and block mismatches");
  cDec->add_flag("--unique", decUnique, "also search for a second graph with the same vector");
  cDec->add_option("--solutions", decSolutions, "distinct graphs to enumerate")->check(CLI::PositiveNumber);
  cDec->add_option("--format", decFormat, "rendering domain (default from signature)");
  cDec->add_option("--bindings", decBindings, "placeholder binding file");
  cDec->add_option("--audit", decAudit, "write PREFIX.cnf and PREFIX.map");
  cDec->add_option("--backend", decBackend, "external DIMACS solver command");

  // roundtrip
  std::string rtSystem, rtCorpus, rtFormat, rtJson, rtBackend;
  double rtBudget = 0;
  bool rtVerify = false, rtUnique = false, rtQuiet = false;
  std::size_t rtThreads = 1, rtLimit = 0;
  auto* cRt = app.add_subcommand("roundtrip", "encode, decode and compare every corpus item");
  cRt->add_option("--system", rtSystem, "system file")->required();
  cRt->add_option("--corpus", rtCorpus, "one item per line")->required();
  cRt->add_option("--budget", rtBudget, "seconds per decode (default 5, clauses 30)");
  cRt->add_flag("--verify", rtVerify, "verified decoding");
  cRt->add_flag("--unique", rtUnique, "treat vectors shared by two graphs as failures");
  cRt->add_option("--format", rtFormat, "term, sentence, clause or clause-anon (default from signature)");
  cRt->add_option("--threads", rtThreads, "workers (0 = all cores)");
  cRt->add_option("--limit", rtLimit, "only the first N items");
  cRt->add_option("--json", rtJson, "machine-readable summary file");
  cRt->add_option("--backend", rtBackend, "external DIMACS solver command");
  cRt->add_flag("--quiet", rtQuiet, "aggregate lines only");

  // knn
  std::vector<std::string> knnSystems;
  std::string knnCorpus, knnLabels, knnLambda, knnFormat, knnJson;
  KnnOptions knnOpt;
  auto* cKnn = app.add_subcommand("knn", "cross-validated nearest-neighbour categorization");
  cKnn->add_option("--system", knnSystems, "system file, repeat for several t")->required();
  cKnn->add_option("--corpus", knnCorpus, "one item per line")->required();
  cKnn->add_option("--labels", knnLabels, "one label per line")->required();
  cKnn->add_option("--lambda", knnLambda, "comma-separated values or 'grid' (0, 0.1, ..., 1)");
  cKnn->add_option("--folds", knnOpt.folds, "cross-validation folds")->check(CLI::PositiveNumber);
  cKnn->add_option("--seed", knnOpt.seed, "fold shuffle seed");
  cKnn->add_option("--k", knnOpt.k, "neighbours")->check(CLI::PositiveNumber);
  cKnn->add_option("--threads", knnOpt.threads, "workers (0 = all cores)");
  cKnn->add_option("--format", knnFormat, "default clause-anon for clause signatures");
  cKnn->add_option("--json", knnJson, "machine-readable summary file");

  // synth
  std::string synKind, synOut, synLabels, synSig;
  std::size_t synCount = 100;
  std::uint64_t synSeed = 1;
  std::uint32_t synMax = 12;
  auto* cSyn = app.add_subcommand("synth", "write a synthetic corpus");
  cSyn->add_option("--kind", synKind, "sentences, clauses, labeled-clauses or trees")
      ->required()
      ->check(CLI::IsMember({"sentences", "clauses", "labeled-clauses", "trees"}));
  cSyn->add_option("--count", synCount, "items (per class for labeled-clauses)");
  cSyn->add_option("--seed", synSeed, "seed");
  cSyn->add_option("--max", synMax, "tokens per sentence or nodes per tree");
  cSyn->add_option("--sig", synSig, "signature file (trees)");
  cSyn->add_option("--out", synOut, "corpus file (default stdout)");
  cSyn->add_option("--labels", synLabels, "label file (labeled-clauses)");

  // solve
  std::string solveCnf, solveBackend;
  double solveBudget = 0;
  auto* cSolve = app.add_subcommand("solve", "solve a DIMACS CNF file");
  cSolve->add_option("--cnf", solveCnf, "DIMACS file")->required();
  cSolve->add_option("--budget", solveBudget, "seconds (0 = unbounded)");
  cSolve->add_option("--backend", solveBackend, "external DIMACS solver command");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cSig) {
      Signature sig = preset == "sentence" ? sentenceSignature(vocab, length)
                                           : clauseSignature(ClauseSignatureOptions{.variables = variables});
      emit(sigOut, sig.serialize());
    } else if (*cGen) {
      genCfg.parentConstraints = !noParent;
      std::shared_ptr<const Signature> sig;
      try {
        sig = std::make_shared<const Signature>(Signature::parse(readFile(genSig)));
      } catch (const SignatureError& e) {
        throw ConfigError(genSig + ": " + e.what());
      }
      ConstraintSystem sys = [&] {
        try {
          return buildSystem(sig, genCfg);
        } catch (const std::exception& e) {
          throw ConfigError(e.what());
        }
      }();
      writeFile(genOut, sys.serialize());
      std::cout << familyTable(sys);
    } else if (*cStats) {
      std::cout << familyTable(loadSystem(statsSystem));
    } else if (*cEnc) {
      const auto sys = loadSystem(encSystem);
      const Signature& sig = sys.signature();
      const Domain d = domainFor(encFormat, sig);
      if (encText.empty() && encInput.empty()) throw ConfigError("encode needs --text or --input");
      std::string text = encText.empty() ? readFile(encInput) : encText;
      while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
      PlaceholderBinder binder(sig);
      loadBindings(binder, encBindings);
      auto items = loadCorpus({text}, d, sig, binder);
      if (!items[0].graph) throw ConfigError("cannot represent the item: " + items[0].error);
      emit(encOut, encode(*items[0].graph, sys).serialize(sys));
      if (!encBindings.empty()) writeFile(encBindings, binder.serialize());
    } else if (*cDec) {
      const auto sys = loadSystem(decSystem);
      const Signature& sig = sys.signature();
      const Domain d = domainFor(decFormat, sig);
      CountVector v;
      try {
        v = CountVector::parse(readFile(decVector), sys);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(decVector + ": " + e.what());
      }
      PlaceholderBinder binder(sig);
      loadBindings(binder, decBindings);
      DecodeOptions o;
      o.verify = decVerify;
      o.unique = decUnique;
      o.budgetSeconds = decBudget;
      o.maxSolutions = decSolutions;
      o.auditPrefix = decAudit;
      o.backend.command = decBackend;
      const auto r = decode(v, sys, o);
      std::cout << "status " << decodeStatusName(r.status) << (r.verified ? " (verified)" : "") << "\n";
      if (!r.diagnostic.empty()) std::cout << "diagnostic " << r.diagnostic << "\n";
      if (r.status == DecodeStatus::decoded || r.status == DecodeStatus::ambiguous) {
        std::cout << "graph " << canonicalText(r.graph, sig) << "\n";
        std::cout << "item " << renderGraph(r.graph, d, sig, binder) << "\n";
        for (const auto& alt : r.alternatives) std::cout << "alternative " << renderGraph(alt, d, sig, binder) << "\n";
      }
      std::cout << "tuples " << r.stats.tuples << "  variables " << r.stats.variables << "  clauses " << r.stats.clauses
                << "  cycles " << r.stats.cycles << "  solves " << r.stats.solves << "  rejected " << r.stats.rejected
                << "\n";
    } else if (*cRt) {
      const auto sys = loadSystem(rtSystem);
      const Signature& sig = sys.signature();
      const Domain d = domainFor(rtFormat, sig);
      std::istringstream in(readFile(rtCorpus));
      auto lines = corpusLines(in, d);
      if (rtLimit && lines.size() > rtLimit) lines.resize(rtLimit);
      const auto t0 = std::chrono::steady_clock::now();
      PlaceholderBinder binder(sig);
      const auto items = loadCorpus(lines, d, sig, binder);
      RoundtripOptions o;
      o.budgetSeconds = rtBudget > 0 ? rtBudget : (d == Domain::clause || d == Domain::clauseAnonymous ? 30.0 : 5.0);
      o.verify = rtVerify;
      o.unique = rtUnique;
      o.threads = rtThreads;
      o.decode.backend.command = rtBackend;
      const double prepare = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      auto report = roundtrip(items, d, sys, binder, o);
      report.prepareSeconds = prepare;
      const std::string text = report.text();
      if (rtQuiet) std::cout << text.substr(text.find("domain ")); else std::cout << text;
      if (!rtJson.empty()) writeFile(rtJson, report.json().dump(2) + "\n");
    } else if (*cKnn) {
      const auto labelLines = [&] {
        std::istringstream in(readFile(knnLabels));
        return corpusLines(in, Domain::term);
      }();
      knnOpt.lambdas = parseLambdas(knnLambda);
      nlohmann::json summary = nlohmann::json::array();
      std::vector<KnnReport> reports;
      for (const auto& path : knnSystems) {
        const auto sys = loadSystem(path);
        const Signature& sig = sys.signature();
        Domain d = inferDomain(sig) == Domain::clause ? Domain::clauseAnonymous : inferDomain(sig);
        if (!knnFormat.empty()) d = domainFor(knnFormat, sig);
        std::istringstream in(readFile(knnCorpus));
        const auto lines = corpusLines(in, d);
        if (lines.size() != labelLines.size())
          throw ConfigError("corpus has " + std::to_string(lines.size()) + " items but labels has " +
                            std::to_string(labelLines.size()));
        PlaceholderBinder binder(sig);
        const auto items = loadCorpus(lines, d, sig, binder);
        std::vector<RowMatrix> matrices;
        std::vector<std::string> labels;
        std::size_t skipped = 0;
        for (std::size_t i = 0; i < items.size(); ++i) {
          if (!items[i].graph) {
            ++skipped;
            continue;
          }
          try {
            matrices.push_back(toRowMatrix(encode(*items[i].graph, sys), sys));
            labels.push_back(labelLines[i]);
          } catch (const std::exception&) {
            ++skipped;
          }
        }
        if (matrices.empty()) throw ConfigError("no representable items in " + knnCorpus);
        KnnReport r = [&] {
          try {
            return knnCrossValidate(matrices, labels, knnOpt);
          } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
          }
        }();
        std::cout << "system " << path << "  t " << r.t << "  items " << r.items << "  skipped " << skipped
                  << "  folds " << r.folds << "  k " << r.k << "\n"
                  << r.text();
        auto j = r.json();
        j["system"] = path;
        j["skipped"] = skipped;
        summary.push_back(j);
      }
      if (!knnJson.empty()) writeFile(knnJson, summary.dump(2) + "\n");
    } else if (*cSyn) {
      std::ostringstream out, labels;
      RandomStream rng(synSeed);
      if (synKind == "sentences") {
        for (const auto& s : zipfSentences(synCount, 2000, synMax, 1.1, rng)) {
          for (std::size_t i = 0; i < s.size(); ++i) out << (i ? " " : "") << s[i];
          out << "\n";
        }
      } else if (synKind == "clauses") {
        for (std::size_t i = 0; i < synCount; ++i) out << randomClause(rng, RandomClauseOptions{}) << "\n";
      } else if (synKind == "labeled-clauses") {
        for (const auto& x : syntheticClauseCorpus(synCount, 5, rng)) {
          out << x.text << "\n";
          labels << x.label << "\n";
        }
        if (synLabels.empty()) throw ConfigError("labeled-clauses needs --labels");
        writeFile(synLabels, labels.str());
      } else {
        if (synSig.empty()) throw ConfigError("trees need --sig");
        const Signature sig = Signature::parse(readFile(synSig));
        for (std::size_t i = 0; i < synCount; ++i) out << canonicalText(randomTree(sig, rng, synMax), sig) << "\n";
      }
      emit(synOut, out.str());
    } else if (*cSolve) {
      std::ifstream in(solveCnf);
      if (!in) throw ConfigError("cannot read " + solveCnf);
      sat::Cnf cnf;
      try {
        cnf = sat::Cnf::parseDimacs(in);
      } catch (const std::exception& e) {
        throw ConfigError(solveCnf + ": " + e.what());
      }
      auto session = sat::openSession(sat::BackendSpec{solveBackend});
      session->load(cnf);
      const auto r = session->solve(solveBudget > 0 ? sat::Deadline::after(solveBudget) : sat::Deadline{});
      if (r.status == sat::Status::sat) {
        std::cout << "s SATISFIABLE\nv";
        for (int x = 1; x <= cnf.vars; ++x) std::cout << " " << (r.value(x) ? x : -x);
        std::cout << " 0\n";
      } else if (r.status == sat::Status::unsat) {
        std::cout << "s UNSATISFIABLE\n";
      } else {
        std::cout << "s UNKNOWN\n";
        if (!r.diagnostic.empty()) std::cout << "c " << r.diagnostic << "\n";
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SignatureError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
