//
// Copyright 2026 The fairaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Acceptance checks. Prints one PASS/FAIL/SKIP line per criterion and exits
// non-zero if any check fails.

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fairaudit/audit.h"
#include "fairaudit/error.h"
#include "fairaudit/metrics.h"
#include "fairaudit/mock_backend.h"
#include "fairaudit/parser.h"
#include "fairaudit/report.h"
#include "fairaudit/taxonomy.h"
#include "metric_oracles.h"
#include "refusal_corpus.h"

namespace fairaudit {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  enum Kind { kPass, kFail, kSkip } kind = kFail;
  std::string detail;
};

Outcome Pass(std::string d) { return {Outcome::kPass, std::move(d)}; }
Outcome Fail(std::string d) { return {Outcome::kFail, std::move(d)}; }

std::string Num(double v, int digits = 4) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(digits);
  out << v;
  return out.str();
}

fs::path ScratchDir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() /
                     ("fairaudit_acceptance_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string ReadAll(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TaskKind Task(const char* name) { return FindBuiltinSpec(name)->task; }

// Offline mock run scored in-process: synthetic samples x every variant.
RunMetrics MockRun(const TaskKind& task, const MockBiasProfile& profile, size_t n) {
  const Taxonomy tax = BuildTaxonomy();
  std::vector<ScoredPrediction> preds;
  for (const Sample& s : SyntheticSamples(task, n, 17)) {
    for (const EnrichedSample& e : Enrich(s, tax, InjectionMode::kPromptInstruction)) {
      const auto parsed = ParseResponse(MockComplete(e, task, profile).text, task);
      std::optional<Annotation> pred;
      if (parsed.ok()) pred = parsed.ToAnnotation();
      preds.push_back({e.sample_id, e.variant.factor, e.variant.label, e.gold, pred});
    }
  }
  return ComputeRunMetrics(preds, task, tax, {});
}

Outcome EnrichmentCardinality() {
  const Taxonomy tax = BuildTaxonomy();
  const std::vector<std::pair<std::string, size_t>> want = {
      {"gender", 2},      {"race", 5}, {"religion", 5},    {"nationality", 15},
      {"sexuality", 5},   {"age", 4},  {"combination", 24}};
  for (const char* text : {"I cannot sleep.", "short", "a much longer post with\nnewlines"}) {
    const auto enriched = Enrich({"x", text, Annotation::Single(0)}, tax,
                                 InjectionMode::kPromptInstruction);
    if (enriched.size() != 60) return Fail("got " + std::to_string(enriched.size()));
    for (const auto& [factor, n] : want) {
      size_t count = 0;
      for (const auto& e : enriched) count += e.variant.factor == factor ? 1 : 0;
      if (count != n) {
        return Fail(factor + " has " + std::to_string(count) + " variants");
      }
    }
  }
  return Pass("60 variants, 2/5/5/15/5/4/24");
}

Outcome MetricOracles() {
  std::mt19937_64 rng(20240601);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int k = 2 + static_cast<int>(rng() % 3);  // 2..4 classes
    std::vector<Label> labels;
    for (int c = 0; c < k; ++c) labels.push_back({"c" + std::to_string(c), ""});
    const TaskKind task(k == 2 ? TaskType::kBinary : TaskType::kMulticlass, labels);

    const testing::Pairs pairs = testing::RandomPairs(rng, k, 20, true);
    std::vector<PredictionPair> pp;
    for (const auto& [g, p] : pairs) {
      pp.push_back({Annotation::Single(g), Annotation::Single(p)});
    }
    worst = std::max(worst, std::fabs(WeightedF1(pp, task) -
                                      testing::OracleWeightedF1(pairs, k)));

    const int n_groups = 1 + static_cast<int>(rng() % 5);
    const int target = static_cast<int>(rng() % static_cast<uint64_t>(k));
    std::vector<testing::Pairs> groups;
    std::vector<GroupRates> rates;
    for (int g = 0; g < n_groups; ++g) {
      groups.push_back(testing::RandomPairs(rng, k, 20, false));
      std::vector<LabeledPair> lp;
      for (const auto& [a, b] : groups.back()) lp.push_back({a, b});
      rates.push_back(GroupRates::FromCounts("f", std::to_string(g), "l",
                                             Confusion(lp, target)));
    }
    for (bool use_max : {false, true}) {
      const auto got = EoForFactor(rates, use_max ? EoCombine::kMax : EoCombine::kMean);
      const auto want = testing::OracleEo(groups, target, use_max);
      if (got.has_value() != want.has_value()) {
        return Fail("definedness differs on instance " + std::to_string(t));
      }
      if (got) worst = std::max(worst, std::fabs(*got - *want));
    }
  }
  if (worst > 1e-12) return Fail("max deviation " + std::to_string(worst));
  return Pass("1000 instances, max deviation " + std::to_string(worst));
}

Outcome NullBias() {
  const RunMetrics m = MockRun(Task("Dreaddit"), MockBiasProfile{}, 200);
  double worst = 0.0;
  for (const auto& f : m.factors) {
    if (!f.eo) return Fail(f.factor + " EO undefined");
    worst = std::max(worst, *f.eo);
  }
  if (worst > 0.03) return Fail("max factor EO " + Num(worst));
  return Pass("200 samples x 60 variants, max factor EO " + Num(worst));
}

Outcome PlantedBias() {
  MockBiasProfile profile;
  profile.group_deltas["female"] = {0.0, 0.30};
  const RunMetrics m = MockRun(Task("Dreaddit"), profile, 500);
  double gender = -1.0;
  double others = 0.0;
  for (const auto& f : m.factors) {
    if (!f.eo) return Fail(f.factor + " EO undefined");
    if (f.factor == "gender") {
      gender = *f.eo;
    } else {
      others = std::max(others, *f.eo);
    }
  }
  const std::string d = "gender EO " + Num(gender) + ", other factors max " + Num(others);
  if (std::fabs(gender - 0.15) > 0.05 || others > 0.03) return Fail(d);
  return Pass(d);
}

Outcome ParserRoundTrip() {
  const Taxonomy tax = BuildTaxonomy();
  MockBiasProfile profile;
  profile.base_tpr = 0.6;
  profile.base_fpr = 0.3;
  size_t checked = 0;
  for (const char* name : {"Dreaddit", "CAMS", "IRF"}) {
    const TaskKind task = Task(name);
    for (const Sample& s : SyntheticSamples(task, 20, 3)) {
      for (const EnrichedSample& e : Enrich(s, tax, InjectionMode::kPromptInstruction)) {
        const Annotation planted = MockPlantedLabel(e, task, profile);
        const auto parsed = ParseResponse(MockComplete(e, task, profile).text, task);
        if (!parsed.ok()) return Fail(std::string(name) + ": " + parsed.reason);
        if (!(parsed.ToAnnotation() == planted)) {
          return Fail(std::string(name) + ": wrong label for " + e.sample_id);
        }
        ++checked;
      }
    }
  }
  size_t refusals = 0;
  for (const char* name : {"Dreaddit", "CAMS", "IRF"}) {
    const TaskKind task = Task(name);
    for (std::string_view text : testing::kRefusals) {
      const auto parsed = ParseResponse(text, task);
      if (parsed.ok() || parsed.reason.empty()) {
        return Fail(std::string(name) + " accepted refusal: " + std::string(text));
      }
      ++refusals;
    }
  }
  return Pass(std::to_string(checked) + " mock answers recovered, " +
              std::to_string(std::size(testing::kRefusals)) + " refusal fixtures x 3 tasks (" +
              std::to_string(refusals) + ") rejected");
}

Outcome TwoGroupStd() {
  double worst = 0.0;
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const std::vector<double> v = {i * 0.05, j * 0.05};
      worst = std::max(worst, std::fabs(std::fabs(v[0] - v[1]) - 2.0 * PopulationStdDev(v)));
    }
  }
  if (worst > 1e-12) return Fail("max deviation " + std::to_string(worst));
  return Pass("441 grid pairs, max deviation " + std::to_string(worst));
}

Outcome MitigationArithmetic() {
  const auto c = MakeMitigation("D", "m", "CoT", {{"Ref", 70.0, 38.2}, {"FC", 69.0, 31.6}});
  const std::string table = RenderMitigation(c, TableFormat::kDelimited);
  std::istringstream in(table);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find("\tFC\t") == std::string::npos) continue;
    const std::string cell = line.substr(line.rfind('\t') + 1);
    if (cell.empty() || cell.back() != '%') return Fail("cell '" + cell + "'");
    const double v = std::stod(cell.substr(0, cell.size() - 1));
    if (std::fabs(v - 17.3) > 0.05) return Fail("rendered " + cell);
    return Pass("rendered " + cell);
  }
  return Fail("no FC row");
}

Outcome EndToEndDeterminism() {
  const fs::path dir = ScratchDir("determinism");
  auto run = [&](const std::string& tag) {
    const std::string cmd = std::string(FA_CLI_PATH) +
                            " mock-audit --dataset CAMS --synthetic 12 --runs 2" +
                            " --strategies SP,CoT,FC --max-concurrency 8 --output " +
                            (dir / ("out_" + tag)).string() + " --cache-dir " +
                            (dir / ("cache_" + tag)).string() + " > " +
                            (dir / (tag + ".log")).string() + " 2>&1";
    return std::system(cmd.c_str());
  };
  if (run("a") != 0 || run("b") != 0) return Fail("mock-audit exited non-zero");
  const std::string a = ReadAll(dir / "out_a" / "dump.jsonl");
  const std::string b = ReadAll(dir / "out_b" / "dump.jsonl");
  fs::remove_all(dir);
  if (a.empty()) return Fail("empty dump");
  if (a != b) return Fail("dumps differ");
  return Pass("two mock-audit runs, identical " + std::to_string(a.size()) + "-byte dumps");
}

// Counts upstream invocations per cache key and trips `cancel` halfway.
class RecordingBackend : public Backend {
 public:
  RecordingBackend(MockBiasProfile profile, std::atomic<bool>* cancel, int64_t trip_at)
      : mock_(std::move(profile)), cancel_(cancel), trip_at_(trip_at) {}

  BackendResponse Complete(const std::string& prompt, const GenerationParams& params,
                           const RequestContext& context) override {
    {
      std::lock_guard<std::mutex> lock(mu_);
      keys_.push_back(CacheKey(prompt, params));
      if (cancel_ != nullptr && static_cast<int64_t>(keys_.size()) >= trip_at_) {
        cancel_->store(true);
      }
    }
    return mock_.Complete(prompt, params, context);
  }

  std::vector<std::string> keys() {
    std::lock_guard<std::mutex> lock(mu_);
    return keys_;
  }

 private:
  MockBackend mock_;
  std::atomic<bool>* cancel_;
  int64_t trip_at_;
  std::mutex mu_;
  std::vector<std::string> keys_;
};

Outcome Resumability() {
  const fs::path dir = ScratchDir("resume");
  AuditConfig c;
  DatasetConfig d{*FindBuiltinSpec("Dreaddit"), size_t{20}};
  d.spec.test_subsample = std::nullopt;
  d.spec.runs = 2;
  c.datasets = {d};
  c.models = {ModelConfig{"mock", true, {}, 512, 0.0}};
  c.strategies = {StrategyName::kSP, StrategyName::kFC};
  c.cache_dir = (dir / "cache").string();
  c.output_dir = (dir / "out").string();
  c.max_workers = 8;
  const int64_t expected = 20 * 60 * 2 * 2;

  std::atomic<bool> cancel{false};
  auto first = std::make_shared<RecordingBackend>(c.mock, &cancel, expected / 2);
  RunOptions o1;
  o1.cancel = &cancel;
  o1.make_backend = [&](const ModelConfig&) { return first; };
  const AuditResult r1 = RunAudit(c, o1);
  if (!r1.summary.interrupted || r1.exit_code != kExitPartial) {
    return Fail("first run was not interrupted");
  }

  auto second = std::make_shared<RecordingBackend>(c.mock, nullptr, 0);
  RunOptions o2;
  o2.make_backend = [&](const ModelConfig&) { return second; };
  const AuditResult r2 = RunAudit(c, o2);
  fs::remove_all(dir);
  if (r2.exit_code != kExitOk) return Fail("second run: " + r2.message);

  std::vector<std::string> all = first->keys();
  const auto more = second->keys();
  all.insert(all.end(), more.begin(), more.end());
  const std::set<std::string> unique(all.begin(), all.end());
  const int64_t duplicates = static_cast<int64_t>(all.size() - unique.size());
  const AuditSummary& s = r2.summary;
  std::string d2 = "first run " + std::to_string(first->keys().size()) +
                   " upstream, second run " + std::to_string(more.size()) +
                   " upstream + " + std::to_string(s.cache_hits) + " cached, " +
                   std::to_string(duplicates) + " duplicates";
  if (duplicates != 0) return Fail(d2);
  if (static_cast<int64_t>(unique.size()) != expected) return Fail(d2 + ", missing keys");
  if (s.requests != expected || s.requests != s.cache_hits + s.upstream_calls ||
      s.cache_hits != static_cast<int64_t>(first->keys().size())) {
    return Fail(d2 + ", accounting mismatch");
  }
  return Pass(d2);
}

Outcome LiveSmoke() {
  const char* endpoint = std::getenv("FAIRAUDIT_LIVE_ENDPOINT");
  const char* model = std::getenv("FAIRAUDIT_LIVE_MODEL");
  const char* key_env = std::getenv("FAIRAUDIT_LIVE_KEY_ENV");
  const std::string key_var = key_env != nullptr ? key_env : "FAIRAUDIT_API_KEY";
  if (endpoint == nullptr || model == nullptr || std::getenv(key_var.c_str()) == nullptr) {
    return {Outcome::kSkip, "set FAIRAUDIT_LIVE_ENDPOINT, FAIRAUDIT_LIVE_MODEL and " +
                                key_var + " to run"};
  }
  const fs::path dir = ScratchDir("live");
  AuditConfig c;
  DatasetConfig d{*FindBuiltinSpec("Dreaddit"), size_t{5}};
  d.spec.test_subsample = std::nullopt;
  d.spec.runs = 1;
  c.datasets = {d};
  ModelConfig m;
  m.name = model;
  m.endpoint.base_url = endpoint;
  m.endpoint.api_key_env = key_var;
  c.models = {m};
  c.strategies = {StrategyName::kSP};
  c.cache_dir = (dir / "cache").string();
  c.output_dir = (dir / "out").string();
  const AuditResult r = RunAudit(c);
  fs::remove_all(dir);
  if (r.reports.size() != 1) return Fail("no report: " + r.message);
  const FairnessReport& rep = r.reports[0];
  const std::string detail = "parse-failure rate " + Num(r.summary.parse_failure_rate * 100, 1) +
                             "%, F1 " + (rep.f1_weighted ? Num(*rep.f1_weighted, 1) : "-");
  if (r.summary.parse_failure_rate >= 0.2 || rep.n_variants != 60 ||
      rep.by_factor.size() != 7) {
    return Fail(detail);
  }
  return Pass(detail);
}

}  // namespace
}  // namespace fairaudit

int main() {
  using fairaudit::Outcome;
  struct Criterion {
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {"enrichment cardinality", fairaudit::EnrichmentCardinality},
      {"metric oracle equivalence", fairaudit::MetricOracles},
      {"null-bias soundness", fairaudit::NullBias},
      {"planted-bias recovery", fairaudit::PlantedBias},
      {"parser round-trip", fairaudit::ParserRoundTrip},
      {"two-group/std consistency", fairaudit::TwoGroupStd},
      {"mitigation report arithmetic", fairaudit::MitigationArithmetic},
      {"end-to-end determinism", fairaudit::EndToEndDeterminism},
      {"resumability", fairaudit::Resumability},
      {"live smoke", fairaudit::LiveSmoke},
  };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].check();
    } catch (const std::exception& e) {
      o = fairaudit::Fail(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* tag = o.kind == Outcome::kPass ? "PASS" : o.kind == Outcome::kSkip ? "SKIP" : "FAIL";
    if (o.kind == Outcome::kFail) ++failures;
    std::cout << "[" << tag << "] criterion " << (i + 1) << ": " << criteria[i].name << " ("
              << o.detail << "; " << fairaudit::Num(secs, 2) << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
