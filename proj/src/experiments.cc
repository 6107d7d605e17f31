// Copyright 2026 The Casebase Authors.
//
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


#include "casebase/experiments.h"

#include <algorithm>
#include <chrono>
#include <map>
#include <random>

#include "casebase/error.h"

namespace casebase {
namespace {

using nlohmann::json;

Pipeline MakePipeline(const ExperimentInputs &in) {
  if (in.world == nullptr || in.dataset == nullptr || !in.encoder) {
    throw Error(ErrorCode::kInvalidArgument, "experiment needs a world, a dataset and an encoder");
  }
  return Pipeline({std::make_shared<const KnowledgeBase>(in.world->incomplete),
                   std::make_shared<const AliasTable>(in.world->aliases), in.encoder,
                   in.transe});
}

void RequireSplit(const ExperimentInputs &in, SplitSpec::Kind kind, ExperimentKind experiment) {
  if (in.dataset->split.kind != kind) {
    throw Error(ErrorCode::kFailedPrecondition,
                std::string(ExperimentKindName(experiment)) + " needs a " +
                    std::string(SplitKindName(kind)) + " split, got " +
                    std::string(SplitKindName(in.dataset->split.kind)));
  }
}

json Summary(const EvalReport &r) {
  json j = MetricsToJson(r.metrics);
  j["recall_at_k"] = r.recall_at_k;
  j["errors"] = r.errors;
  j["revisions_attempted"] = r.revisions_attempted;
  j["structure_preserved"] = r.structure_preserved;
  return j;
}

void AppendLog(const std::string &run, const EvalReport &r, std::vector<std::string> *log) {
  for (const std::string &line : r.log) {
    json j = json::parse(line);
    j["run"] = run;
    log->push_back(j.dump());
  }
}

std::vector<std::string> RetrievedIds(const PipelineResult &r) {
  std::vector<std::string> ids;
  for (const auto &c : r.retrieved) ids.push_back(c.item->id);
  return ids;
}

ExperimentReport HeldoutInjection(const ExperimentInputs &in) {
  RequireSplit(in, SplitSpec::Kind::kHeldoutRelation, ExperimentKind::kHeldoutInjection);
  if (in.cases_per_relation <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "cases_per_relation must be positive");
  }
  const Dataset &data = *in.dataset;
  const std::set<std::string> &held = data.split.heldout_relations;
  Pipeline pipeline = MakePipeline(in);
  CaseMemory memory = CaseMemory::Build(CasesFromExamples(data.train), *in.encoder);

  std::vector<DatasetExample> held_questions, initial;
  for (const auto &ex : data.test) {
    bool uses = false;
    for (const auto &r : RelationsOf(ex.lf)) uses |= held.count(r) > 0;
    (uses ? held_questions : initial).push_back(ex);
  }

  ExperimentReport out;
  out.kind = "heldout_injection";
  EvalReport held_before = Evaluate(pipeline, memory, held_questions, in.flags, in.threads);
  EvalReport init_before =
      Evaluate(pipeline, memory, initial, in.flags, in.threads, /*keep_results=*/true);

  std::vector<DatasetExample> avoid = data.train;
  avoid.insert(avoid.end(), data.valid.begin(), data.valid.end());
  avoid.insert(avoid.end(), data.test.begin(), data.test.end());
  json injected = json::array();
  auto start = std::chrono::steady_clock::now();
  uint64_t seed = in.seed;
  for (const std::string &relation : held) {
    for (const auto &c :
         GenerateSimpleCases(*in.world, relation, in.cases_per_relation, seed++, avoid)) {
      std::string sparql = PrintLogicalForm(c.lf);
      InjectResult r = memory.Inject(c.question, sparql, c.mentions, *in.encoder,
                                     pipeline.components().kb.get(), "", "heldout_injection");
      injected.push_back({{"id", r.id}, {"question", c.question}, {"sparql", sparql}});
    }
  }
  double inject_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
          .count();

  EvalReport held_after = Evaluate(pipeline, memory, held_questions, in.flags, in.threads);
  EvalReport init_after =
      Evaluate(pipeline, memory, initial, in.flags, in.threads, /*keep_results=*/true);

  // Questions whose neighbour lists did not move must predict identically.
  size_t unaffected = 0, identical = 0;
  for (size_t i = 0; i < initial.size(); ++i) {
    if (RetrievedIds(init_before.results[i]) != RetrievedIds(init_after.results[i])) continue;
    ++unaffected;
    identical += init_before.log[i] == init_after.log[i];
  }

  AppendLog("before/heldout", held_before, &out.log);
  AppendLog("before/initial", init_before, &out.log);
  AppendLog("after/heldout", held_after, &out.log);
  AppendLog("after/initial", init_after, &out.log);
  out.report = {
      {"kind", out.kind},
      {"heldout_relations", held},
      {"n_heldout_questions", held_questions.size()},
      {"n_initial_questions", initial.size()},
      {"cases_per_relation", in.cases_per_relation},
      {"injected", injected},
      {"gradient_steps", 0},
      {"injection_ms", inject_ms},
      {"before", {{"heldout", Summary(held_before)}, {"initial", Summary(init_before)}}},
      {"after", {{"heldout", Summary(held_after)}, {"initial", Summary(init_after)}}},
      {"initial_unaffected", unaffected},
      {"initial_unaffected_identical", identical},
      {"initial_log_identical", init_before.log == init_after.log},
  };
  return out;
}

ExperimentReport KAblation(const ExperimentInputs &in) {
  Pipeline pipeline = MakePipeline(in);
  CaseMemory memory = CaseMemory::Build(CasesFromExamples(in.dataset->train), *in.encoder);
  ExperimentReport out;
  out.kind = "k_ablation";
  json rows = json::array();
  double last_recall = -1;
  bool monotone = true;
  for (size_t k : {0, 1, 10, 20}) {
    PipelineFlags flags = in.flags;
    flags.k = k;
    EvalReport r = Evaluate(pipeline, memory, in.dataset->test, flags, in.threads);
    json row = Summary(r);
    row["k"] = k;
    rows.push_back(row);
    monotone &= r.recall_at_k >= last_recall;
    last_recall = r.recall_at_k;
    AppendLog("k=" + std::to_string(k), r, &out.log);
  }
  out.report = {{"kind", out.kind},
                {"split", SplitKindName(in.dataset->split.kind)},
                {"rows", rows},
                {"recall_monotone", monotone}};
  return out;
}

ExperimentReport NovelCombination(const ExperimentInputs &in) {
  RequireSplit(in, SplitSpec::Kind::kNovelCombination, ExperimentKind::kNovelCombination);
  Pipeline pipeline = MakePipeline(in);
  CaseMemory memory = CaseMemory::Build(CasesFromExamples(in.dataset->train), *in.encoder);
  const auto &test = in.dataset->test;
  ExperimentReport out;
  out.kind = "novel_combination";
  struct Counts {
    size_t n = 0, correct_k0 = 0, correct_k20 = 0;
  };
  std::map<std::string, Counts> table;
  for (const auto &ex : test) {
    std::string key;
    for (const auto &r : RelationsOf(ex.lf)) key += (key.empty() ? "" : " + ") + r;
    ++table[key].n;
  }
  json runs = json::object();
  for (size_t k : {0, 20}) {
    PipelineFlags flags = in.flags;
    flags.k = k;
    EvalReport r = Evaluate(pipeline, memory, test, flags, in.threads);
    for (size_t i = 0; i < test.size(); ++i) {
      if (!r.metrics.examples[i].second.exact) continue;
      std::string key;
      for (const auto &rel : RelationsOf(test[i].lf)) key += (key.empty() ? "" : " + ") + rel;
      (k == 0 ? table[key].correct_k0 : table[key].correct_k20) += 1;
    }
    runs["k=" + std::to_string(k)] = Summary(r);
    AppendLog("k=" + std::to_string(k), r, &out.log);
  }
  json rows = json::array();
  for (const auto &[key, c] : table) {
    rows.push_back({{"combination", key},
                    {"n", c.n},
                    {"correct_k0", c.correct_k0},
                    {"correct_k20", c.correct_k20}});
  }
  out.report = {{"kind", out.kind},
                {"heldout_combinations", in.dataset->info.value("heldout_combinations", json())},
                {"runs", runs},
                {"counts", rows}};
  return out;
}

ExperimentReport ReviseAblation(const ExperimentInputs &in) {
  Pipeline pipeline = MakePipeline(in);
  const KnowledgeBase &kb = *pipeline.components().kb;
  CaseMemory memory = CaseMemory::Build(CasesFromExamples(in.dataset->train), *in.encoder);
  ExperimentReport out;
  out.kind = "revise_ablation";
  std::vector<ReviseMode> modes = {ReviseMode::kOff, ReviseMode::kSurface};
  if (in.transe) modes.push_back(ReviseMode::kTransE);
  json runs = json::object();
  for (ReviseMode mode : modes) {
    PipelineFlags flags = in.flags;
    flags.revise = mode;
    EvalReport r = Evaluate(pipeline, memory, in.dataset->test, flags, in.threads);
    runs[std::string(ReviseModeName(mode))] = Summary(r);
    AppendLog(std::string(ReviseModeName(mode)), r, &out.log);
  }

  auto benchmark = CorruptLogicalForms(*in.world, kb, in.dataset->test, in.seed);
  json recovery = json::object();
  for (ReviseMode mode : modes) {
    RecoveryStats s = MeasureRecovery(benchmark, kb, pipeline.Similarity(mode), in.flags.align);
    recovery[std::string(ReviseModeName(mode))] = {{"recovered", s.recovered},
                                                   {"total", s.total},
                                                   {"rate", s.rate()}};
  }
  if (in.transe) {
    AlignConfig greedy = in.flags.align;
    greedy.beam = 1;
    RecoveryStats s = MeasureRecovery(benchmark, kb, pipeline.Similarity(ReviseMode::kTransE),
                                      greedy);
    recovery["transe_greedy"] = {{"recovered", s.recovered},
                                 {"total", s.total},
                                 {"rate", s.rate()}};
    // Cosine on every relation, including collapsed symmetric ones.
    TransESimilarity raw(in.transe, SurfaceSimilarity(kb), 0.0);
    s = MeasureRecovery(benchmark, kb, &raw, in.flags.align);
    recovery["transe_no_norm_fallback"] = {{"recovered", s.recovered},
                                           {"total", s.total},
                                           {"rate", s.rate()}};
  }
  out.report = {{"kind", out.kind},
                {"runs", runs},
                {"corrupted_benchmark", recovery},
                {"beam", in.flags.align.beam}};
  return out;
}

}  // namespace

std::string_view ExperimentKindName(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kHeldoutInjection: return "heldout_injection";
    case ExperimentKind::kKAblation: return "k_ablation";
    case ExperimentKind::kNovelCombination: return "novel_combination";
    case ExperimentKind::kReviseAblation: return "revise_ablation";
  }
  return "";
}

ExperimentKind ParseExperimentKind(std::string_view name) {
  for (auto k : {ExperimentKind::kHeldoutInjection, ExperimentKind::kKAblation,
                 ExperimentKind::kNovelCombination, ExperimentKind::kReviseAblation}) {
    if (ExperimentKindName(k) == name) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown experiment " + std::string(name));
}

ExperimentReport RunExperiment(ExperimentKind kind, const ExperimentInputs &inputs) {
  if (inputs.dataset == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "experiment needs a dataset");
  }
  switch (kind) {
    case ExperimentKind::kHeldoutInjection: return HeldoutInjection(inputs);
    case ExperimentKind::kKAblation: return KAblation(inputs);
    case ExperimentKind::kNovelCombination: return NovelCombination(inputs);
    case ExperimentKind::kReviseAblation: return ReviseAblation(inputs);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown experiment");
}

std::vector<CorruptedExample> CorruptLogicalForms(const World &world, const KnowledgeBase &kb,
                                                  const std::vector<DatasetExample> &examples,
                                                  uint64_t seed) {
  std::map<std::string, std::string> partner;
  for (const auto &[a, b] : world.synonyms) {
    partner[a] = b;
    partner[b] = a;
  }
  std::mt19937_64 rng(seed);
  std::vector<CorruptedExample> out;
  for (const auto &ex : examples) {
    std::vector<int> swappable;
    for (size_t i = 0; i < ex.lf.patterns.size(); ++i) {
      if (partner.count(ex.lf.patterns[i].relation)) swappable.push_back(static_cast<int>(i));
    }
    if (swappable.empty()) continue;
    AnswerSet gold;
    try {
      gold = Execute(ex.lf, kb);
    } catch (const Error &) {
      continue;
    }
    if (gold.empty() || gold != ex.answers) continue;
    std::shuffle(swappable.begin(), swappable.end(), rng);
    size_t n = std::min<size_t>(swappable.size(), 1 + rng() % 2);
    swappable.resize(n);
    std::sort(swappable.begin(), swappable.end());
    CorruptedExample c{&ex, ex.lf, swappable};
    for (int slot : swappable) {
      c.corrupted.patterns[slot].relation = partner[c.corrupted.patterns[slot].relation];
    }
    AnswerSet corrupted;
    try {
      corrupted = Execute(c.corrupted, kb);
    } catch (const Error &) {
      continue;
    }
    if (corrupted.empty()) out.push_back(std::move(c));
  }
  return out;
}

RecoveryStats MeasureRecovery(const std::vector<CorruptedExample> &benchmark,
                              const KnowledgeBase &kb, const RelationSimilarity *similarity,
                              const AlignConfig &config) {
  RecoveryStats s;
  s.total = benchmark.size();
  for (const auto &c : benchmark) {
    AnswerSet answers;
    if (similarity == nullptr) {
      answers = Execute(c.corrupted, kb);
    } else {
      AlignmentResult r = Align(c.corrupted, kb, *similarity, config);
      if (r.executed) answers = r.answers;
    }
    s.recovered += !answers.empty() && answers == c.source->answers;
  }
  return s;
}

}  // namespace casebase
