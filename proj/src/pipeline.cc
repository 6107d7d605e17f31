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


#include "casebase/pipeline.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

#include "casebase/error.h"
#include "casebase/json_io.h"

namespace casebase {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double Millis(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Unorderable results count as not executing.
AnswerSet TryExecute(const LogicalForm &lf, const KnowledgeBase &kb) {
  try {
    return Execute(lf, kb);
  } catch (const Error &e) {
    if (e.code() != ErrorCode::kUnorderable) throw;
    return {};
  }
}

std::vector<Substitution> Identity(const LogicalForm &lf) {
  std::vector<Substitution> out;
  for (size_t i = 0; i < lf.patterns.size(); ++i) {
    out.push_back({static_cast<int>(i), lf.patterns[i].relation, lf.patterns[i].relation, 1.0});
  }
  return out;
}

json SubstitutionsToJson(const std::vector<Substitution> &subs) {
  json out = json::array();
  for (const auto &s : subs) {
    out.push_back({{"slot", s.slot},
                   {"original", s.original},
                   {"replacement", s.replacement},
                   {"similarity", s.similarity}});
  }
  return out;
}

}  // namespace

std::string_view ReviseModeName(ReviseMode mode) {
  switch (mode) {
    case ReviseMode::kOff: return "off";
    case ReviseMode::kSurface: return "surface";
    case ReviseMode::kTransE: return "transe";
  }
  return "off";
}

ReviseMode ParseReviseMode(std::string_view name) {
  for (auto m : {ReviseMode::kOff, ReviseMode::kSurface, ReviseMode::kTransE}) {
    if (ReviseModeName(m) == name) return m;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "revise mode must be off, surface or transe, got " + std::string(name));
}

std::string_view RevisePolicyName(RevisePolicy policy) {
  switch (policy) {
    case RevisePolicy::kBeamOrder: return "beam_order";
    case RevisePolicy::kTopOnly: return "top_only";
    case RevisePolicy::kAfterBeam: return "after_beam";
  }
  return "beam_order";
}

RevisePolicy ParseRevisePolicy(std::string_view name) {
  for (auto p : {RevisePolicy::kBeamOrder, RevisePolicy::kTopOnly, RevisePolicy::kAfterBeam}) {
    if (RevisePolicyName(p) == name) return p;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "revise policy must be beam_order, top_only or after_beam, got " +
                  std::string(name));
}

json FlagsToJson(const PipelineFlags &f) {
  return {{"k", f.k},
          {"beam", f.generator.beam},
          {"alpha", f.generator.alpha},
          {"beta", f.generator.beta},
          {"gamma_oov", f.generator.gamma_oov},
          {"use_global_vocab", f.generator.use_global_vocab},
          {"case_temperature", f.generator.case_temperature},
          {"revise", ReviseModeName(f.revise)},
          {"policy", RevisePolicyName(f.policy)},
          {"revise_beam", f.align.beam}};
}

PipelineFlags FlagsFromJson(const json &j, PipelineFlags f) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "flags must be a JSON object");
  for (const auto &[key, value] : j.items()) {
    if (key == "k") {
      f.k = value.get<size_t>();
    } else if (key == "beam") {
      f.generator.beam = value.get<int>();
    } else if (key == "alpha") {
      f.generator.alpha = value.get<double>();
    } else if (key == "beta") {
      f.generator.beta = value.get<double>();
    } else if (key == "gamma_oov") {
      f.generator.gamma_oov = value.get<double>();
    } else if (key == "use_global_vocab") {
      f.generator.use_global_vocab = value.get<bool>();
    } else if (key == "case_temperature") {
      f.generator.case_temperature = value.get<double>();
    } else if (key == "revise") {
      f.revise = ParseReviseMode(value.get<std::string>());
    } else if (key == "policy") {
      f.policy = ParseRevisePolicy(value.get<std::string>());
    } else if (key == "revise_beam") {
      f.align.beam = value.get<int>();
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown flag " + key);
    }
  }
  ValidateGeneratorConfig(f.generator);
  return f;
}

Pipeline::Pipeline(Components components) : components_(std::move(components)) {
  if (!components_.kb || !components_.aliases || !components_.encoder) {
    throw Error(ErrorCode::kInvalidArgument, "pipeline needs a KB, aliases and an encoder");
  }
  const KnowledgeBase &kb = *components_.kb;
  for (RelationId r = 0; r < kb.num_relations(); ++r) vocabulary_.push_back(kb.Relation(r).name);
  surface_ = std::make_unique<SurfaceSimilarity>(vocabulary_);
  if (components_.transe) {
    transe_ = std::make_unique<TransESimilarity>(components_.transe, *surface_);
  }
}

const RelationSimilarity *Pipeline::Similarity(ReviseMode mode) const {
  switch (mode) {
    case ReviseMode::kOff: return nullptr;
    case ReviseMode::kSurface: return surface_.get();
    case ReviseMode::kTransE:
      if (!transe_) {
        throw Error(ErrorCode::kFailedPrecondition, "TransE revision needs trained embeddings");
      }
      return transe_.get();
  }
  return nullptr;
}

PipelineResult Pipeline::Answer(const CaseMemory &memory, std::string_view question,
                                const std::vector<Mention> *mentions,
                                const PipelineFlags &flags) const {
  const KnowledgeBase &kb = *components_.kb;
  const Encoder &encoder = *components_.encoder;
  const RelationSimilarity *similarity = Similarity(flags.revise);
  if (memory.encoder_version() != encoder.version()) {
    throw Error(ErrorCode::kFailedPrecondition, "case memory was encoded by another encoder");
  }
  PipelineResult result;
  result.question = std::string(question);
  result.selection_rule =
      std::string(flags.policy == RevisePolicy::kAfterBeam
                      ? "first nonempty unrevised candidate in beam order, else first nonempty "
                        "revision in beam order"
                      : "first nonempty candidate in beam order, revising each empty one") +
      "; revise=" + std::string(ReviseModeName(flags.revise)) + " (" +
      std::string(RevisePolicyName(flags.policy)) + ")";

  auto start = Clock::now();
  if (flags.gold_mentions && mentions != nullptr) {
    result.mentions = *mentions;
  } else {
    result.mentions = Link(question, *components_.aliases);
  }
  result.timing.link_ms = Millis(start);

  start = Clock::now();
  if (flags.k > 0) result.retrieved = Retrieve(encoder, memory, question, result.mentions, flags.k);
  result.timing.retrieve_ms = Millis(start);

  start = Clock::now();
  result.serialized_input = SerializeInput(question, result.mentions, result.retrieved);
  try {
    Generator generator(vocabulary_, flags.generator);
    result.candidates = generator.Generate(question, result.mentions, result.retrieved);
  } catch (const Error &e) {
    if (e.code() != ErrorCode::kFailedPrecondition) throw;
    result.error = e.what();
    result.timing.generate_ms = Millis(start);
    return result;
  }
  result.timing.generate_ms = Millis(start);

  auto revise = [&](size_t i) {
    start = Clock::now();
    AlignmentResult aligned = Align(result.candidates[i].lf, kb, *similarity, flags.align);
    result.timing.revise_ms += Millis(start);
    result.attempts.push_back({static_cast<int>(i), aligned});
    if (!aligned.executed) return false;
    result.chosen = static_cast<int>(i);
    result.revised = true;
    result.lf = aligned.lf;
    result.revision = aligned.substitutions;
    result.answers = aligned.answers;
    return true;
  };
  const bool interleave = flags.policy != RevisePolicy::kAfterBeam;
  for (size_t i = 0; i < result.candidates.size(); ++i) {
    const LogicalForm &lf = result.candidates[i].lf;
    start = Clock::now();
    AnswerSet answers = TryExecute(lf, kb);
    result.timing.execute_ms += Millis(start);
    if (!answers.empty()) {
      result.chosen = static_cast<int>(i);
      result.lf = lf;
      result.revision = Identity(lf);
      result.answers = std::move(answers);
      return result;
    }
    if (similarity == nullptr || !interleave ||
        (flags.policy == RevisePolicy::kTopOnly && i > 0)) {
      continue;
    }
    if (revise(i)) return result;
  }
  if (similarity != nullptr && !interleave) {
    for (size_t i = 0; i < result.candidates.size(); ++i) {
      if (revise(i)) return result;
    }
  }
  if (!result.candidates.empty()) {
    result.chosen = 0;
    result.lf = result.candidates[0].lf;
    result.revision = Identity(*result.lf);
  }
  return result;
}

ExampleScore ScoreAnswers(const AnswerSet &predicted, const AnswerSet &gold) {
  ExampleScore s;
  s.exact = predicted == gold;
  size_t overlap = 0;
  for (const Value &v : predicted) overlap += gold.count(v);
  s.precision = predicted.empty() ? 0.0 : static_cast<double>(overlap) / predicted.size();
  s.recall = gold.empty() ? 0.0 : static_cast<double>(overlap) / gold.size();
  s.f1 = s.precision + s.recall == 0 ? 0.0
                                     : 2 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

Metrics Aggregate(std::vector<std::pair<std::string, ExampleScore>> examples) {
  Metrics m;
  m.count = examples.size();
  for (const auto &[_, s] : examples) {
    m.exact_match += s.exact;
    m.precision += s.precision;
    m.recall += s.recall;
    m.f1 += s.f1;
  }
  if (m.count > 0) {
    m.exact_match /= m.count;
    m.precision /= m.count;
    m.recall /= m.count;
    m.f1 /= m.count;
  }
  m.examples = std::move(examples);
  return m;
}

json MetricsToJson(const Metrics &metrics, bool with_examples) {
  json j = {{"count", metrics.count},
            {"exact_match", metrics.exact_match},
            {"precision", metrics.precision},
            {"recall", metrics.recall},
            {"f1", metrics.f1}};
  if (with_examples) {
    json rows = json::array();
    for (const auto &[id, s] : metrics.examples) {
      rows.push_back({{"id", id}, {"exact", s.exact}, {"precision", s.precision},
                      {"recall", s.recall}, {"f1", s.f1}});
    }
    j["examples"] = rows;
  }
  return j;
}

json PredictionToJson(const PipelineResult &r, const DatasetExample *gold,
                      const ExampleScore *score) {
  json j;
  if (gold != nullptr) j["id"] = gold->id;
  j["question"] = r.question;
  j["mentions"] = r.mentions;
  j["serialized_input"] = r.serialized_input;
  json retrieved = json::array();
  for (const auto &c : r.retrieved) {
    retrieved.push_back({{"id", c.item->id}, {"similarity", c.similarity}});
  }
  j["retrieved"] = retrieved;
  json candidates = json::array();
  for (const auto &c : r.candidates) {
    json support = json::array();
    for (const auto &s : c.slots) {
      support.push_back({{"relation", s.relation},
                         {"cases", s.cases},
                         {"global", s.global},
                         {"lexical", s.lexical},
                         {"support", s.support}});
    }
    candidates.push_back({{"lf", PrintLogicalForm(c.lf)},
                          {"score", c.score},
                          {"skeleton", c.skeleton},
                          {"support", support}});
  }
  j["candidates"] = candidates;
  j["chosen"] = r.chosen;
  j["lf"] = r.lf ? json(PrintLogicalForm(*r.lf)) : json(nullptr);
  j["revised"] = r.revised;
  j["revision"] = SubstitutionsToJson(r.revision);
  json attempts = json::array();
  for (const auto &a : r.attempts) {
    attempts.push_back({{"candidate", a.candidate},
                        {"executed", a.alignment.executed},
                        {"lf", PrintLogicalForm(a.alignment.lf)},
                        {"substitutions", SubstitutionsToJson(a.alignment.substitutions)},
                        {"unaligned", a.alignment.unaligned}});
  }
  j["revise_attempts"] = attempts;
  j["answers"] = AnswersToJson(r.answers);
  if (!r.error.empty()) j["error"] = r.error;
  j["selection_rule"] = r.selection_rule;
  if (gold != nullptr) {
    j["gold_lf"] = PrintLogicalForm(gold->lf);
    j["gold_answers"] = AnswersToJson(gold->answers);
  }
  if (score != nullptr) {
    j["exact"] = score->exact;
    j["f1"] = score->f1;
  }
  return j;
}

EvalReport Evaluate(const Pipeline &pipeline, const CaseMemory &memory,
                    const std::vector<DatasetExample> &examples, const PipelineFlags &flags,
                    int threads, bool keep_results) {
  std::vector<PipelineResult> results(examples.size());
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (size_t i; (i = next.fetch_add(1)) < examples.size();) {
      try {
        results[i] = pipeline.Answer(memory, examples[i].question, &examples[i].mentions, flags);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = examples.size();
      }
    }
  };
  threads = std::max(1, threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto &t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  EvalReport report;
  std::vector<std::pair<std::string, ExampleScore>> scores;
  double recall = 0;
  for (size_t i = 0; i < examples.size(); ++i) {
    const PipelineResult &r = results[i];
    ExampleScore s = ScoreAnswers(r.answers, examples[i].answers);
    scores.push_back({examples[i].id, s});
    recall += RelationRecall(RelationsOf(examples[i].lf), r.retrieved);
    report.errors += !r.error.empty();
    for (const auto &a : r.attempts) {
      ++report.revisions_attempted;
      report.structure_preserved +=
          SkeletonOf(a.alignment.lf) == SkeletonOf(r.candidates[a.candidate].lf);
    }
    report.log.push_back(PredictionToJson(r, &examples[i], &s).dump());
  }
  report.recall_at_k = examples.empty() ? 0.0 : recall / examples.size();
  report.metrics = Aggregate(std::move(scores));
  if (keep_results) report.results = std::move(results);
  return report;
}

std::vector<Case> CasesFromExamples(const std::vector<DatasetExample> &examples) {
  std::vector<Case> out;
  out.reserve(examples.size());
  for (const auto &ex : examples) {
    out.push_back({ex.id, ex.question, ex.mentions, ex.lf, {}});
  }
  return out;
}

std::vector<TrainItem> TrainItemsFromExamples(const std::vector<DatasetExample> &examples) {
  std::vector<TrainItem> out;
  out.reserve(examples.size());
  for (const auto &ex : examples) out.push_back({ex.question, ex.mentions, RelationsOf(ex.lf)});
  return out;
}

}  // namespace casebase
