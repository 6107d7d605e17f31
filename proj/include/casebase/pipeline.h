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


#ifndef CASEBASE_PIPELINE_H_
#define CASEBASE_PIPELINE_H_

// Link, retrieve, generate, execute and revise; plus exact-match metrics
// over a dataset.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "casebase/case_memory.h"
#include "casebase/entity_linker.h"
#include "casebase/generator.h"
#include "casebase/kb.h"
#include "casebase/retriever.h"
#include "casebase/revise.h"
#include "casebase/transe.h"
#include "casebase/worldgen.h"
#include "json.hpp"

namespace casebase {

enum class ReviseMode { kOff, kSurface, kTransE };
std::string_view ReviseModeName(ReviseMode mode);
ReviseMode ParseReviseMode(std::string_view name);

// Which beam candidates may be revised. kBeamOrder revises each empty
// candidate before looking at the next; kAfterBeam executes the whole beam
// first and revises in beam order only when nothing ran nonempty.
enum class RevisePolicy { kBeamOrder, kTopOnly, kAfterBeam };
std::string_view RevisePolicyName(RevisePolicy policy);
RevisePolicy ParseRevisePolicy(std::string_view name);

struct PipelineFlags {
  size_t k = 20;
  GeneratorConfig generator;
  ReviseMode revise = ReviseMode::kTransE;
  RevisePolicy policy = RevisePolicy::kAfterBeam;
  AlignConfig align;
  // Use the caller's mentions instead of running the linker.
  bool gold_mentions = false;
};

// Flat JSON form used by config files and reports. FlagsFromJson starts from
// `base` and overrides the keys present; unknown keys throw
// Error(kInvalidArgument).
nlohmann::json FlagsToJson(const PipelineFlags &flags);
PipelineFlags FlagsFromJson(const nlohmann::json &j, PipelineFlags base = {});

struct StageTiming {
  double link_ms = 0;
  double retrieve_ms = 0;
  double generate_ms = 0;
  double execute_ms = 0;
  double revise_ms = 0;
};

struct RevisionAttempt {
  int candidate = 0;
  AlignmentResult alignment;
};

struct PipelineResult {
  std::string question;
  std::vector<Mention> mentions;
  std::vector<RetrievedCase> retrieved;
  std::string serialized_input;
  std::vector<Candidate> candidates;
  int chosen = -1;  // candidate index, -1 without candidates
  bool revised = false;
  std::optional<LogicalForm> lf;
  // Substitutions behind the chosen LF; all identity when it ran as
  // generated.
  std::vector<Substitution> revision;
  std::vector<RevisionAttempt> attempts;
  AnswerSet answers;
  std::string error;
  std::string selection_rule;
  StageTiming timing;
};

// Everything answer() reads. The KB is the one queries run against.
struct Components {
  std::shared_ptr<const KnowledgeBase> kb;
  std::shared_ptr<const AliasTable> aliases;
  std::shared_ptr<const Encoder> encoder;
  std::shared_ptr<const TransE> transe;  // optional
};

class Pipeline {
 public:
  explicit Pipeline(Components components);

  const Components &components() const { return components_; }

  // Throws Error(kFailedPrecondition) when the memory was encoded by another
  // encoder or TransE revision is asked for without embeddings.
  PipelineResult Answer(const CaseMemory &memory, std::string_view question,
                        const std::vector<Mention> *mentions, const PipelineFlags &flags) const;

  const RelationSimilarity *Similarity(ReviseMode mode) const;

 private:
  Components components_;
  std::vector<std::string> vocabulary_;
  std::unique_ptr<SurfaceSimilarity> surface_;
  std::unique_ptr<TransESimilarity> transe_;
};

// Set-based per-example scores. P is 0 for an empty prediction.
struct ExampleScore {
  bool exact = false;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};
ExampleScore ScoreAnswers(const AnswerSet &predicted, const AnswerSet &gold);

struct Metrics {
  size_t count = 0;
  double exact_match = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<std::pair<std::string, ExampleScore>> examples;  // by example id
};
Metrics Aggregate(std::vector<std::pair<std::string, ExampleScore>> examples);
nlohmann::json MetricsToJson(const Metrics &metrics, bool with_examples = false);

// One prediction log line (no timings, so logs are reproducible byte for
// byte).
nlohmann::json PredictionToJson(const PipelineResult &result, const DatasetExample *gold,
                                const ExampleScore *score);

struct EvalReport {
  Metrics metrics;
  double recall_at_k = 0.0;  // mean relation recall of the retrieved cases
  size_t revisions_attempted = 0;
  size_t structure_preserved = 0;
  size_t errors = 0;
  std::vector<std::string> log;  // JSON lines in example order
  std::vector<PipelineResult> results;
};

// Runs every example (fanned out over `threads`) and merges in input order.
EvalReport Evaluate(const Pipeline &pipeline, const CaseMemory &memory,
                    const std::vector<DatasetExample> &examples, const PipelineFlags &flags,
                    int threads = 1, bool keep_results = false);

// Training cases for the memory.
std::vector<Case> CasesFromExamples(const std::vector<DatasetExample> &examples);
std::vector<TrainItem> TrainItemsFromExamples(const std::vector<DatasetExample> &examples);

}  // namespace casebase

#endif  // CASEBASE_PIPELINE_H_
