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


#ifndef CASEBASE_EXPERIMENTS_H_
#define CASEBASE_EXPERIMENTS_H_

// Experiment harnesses over a generated world: held-out relations with case
// injection, the k sweep, the compositional split and the revise ablation.

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "casebase/pipeline.h"
#include "casebase/worldgen.h"
#include "json.hpp"

namespace casebase {

enum class ExperimentKind { kHeldoutInjection, kKAblation, kNovelCombination, kReviseAblation };
std::string_view ExperimentKindName(ExperimentKind kind);
ExperimentKind ParseExperimentKind(std::string_view name);

struct ExperimentInputs {
  const World *world = nullptr;
  const Dataset *dataset = nullptr;
  std::shared_ptr<const Encoder> encoder;
  std::shared_ptr<const TransE> transe;
  // Base flags; each experiment overrides k or revise where it sweeps them.
  PipelineFlags flags;
  int threads = 1;
  // heldout_injection: cases injected per held-out relation.
  int cases_per_relation = 5;
  uint64_t seed = 1;
};

struct ExperimentReport {
  std::string kind;
  nlohmann::json report;
  // JSON lines; every line carries a "run" field naming its sub-run.
  std::vector<std::string> log;
};

// Throws Error(kFailedPrecondition) when the dataset's split kind does not
// match the experiment (heldout_injection needs heldout_relation,
// novel_combination needs novel_combination).
ExperimentReport RunExperiment(ExperimentKind kind, const ExperimentInputs &inputs);

// One entry of the corrupted-LF benchmark.
struct CorruptedExample {
  const DatasetExample *source = nullptr;
  LogicalForm corrupted;
  std::vector<int> swapped_slots;
};

// Gold LFs with one or two relations replaced by their planted synonym
// partner where the partner is absent under the anchor, so the corrupted LF
// executes empty on `kb` while the gold LF reproduces the gold answers.
std::vector<CorruptedExample> CorruptLogicalForms(const World &world, const KnowledgeBase &kb,
                                                  const std::vector<DatasetExample> &examples,
                                                  uint64_t seed);

struct RecoveryStats {
  size_t total = 0;
  size_t recovered = 0;
  double rate() const { return total == 0 ? 0.0 : static_cast<double>(recovered) / total; }
};

// Aligns every corrupted LF (no alignment when similarity is null) and counts
// those whose answers equal the gold answers and are nonempty.
RecoveryStats MeasureRecovery(const std::vector<CorruptedExample> &benchmark,
                              const KnowledgeBase &kb, const RelationSimilarity *similarity,
                              const AlignConfig &config);

}  // namespace casebase

#endif  // CASEBASE_EXPERIMENTS_H_
