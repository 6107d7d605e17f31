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


#ifndef CASEBASE_GENERATOR_H_
#define CASEBASE_GENERATOR_H_

// Builds candidate logical forms for a question by recombining skeletons and
// relations of retrieved cases.

#include <span>
#include <string>
#include <vector>

#include "casebase/case_memory.h"
#include "casebase/entity_linker.h"
#include "casebase/kb.h"
#include "casebase/logical_form.h"
#include "casebase/text.h"

namespace casebase {

struct GeneratorConfig {
  int beam = 5;
  double alpha = 1.0;        // lexical relation/question similarity
  double beta = 1.0;         // case support
  double gamma_oov = -2.0;   // relations outside the retrieved cases
  bool use_global_vocab = false;
  // Softmax temperature over retrieval similarities.
  double case_temperature = 0.02;
};

// Throws Error(kInvalidArgument) unless beam >= 1, alpha, beta >= 0,
// gamma_oov <= 0 and case_temperature > 0.
void ValidateGeneratorConfig(const GeneratorConfig &config);

// Where a slot's relation came from and how it scored.
struct SlotSupport {
  std::string relation;
  std::vector<std::string> cases;  // ids of the cases that support it
  bool global = false;             // only in the global vocabulary
  double lexical = 0.0;
  double support = 0.0;
  double score = 0.0;
};

struct Candidate {
  LogicalForm lf;
  double score = 0.0;
  std::string skeleton;
  double skeleton_score = 0.0;
  std::vector<SlotSupport> slots;
};

// The question with each mention followed by its entity id.
std::string AugmentQuestion(std::string_view question, std::span<const Mention> mentions);

// "q [SEP] q'1 [SEP] l'1 [SEP] ... [SEP] q'k [SEP] l'k".
std::string SerializeInput(std::string_view question, std::span<const Mention> mentions,
                           std::span<const RetrievedCase> cases);

// Lowercased content tokens with a light plural strip; stopwords removed.
std::vector<std::string> ContentTokens(std::string_view text);

class Generator {
 public:
  // A skeleton with its anchors bound and every slot's scored options,
  // options sorted by (score desc, relation asc).
  struct SkeletonOption {
    Skeleton skeleton;
    double score = 0.0;
    std::vector<std::string> anchors;
    std::vector<std::vector<SlotSupport>> slots;
  };

  // `vocabulary` supplies the idf collection and the global relation pool.
  Generator(std::vector<std::string> vocabulary, GeneratorConfig config);
  Generator(const KnowledgeBase &kb, GeneratorConfig config);

  const GeneratorConfig &config() const { return config_; }

  // At most config.beam candidates, by descending score then printed LF.
  // Throws Error(kFailedPrecondition, "no cases to reuse") when no skeleton
  // is usable.
  std::vector<Candidate> Generate(std::string_view question, std::span<const Mention> mentions,
                                  std::span<const RetrievedCase> cases) const;

  // The scored search space Generate explores; sorted by skeleton key.
  std::vector<SkeletonOption> Prepare(std::string_view question,
                                      std::span<const Mention> mentions,
                                      std::span<const RetrievedCase> cases) const;

  // Exact top-`beam` assignments over the prepared options.
  static std::vector<Candidate> Search(const std::vector<SkeletonOption> &options, size_t beam);

  // tf-idf cosine between a relation's tokens and question tokens.
  double LexicalSimilarity(const std::string &relation,
                           const std::vector<std::string> &question_tokens) const;

 private:
  GeneratorConfig config_;
  std::vector<std::string> vocabulary_;
  TfIdf tfidf_;
};

}  // namespace casebase

#endif  // CASEBASE_GENERATOR_H_
