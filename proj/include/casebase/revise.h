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


#ifndef CASEBASE_REVISE_H_
#define CASEBASE_REVISE_H_

// Repairs non-executing logical forms by swapping relations for similar ones
// found on the edges around the query entities. The pattern structure is
// never changed.

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "casebase/kb.h"
#include "casebase/logical_form.h"
#include "casebase/text.h"
#include "casebase/transe.h"

namespace casebase {

class RelationSimilarity {
 public:
  virtual ~RelationSimilarity() = default;
  // In [-1, 1]; 1 for identical names.
  virtual double Similarity(std::string_view a, std::string_view b) const = 0;
  virtual std::string_view name() const = 0;
};

// tf-idf cosine over relation name tokens, with document frequencies taken
// from a relation vocabulary.
class SurfaceSimilarity : public RelationSimilarity {
 public:
  explicit SurfaceSimilarity(const std::vector<std::string> &relations);
  explicit SurfaceSimilarity(const KnowledgeBase &kb);

  double Similarity(std::string_view a, std::string_view b) const override;
  std::string_view name() const override { return "surface"; }

 private:
  TfIdf tfidf_;
};

// Cosine of TransE relation vectors; relations without a vector (literal
// relations, unseen names) fall back to surface similarity.
// Cosine between TransE relation vectors. Falls back to surface similarity
// for relations without an embedding and for relations whose vector norm is
// below min_norm_ratio times the mean: symmetric relations collapse toward
// the zero vector under the translation objective, leaving no direction to
// compare. A ratio of 0 disables the norm check.
class TransESimilarity : public RelationSimilarity {
 public:
  TransESimilarity(std::shared_ptr<const TransE> model, SurfaceSimilarity fallback,
                   double min_norm_ratio = 0.5);

  double Similarity(std::string_view a, std::string_view b) const override;
  std::string_view name() const override { return "transe"; }

 private:
  bool Degenerate(std::string_view relation) const;

  std::shared_ptr<const TransE> model_;
  SurfaceSimilarity fallback_;
  std::vector<bool> degenerate_;  // by relation index
};

struct Substitution {
  int slot = 0;  // pattern index
  std::string original;
  std::string replacement;
  double similarity = 1.0;

  bool identity() const { return original == replacement; }
  bool operator==(const Substitution &) const = default;
};

struct AlignmentResult {
  LogicalForm lf;
  std::vector<Substitution> substitutions;  // in processing order
  bool executed = false;
  AnswerSet answers;
  // Patterns with no bound endpoint when reached; left as predicted.
  std::vector<int> unaligned;
  double score = 0.0;
};

struct AlignConfig {
  int beam = 5;
  // Cap on partial binding rows per state.
  size_t max_rows = 20000;
};

// Throws Error(kInvalidArgument) for an invalid lf.
AlignmentResult Align(const LogicalForm &lf, const KnowledgeBase &kb,
                      const RelationSimilarity &similarity, const AlignConfig &config = {});

// Grounded-first processing order; patterns unreachable from a constant are
// appended at the end and reported in `unreachable`.
std::vector<int> GroundedOrder(const LogicalForm &lf, std::vector<int> *unreachable);

}  // namespace casebase

#endif  // CASEBASE_REVISE_H_
