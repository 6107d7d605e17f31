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


#ifndef CASEBASE_TRANSE_H_
#define CASEBASE_TRANSE_H_

// Translational KB embeddings (h + r ~ t under L2) used to score relation
// substitutions.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "casebase/kb.h"

namespace casebase {

struct TransEConfig {
  int dim = 50;
  double margin = 1.0;
  int epochs = 100;
  double learning_rate = 0.01;
  uint64_t seed = 1;
};

// Row indices into a TransE table.
struct IndexedTriple {
  size_t head;
  size_t relation;
  size_t tail;
};

struct TransEGradient {
  std::map<size_t, std::vector<double>> entity;
  std::map<size_t, std::vector<double>> relation;
};

class TransE {
 public:
  TransE() = default;
  // Uniform(-6/sqrt(m), 6/sqrt(m)) initialization, all rows normalized.
  TransE(std::vector<std::string> entities, std::vector<std::string> relations,
         const TransEConfig &config);

  int dim() const { return dim_; }
  double margin() const { return margin_; }
  uint64_t seed() const { return seed_; }
  size_t num_entities() const { return entity_names_.size(); }
  size_t num_relations() const { return relation_names_.size(); }
  const std::string &entity_name(size_t i) const { return entity_names_[i]; }
  const std::string &relation_name(size_t i) const { return relation_names_[i]; }

  std::optional<size_t> EntityIndex(std::string_view name) const;
  std::optional<size_t> RelationIndex(std::string_view name) const;

  std::span<double> entity(size_t i) { return {&entities_[i * dim_], static_cast<size_t>(dim_)}; }
  std::span<const double> entity(size_t i) const {
    return {&entities_[i * dim_], static_cast<size_t>(dim_)};
  }
  std::span<double> relation(size_t i) {
    return {&relations_[i * dim_], static_cast<size_t>(dim_)};
  }
  std::span<const double> relation(size_t i) const {
    return {&relations_[i * dim_], static_cast<size_t>(dim_)};
  }

  // ||h + r - t||_2.
  double Distance(const IndexedTriple &t) const;
  // max(0, margin + d(positive) - d(negative)); adds dLoss/dparams to
  // `gradient` when given.
  double HingeLoss(const IndexedTriple &positive, const IndexedTriple &negative,
                   TransEGradient *gradient) const;
  // One SGD step on a (positive, negative) pair followed by renormalizing the
  // touched entities. Returns the loss before the step; no update when it is
  // zero.
  double Step(const IndexedTriple &positive, const IndexedTriple &negative, double learning_rate);
  void NormalizeEntity(size_t i);

  // Cosine of relation vectors, or nullopt when either has no vector.
  std::optional<double> RelationCosine(std::string_view a, std::string_view b) const;

  void Save(const std::filesystem::path &path) const;
  static TransE Load(const std::filesystem::path &path);

 private:
  void Index();

  int dim_ = 0;
  double margin_ = 1.0;
  uint64_t seed_ = 0;
  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
  std::unordered_map<std::string, size_t> entity_index_;
  std::unordered_map<std::string, size_t> relation_index_;
  std::vector<double> entities_;
  std::vector<double> relations_;
};

struct TransEReport {
  std::vector<double> epoch_loss;
  size_t triples = 0;
};

// Trains on entity-object triples only. One corruption (head or tail, fair
// coin) per positive per epoch. Throws Error(kFailedPrecondition) when the KB
// has no entity-object triple.
TransE TrainTransE(const KnowledgeBase &kb, const TransEConfig &config,
                   TransEReport *report = nullptr);

}  // namespace casebase

#endif  // CASEBASE_TRANSE_H_
