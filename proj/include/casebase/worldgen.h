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

#ifndef CASEBASE_WORLDGEN_H_
#define CASEBASE_WORLDGEN_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "casebase/entity_linker.h"
#include "casebase/kb.h"
#include "casebase/logical_form.h"
#include "json.hpp"

namespace casebase {

struct EntityType {
  std::string name;
  double share = 0.0;  // fraction of n_entities
  std::string noun;    // "which {noun} ..."
};

// How edges of a relation are drawn.
enum class FanoutMode { kBySubject, kByObject, kSymmetricGroups };

// Phrasing placeholders: {E} is the anchor mention, {X} the inner noun
// phrase of a chain.
struct RelationSchema {
  std::string name;
  std::string domain;
  std::string range;  // an entity type, or "date" / "plain" for literals
  FanoutMode mode = FanoutMode::kBySubject;
  double coverage = 1.0;  // chance that a subject (object) gets any edge
  int min_fanout = 1;
  int max_fanout = 1;
  std::vector<std::string> questions;  // ask for objects of {E}
  std::string phrase;                  // chain noun phrase with {X}
  std::string object_clause;           // "which T {clause}" with T the range
  std::string subject_clause;          // "which T {clause}" with T the domain
  std::string date_noun;               // date relations: "release date"
  std::string synonym;                 // planted duplicate relation
};

struct WorldConfig {
  uint64_t seed = 17;
  int n_entities = 1000;
  std::vector<EntityType> types;
  std::vector<RelationSchema> relations;
  int n_question_templates = 3;
  double drop_edge_rate = 0.3;
  double ambiguous_alias_rate = 0.05;
  // Chance that a head of a relation with a synonym also carries copies of
  // its edges under the synonym.
  double synonym_rate = 0.5;
  double zipf_exponent = 1.0;
};

// The built-in catalog of entity types and relations.
WorldConfig DefaultWorldConfig(uint64_t seed = 17, int n_entities = 1000);

struct EntityInfo {
  std::string id;
  std::string type;
  std::string name;
  std::string short_alias;  // shared with another entity, or empty
};

struct World {
  WorldConfig config;
  KnowledgeBase full;
  KnowledgeBase incomplete;
  AliasTable aliases;
  std::map<std::string, EntityInfo> entities;
  // (relation, synonym) pairs.
  std::vector<std::pair<std::string, std::string>> synonyms;

  const RelationSchema *Schema(std::string_view relation) const;
};

// Throws Error(kInvalidArgument) for an invalid config or a relation whose
// domain or range type has no entities.
World GenerateWorld(const WorldConfig &config);

// kb_full.tsv, kb.tsv, aliases.tsv, entities.tsv, world.json.
void SaveWorld(const World &world, const std::filesystem::path &dir);
World LoadWorld(const std::filesystem::path &dir);

enum class QuestionForm { kOneHop, kInverse, kChain, kConjunction, kSuperlative };
std::string_view QuestionFormName(QuestionForm form);
QuestionForm ParseQuestionForm(std::string_view name);

struct DatasetExample {
  std::string id;
  std::string question;
  std::vector<Mention> mentions;
  LogicalForm lf;
  AnswerSet answers;
  QuestionForm form = QuestionForm::kOneHop;
};

struct SplitSpec {
  enum class Kind { kStandard, kHeldoutRelation, kNovelCombination, kMcdLike };
  Kind kind = Kind::kStandard;
  std::set<std::string> heldout_relations;
  int n_train = 2000;
  int n_valid = 300;
  int n_test = 600;
  // Form mix: one-hop, inverse, chain, conjunction, superlative.
  std::vector<double> form_weights = {0.35, 0.1, 0.25, 0.2, 0.1};
};

std::string_view SplitKindName(SplitSpec::Kind kind);
SplitSpec::Kind ParseSplitKind(std::string_view name);

struct Dataset {
  SplitSpec split;
  std::vector<DatasetExample> train;
  std::vector<DatasetExample> valid;
  std::vector<DatasetExample> test;
  // Split diagnostics (held-out pairs, divergences).
  nlohmann::json info;
};

// Throws Error(kFailedPrecondition) naming the offending relation or
// combination when the split cannot be satisfied.
Dataset GenerateDataset(const World &world, const SplitSpec &split, uint64_t seed);

// One-hop questions about a relation with fresh phrasing and anchors not
// used by `avoid`; the material for case injection.
std::vector<DatasetExample> GenerateSimpleCases(const World &world,
                                                const std::string &relation, int n,
                                                uint64_t seed,
                                                const std::vector<DatasetExample> &avoid);

nlohmann::json ExampleToJson(const DatasetExample &example);
DatasetExample ExampleFromJson(const nlohmann::json &j);
void WriteExamples(const std::vector<DatasetExample> &examples,
                   const std::filesystem::path &path);
std::vector<DatasetExample> ReadExamples(const std::filesystem::path &path);

// train.jsonl, valid.jsonl, test.jsonl and split.json.
void SaveDataset(const Dataset &dataset, const std::filesystem::path &dir);
Dataset LoadDataset(const std::filesystem::path &dir);

}  // namespace casebase

#endif  // CASEBASE_WORLDGEN_H_
