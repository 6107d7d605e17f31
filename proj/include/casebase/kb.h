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

#ifndef CASEBASE_KB_H_
#define CASEBASE_KB_H_

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace casebase {

// Kind of a KB node. Everything except kEntity is a typed literal.
enum class TermKind : uint8_t { kEntity = 0, kPlain, kDate, kNumber };

std::string_view TermKindName(TermKind kind);
std::optional<TermKind> ParseLiteralKind(std::string_view name);

// A KB node by value, independent of any particular KB's interning.
struct Value {
  TermKind kind = TermKind::kEntity;
  std::string text;

  auto operator<=>(const Value &) const = default;
  bool is_entity() const { return kind == TermKind::kEntity; }
};

using AnswerSet = std::set<Value>;

using TermId = uint32_t;
using RelationId = uint32_t;

enum class Direction { kOut, kIn, kBoth };

std::optional<Direction> ParseDirection(std::string_view name);
std::string_view DirectionName(Direction direction);

struct RelationInfo {
  std::string name;
  std::vector<std::string> tokens;
};

struct Triple {
  TermId subject;
  RelationId relation;
  TermId object;

  auto operator<=>(const Triple &) const = default;
};

// One incident edge seen from an endpoint.
struct Adjacent {
  RelationId relation;
  TermId neighbor;

  auto operator<=>(const Adjacent &) const = default;
};

struct Edge {
  RelationId relation;
  TermId neighbor;
  Direction direction;  // kOut or kIn, never kBoth
};

struct RawTriple {
  std::string subject;
  std::string relation;
  std::string object;
  TermKind object_kind = TermKind::kEntity;

  auto operator<=>(const RawTriple &) const = default;
};

// Immutable in-memory triple store. Terms and relations are interned in
// sorted name order, so id order equals name order and the whole structure
// is independent of input order.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;

  // Tab-separated "subject\trelation\tobject[\tliteral_type]" lines; '#'
  // starts a comment line. Duplicates are dropped.
  static KnowledgeBase Load(const std::filesystem::path &path);
  static KnowledgeBase Parse(std::istream &in);
  static KnowledgeBase FromTriples(std::vector<RawTriple> triples);

  // Writes the canonical TSV form (sorted).
  void Save(std::ostream &out) const;
  void Save(const std::filesystem::path &path) const;

  size_t num_triples() const { return triples_.size(); }
  size_t num_terms() const { return terms_.size(); }
  size_t num_entities() const { return entities_.size(); }
  size_t num_relations() const { return relations_.size(); }

  const std::vector<Triple> &triples() const { return triples_; }
  // Entity term ids in name order.
  const std::vector<TermId> &entities() const { return entities_; }

  std::optional<TermId> FindEntity(std::string_view name) const;
  std::optional<TermId> FindTerm(TermKind kind, std::string_view text) const;
  std::optional<RelationId> FindRelation(std::string_view name) const;

  const std::string &TermName(TermId id) const { return terms_[id].text; }
  TermKind Kind(TermId id) const { return terms_[id].kind; }
  const Value &TermValue(TermId id) const { return terms_[id]; }
  bool IsEntity(TermId id) const { return terms_[id].is_entity(); }
  const RelationInfo &Relation(RelationId id) const { return relations_[id]; }

  // All incident edges, sorted by relation name then neighbor name. Unknown
  // ids yield an empty list.
  std::vector<Edge> Neighborhood(TermId term, Direction direction) const;
  std::vector<Edge> Neighborhood(std::string_view entity,
                                 Direction direction) const;

  bool HasEdge(TermId term, RelationId relation, Direction direction) const;
  bool HasTriple(TermId subject, RelationId relation, TermId object) const;

  // Sorted adjacency slices.
  std::span<const Adjacent> Out(TermId term) const;
  std::span<const Adjacent> In(TermId term) const;
  std::span<const Adjacent> Objects(TermId subject, RelationId relation) const;
  std::span<const Adjacent> Subjects(TermId object, RelationId relation) const;
  // Every triple carrying the relation, sorted by (subject, object).
  std::span<const Triple> WithRelation(RelationId relation) const;

 private:
  std::vector<Value> terms_;
  std::vector<TermId> entities_;
  std::vector<RelationInfo> relations_;
  std::unordered_map<std::string, RelationId> relation_index_;
  std::vector<Triple> triples_;  // sorted by (subject, relation, object)
  std::vector<Triple> by_relation_;
  std::vector<size_t> relation_offsets_;
  std::vector<Adjacent> out_;
  std::vector<size_t> out_offsets_;
  std::vector<Adjacent> in_;
  std::vector<size_t> in_offsets_;
};

}  // namespace casebase

#endif  // CASEBASE_KB_H_
