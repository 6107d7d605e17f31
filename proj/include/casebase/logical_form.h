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

#ifndef CASEBASE_LOGICAL_FORM_H_
#define CASEBASE_LOGICAL_FORM_H_

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "casebase/kb.h"

namespace casebase {

// Subject/object position of a triple pattern.
struct LfTerm {
  enum class Kind : uint8_t { kVariable, kEntity, kLiteral };

  Kind kind = Kind::kVariable;
  // Variables keep their leading '?'; entities have no "ns:" prefix.
  std::string text;
  TermKind literal_kind = TermKind::kPlain;

  static LfTerm Variable(std::string name) {
    return {Kind::kVariable, std::move(name), TermKind::kPlain};
  }
  static LfTerm Entity(std::string id) {
    return {Kind::kEntity, std::move(id), TermKind::kPlain};
  }
  static LfTerm Literal(std::string text, TermKind kind) {
    return {Kind::kLiteral, std::move(text), kind};
  }

  bool is_variable() const { return kind == Kind::kVariable; }
  bool is_entity() const { return kind == Kind::kEntity; }
  bool operator==(const LfTerm &) const = default;
};

struct TriplePattern {
  LfTerm subject;
  std::string relation;
  LfTerm object;

  bool operator==(const TriplePattern &) const = default;
};

struct OrderLimit {
  std::string variable;
  bool descending = false;
  bool datetime_cast = false;  // written as xsd:datetime(?v)
  int64_t limit = 1;

  bool operator==(const OrderLimit &) const = default;
};

// SELECT DISTINCT <select_var> WHERE { patterns } [ORDER BY .. LIMIT n]
struct LogicalForm {
  std::string select_var;
  std::vector<TriplePattern> patterns;
  std::optional<OrderLimit> order_limit;

  bool operator==(const LogicalForm &) const = default;
};

// Accepts "SELECT [DISTINCT] ?x WHERE { ... }" with dot-separated patterns,
// optional PREFIX declarations, "ns:" prefixes, FILTER(...) clauses (which are
// dropped) and a trailing ORDER BY ... LIMIT n. Throws ParseError.
LogicalForm ParseLogicalForm(std::string_view text);

// Canonical text; ParseLogicalForm(PrintLogicalForm(lf)) == lf.
std::string PrintLogicalForm(const LogicalForm &lf);

// Throws Error if the select or sort variable is unused or patterns are empty.
void ValidateLogicalForm(const LogicalForm &lf);

// Set-semantics answers of lf against kb. Unknown relations or entities
// produce an empty set. Throws Error(kUnorderable) when ORDER BY has to
// compare values of different kinds.
AnswerSet Execute(const LogicalForm &lf, const KnowledgeBase &kb);

std::set<std::string> RelationsOf(const LogicalForm &lf);

// Entity ids in order of first appearance.
std::vector<std::string> AnchorsOf(const LogicalForm &lf);

// Variable names in order of first appearance (select variable first).
std::vector<std::string> VariablesOf(const LogicalForm &lf);

// Number of patterns between pattern i and the nearest pattern touching an
// entity, following shared variables. Unreachable patterns get -1.
std::vector<int> PatternDepths(const LogicalForm &lf);

// An LF with relations abstracted to slots, entities to anchors and
// variables renamed canonically.
struct Skeleton {
  struct Term {
    enum class Kind : uint8_t { kVariable, kAnchor, kLiteral };
    Kind kind = Kind::kVariable;
    int index = 0;  // variable or anchor index
    std::string literal;
    TermKind literal_kind = TermKind::kPlain;

    bool operator==(const Term &) const = default;
  };
  struct Pattern {
    Term subject;
    Term object;
    int depth = 0;

    bool operator==(const Pattern &) const = default;
  };

  std::vector<Pattern> patterns;
  int num_variables = 0;
  int num_anchors = 0;
  // The variable field holds the canonical variable name.
  std::optional<OrderLimit> order_limit;
  std::string key;

  size_t num_slots() const { return patterns.size(); }
  bool operator==(const Skeleton &other) const { return key == other.key; }

  // Fills slots and anchors; variables become ?x, ?y, ?z, ...
  LogicalForm Instantiate(std::span<const std::string> relations,
                          std::span<const std::string> anchors) const;
};

std::string CanonicalVariableName(int index);

Skeleton SkeletonOf(const LogicalForm &lf);

}  // namespace casebase

#endif  // CASEBASE_LOGICAL_FORM_H_
