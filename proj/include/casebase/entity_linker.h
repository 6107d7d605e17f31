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

#ifndef CASEBASE_ENTITY_LINKER_H_
#define CASEBASE_ENTITY_LINKER_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace casebase {

enum class MentionSource { kGold, kLinked };

// A grounded span [begin, end) of a question, in bytes.
struct Mention {
  size_t begin = 0;
  size_t end = 0;
  std::string surface;
  std::string entity;
  MentionSource source = MentionSource::kGold;

  bool operator==(const Mention &) const = default;
};

// Maps lowercased surface forms to entity ids.
class AliasTable {
 public:
  AliasTable() = default;

  // "entity_id\talias" lines; blank lines and '#' comments are skipped.
  static AliasTable Load(const std::filesystem::path &path);
  static AliasTable Parse(std::istream &in);
  void Save(std::ostream &out) const;
  void Save(const std::filesystem::path &path) const;

  void Add(std::string_view entity, std::string_view alias);

  // Candidate entities for an alias, smallest id first.
  const std::vector<std::string> *Find(std::string_view lowered_alias) const;
  // Aliases of an entity in insertion order.
  std::vector<std::string> AliasesOf(std::string_view entity) const;

  size_t size() const { return num_pairs_; }
  size_t max_alias_words() const { return max_alias_words_; }

 private:
  std::map<std::string, std::vector<std::string>, std::less<>> by_alias_;
  std::map<std::string, std::vector<std::string>, std::less<>> by_entity_;
  size_t num_pairs_ = 0;
  size_t max_alias_words_ = 0;
};

// Case-insensitive longest match on word boundaries. Overlaps are resolved
// by longer span, then earlier start, then smaller entity id. Output is
// sorted by position.
std::vector<Mention> Link(std::string_view question, const AliasTable &aliases);

struct LinkScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Micro-averaged over (span, entity) pairs.
LinkScore ScoreLinks(const std::vector<std::vector<Mention>> &gold,
                     const std::vector<std::vector<Mention>> &predicted);

}  // namespace casebase

#endif  // CASEBASE_ENTITY_LINKER_H_
