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

#include "casebase/entity_linker.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <tuple>

#include "casebase/error.h"
#include "casebase/text.h"

namespace casebase {

AliasTable AliasTable::Load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + path.string());
  return Parse(in);
}

AliasTable AliasTable::Parse(std::istream &in) {
  AliasTable table;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw Error(ErrorCode::kParse,
                  "malformed alias line " + std::to_string(line_number));
    }
    table.Add(std::string_view(line).substr(0, tab),
              std::string_view(line).substr(tab + 1));
  }
  return table;
}

void AliasTable::Save(std::ostream &out) const {
  for (const auto &[entity, aliases] : by_entity_) {
    for (const std::string &alias : aliases) out << entity << '\t' << alias << '\n';
  }
}

void AliasTable::Save(const std::filesystem::path &path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kUnavailable, "cannot write " + path.string());
  Save(out);
}

void AliasTable::Add(std::string_view entity, std::string_view alias) {
  std::string lowered = ToLower(alias);
  auto &entities = by_alias_[lowered];
  auto it = std::lower_bound(entities.begin(), entities.end(), entity);
  if (it != entities.end() && *it == entity) return;
  entities.insert(it, std::string(entity));
  by_entity_[std::string(entity)].push_back(std::string(alias));
  ++num_pairs_;
  max_alias_words_ = std::max(max_alias_words_, Tokenize(lowered).size());
}

const std::vector<std::string> *AliasTable::Find(
    std::string_view lowered_alias) const {
  auto it = by_alias_.find(lowered_alias);
  return it == by_alias_.end() ? nullptr : &it->second;
}

std::vector<std::string> AliasTable::AliasesOf(std::string_view entity) const {
  auto it = by_entity_.find(entity);
  return it == by_entity_.end() ? std::vector<std::string>{} : it->second;
}

std::vector<Mention> Link(std::string_view question, const AliasTable &aliases) {
  // Word boundaries are token boundaries, so candidate spans start at a token
  // begin and end at a token end.
  std::vector<Token> tokens = Tokenize(question);
  std::string lowered = ToLower(question);
  std::vector<Mention> candidates;
  size_t max_words = std::max<size_t>(aliases.max_alias_words(), 1);
  for (size_t i = 0; i < tokens.size(); ++i) {
    for (size_t j = i; j < tokens.size() && j < i + max_words; ++j) {
      size_t begin = tokens[i].begin;
      size_t end = tokens[j].end;
      const auto *entities =
          aliases.Find(std::string_view(lowered).substr(begin, end - begin));
      if (entities == nullptr) continue;
      candidates.push_back({begin, end, std::string(question.substr(begin, end - begin)),
                            entities->front(), MentionSource::kLinked});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Mention &a, const Mention &b) {
              size_t la = a.end - a.begin;
              size_t lb = b.end - b.begin;
              if (la != lb) return la > lb;
              if (a.begin != b.begin) return a.begin < b.begin;
              return a.entity < b.entity;
            });
  std::vector<Mention> chosen;
  for (Mention &m : candidates) {
    bool overlaps = std::any_of(chosen.begin(), chosen.end(), [&](const Mention &c) {
      return m.begin < c.end && c.begin < m.end;
    });
    if (!overlaps) chosen.push_back(std::move(m));
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const Mention &a, const Mention &b) { return a.begin < b.begin; });
  return chosen;
}

LinkScore ScoreLinks(const std::vector<std::vector<Mention>> &gold,
                     const std::vector<std::vector<Mention>> &predicted) {
  if (gold.size() != predicted.size()) {
    throw Error(ErrorCode::kInvalidArgument, "gold/predicted size mismatch");
  }
  size_t n_gold = 0, n_pred = 0, n_hit = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    std::set<std::tuple<size_t, size_t, std::string>> g;
    for (const Mention &m : gold[i]) g.insert({m.begin, m.end, m.entity});
    n_gold += g.size();
    n_pred += predicted[i].size();
    for (const Mention &m : predicted[i]) n_hit += g.count({m.begin, m.end, m.entity});
  }
  LinkScore s;
  s.precision = n_pred == 0 ? 0.0 : static_cast<double>(n_hit) / n_pred;
  s.recall = n_gold == 0 ? 0.0 : static_cast<double>(n_hit) / n_gold;
  if (s.precision + s.recall > 0) {
    s.f1 = 2 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

}  // namespace casebase
