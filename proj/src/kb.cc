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

#include "casebase/kb.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "casebase/error.h"
#include "casebase/text.h"

namespace casebase {
namespace {

std::vector<std::string> SplitTabs(const std::string &line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

// Lookup key for a (kind, text) pair.
std::string TermKey(TermKind kind, std::string_view text) {
  std::string key(1, static_cast<char>('0' + static_cast<int>(kind)));
  key.append(text);
  return key;
}

// Builds CSR offsets for a list sorted by key(x).
template <typename T, typename KeyFn>
std::vector<size_t> Offsets(const std::vector<T> &items, size_t n, KeyFn key) {
  std::vector<size_t> offsets(n + 1, 0);
  for (const auto &item : items) ++offsets[key(item) + 1];
  for (size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  return offsets;
}

}  // namespace

std::string_view TermKindName(TermKind kind) {
  switch (kind) {
    case TermKind::kEntity: return "entity";
    case TermKind::kPlain: return "plain";
    case TermKind::kDate: return "date";
    case TermKind::kNumber: return "number";
  }
  return "entity";
}

std::optional<TermKind> ParseLiteralKind(std::string_view name) {
  if (name == "plain") return TermKind::kPlain;
  if (name == "date") return TermKind::kDate;
  if (name == "number") return TermKind::kNumber;
  return std::nullopt;
}

std::optional<Direction> ParseDirection(std::string_view name) {
  if (name == "out") return Direction::kOut;
  if (name == "in") return Direction::kIn;
  if (name == "both") return Direction::kBoth;
  return std::nullopt;
}

std::string_view DirectionName(Direction direction) {
  switch (direction) {
    case Direction::kOut: return "out";
    case Direction::kIn: return "in";
    case Direction::kBoth: return "both";
  }
  return "both";
}

KnowledgeBase KnowledgeBase::Load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kNotFound, "cannot open KB file " + path.string());
  }
  return Parse(in);
}

KnowledgeBase KnowledgeBase::Parse(std::istream &in) {
  std::vector<RawTriple> raw;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = SplitTabs(line);
    auto fail = [&](const std::string &why) {
      throw Error(ErrorCode::kInvalidArgument,
                  "malformed KB line " + std::to_string(line_no) + ": " + why);
    };
    if (fields.size() != 3 && fields.size() != 4) {
      fail("expected 3 or 4 tab-separated fields, got " +
           std::to_string(fields.size()));
    }
    for (size_t i = 0; i < 3; ++i) {
      if (fields[i].empty()) fail("empty field " + std::to_string(i + 1));
    }
    if (RelationTokens(fields[1]).empty()) fail("relation has no tokens");
    RawTriple t{fields[0], fields[1], fields[2], TermKind::kEntity};
    if (fields.size() == 4) {
      auto kind = ParseLiteralKind(fields[3]);
      if (!kind) fail("unknown literal type '" + fields[3] + "'");
      t.object_kind = *kind;
    }
    raw.push_back(std::move(t));
  }
  return FromTriples(std::move(raw));
}

KnowledgeBase KnowledgeBase::FromTriples(std::vector<RawTriple> raw) {
  for (const auto &t : raw) {
    if (t.subject.empty() || t.relation.empty() || t.object.empty() ||
        RelationTokens(t.relation).empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "malformed triple (" + t.subject + ", " + t.relation + ", " +
                      t.object + ")");
    }
  }
  std::sort(raw.begin(), raw.end());
  raw.erase(std::unique(raw.begin(), raw.end()), raw.end());

  KnowledgeBase kb;

  // Intern terms in (text, kind) order and relations in name order.
  std::vector<Value> values;
  std::vector<std::string> relation_names;
  values.reserve(raw.size() * 2);
  for (const auto &t : raw) {
    values.push_back({TermKind::kEntity, t.subject});
    values.push_back({t.object_kind, t.object});
    relation_names.push_back(t.relation);
  }
  auto by_text = [](const Value &a, const Value &b) {
    return std::tie(a.text, a.kind) < std::tie(b.text, b.kind);
  };
  std::sort(values.begin(), values.end(), by_text);
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::sort(relation_names.begin(), relation_names.end());
  relation_names.erase(std::unique(relation_names.begin(), relation_names.end()),
                       relation_names.end());

  kb.terms_ = std::move(values);
  std::unordered_map<std::string, TermId> term_index;
  term_index.reserve(kb.terms_.size());
  for (TermId i = 0; i < kb.terms_.size(); ++i) {
    term_index.emplace(TermKey(kb.terms_[i].kind, kb.terms_[i].text), i);
    if (kb.terms_[i].is_entity()) kb.entities_.push_back(i);
  }
  for (RelationId i = 0; i < relation_names.size(); ++i) {
    kb.relation_index_.emplace(relation_names[i], i);
    kb.relations_.push_back({relation_names[i], RelationTokens(relation_names[i])});
  }

  kb.triples_.reserve(raw.size());
  for (const auto &t : raw) {
    kb.triples_.push_back(
        {term_index.at(TermKey(TermKind::kEntity, t.subject)),
         kb.relation_index_.at(t.relation),
         term_index.at(TermKey(t.object_kind, t.object))});
  }
  std::sort(kb.triples_.begin(), kb.triples_.end());

  const size_t n = kb.terms_.size();
  kb.out_.reserve(kb.triples_.size());
  for (const auto &t : kb.triples_) kb.out_.push_back({t.relation, t.object});
  kb.out_offsets_ = Offsets(kb.triples_, n, [](const Triple &t) { return t.subject; });

  std::vector<Triple> by_object = kb.triples_;
  std::sort(by_object.begin(), by_object.end(), [](const Triple &a, const Triple &b) {
    return std::tie(a.object, a.relation, a.subject) <
           std::tie(b.object, b.relation, b.subject);
  });
  kb.in_.reserve(by_object.size());
  for (const auto &t : by_object) kb.in_.push_back({t.relation, t.subject});
  kb.in_offsets_ = Offsets(by_object, n, [](const Triple &t) { return t.object; });

  kb.by_relation_ = kb.triples_;
  std::sort(kb.by_relation_.begin(), kb.by_relation_.end(),
            [](const Triple &a, const Triple &b) {
              return std::tie(a.relation, a.subject, a.object) <
                     std::tie(b.relation, b.subject, b.object);
            });
  kb.relation_offsets_ = Offsets(kb.by_relation_, kb.relations_.size(),
                                 [](const Triple &t) { return t.relation; });
  return kb;
}

void KnowledgeBase::Save(std::ostream &out) const {
  std::vector<RawTriple> raw;
  raw.reserve(triples_.size());
  for (const auto &t : triples_) {
    raw.push_back({terms_[t.subject].text, relations_[t.relation].name,
                   terms_[t.object].text, terms_[t.object].kind});
  }
  std::sort(raw.begin(), raw.end());
  for (const auto &t : raw) {
    out << t.subject << '\t' << t.relation << '\t' << t.object;
    if (t.object_kind != TermKind::kEntity) out << '\t' << TermKindName(t.object_kind);
    out << '\n';
  }
}

void KnowledgeBase::Save(const std::filesystem::path &path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kUnavailable, "cannot write " + path.string());
  Save(out);
}

std::optional<TermId> KnowledgeBase::FindEntity(std::string_view name) const {
  return FindTerm(TermKind::kEntity, name);
}

std::optional<TermId> KnowledgeBase::FindTerm(TermKind kind,
                                              std::string_view text) const {
  Value probe{kind, std::string(text)};
  auto it = std::lower_bound(terms_.begin(), terms_.end(), probe,
                             [](const Value &a, const Value &b) {
                               return std::tie(a.text, a.kind) <
                                      std::tie(b.text, b.kind);
                             });
  if (it == terms_.end() || it->text != text || it->kind != kind) {
    return std::nullopt;
  }
  return static_cast<TermId>(it - terms_.begin());
}

std::optional<RelationId> KnowledgeBase::FindRelation(std::string_view name) const {
  auto it = relation_index_.find(std::string(name));
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}

std::span<const Adjacent> KnowledgeBase::Out(TermId term) const {
  if (term >= terms_.size()) return {};
  return std::span<const Adjacent>(out_).subspan(
      out_offsets_[term], out_offsets_[term + 1] - out_offsets_[term]);
}

std::span<const Adjacent> KnowledgeBase::In(TermId term) const {
  if (term >= terms_.size()) return {};
  return std::span<const Adjacent>(in_).subspan(
      in_offsets_[term], in_offsets_[term + 1] - in_offsets_[term]);
}

namespace {

std::span<const Adjacent> RelationSlice(std::span<const Adjacent> all,
                                        RelationId relation) {
  auto lo = std::lower_bound(all.begin(), all.end(), relation,
                             [](const Adjacent &a, RelationId r) {
                               return a.relation < r;
                             });
  auto hi = std::upper_bound(lo, all.end(), relation,
                             [](RelationId r, const Adjacent &a) {
                               return r < a.relation;
                             });
  return all.subspan(lo - all.begin(), hi - lo);
}

}  // namespace

std::span<const Adjacent> KnowledgeBase::Objects(TermId subject,
                                                 RelationId relation) const {
  return RelationSlice(Out(subject), relation);
}

std::span<const Adjacent> KnowledgeBase::Subjects(TermId object,
                                                  RelationId relation) const {
  return RelationSlice(In(object), relation);
}

std::span<const Triple> KnowledgeBase::WithRelation(RelationId relation) const {
  if (relation >= relations_.size()) return {};
  return std::span<const Triple>(by_relation_)
      .subspan(relation_offsets_[relation],
               relation_offsets_[relation + 1] - relation_offsets_[relation]);
}

std::vector<Edge> KnowledgeBase::Neighborhood(TermId term,
                                              Direction direction) const {
  std::vector<Edge> edges;
  if (term >= terms_.size()) return edges;
  if (direction != Direction::kIn) {
    for (const auto &a : Out(term)) edges.push_back({a.relation, a.neighbor, Direction::kOut});
  }
  if (direction != Direction::kOut) {
    for (const auto &a : In(term)) edges.push_back({a.relation, a.neighbor, Direction::kIn});
  }
  if (direction == Direction::kBoth) {
    std::stable_sort(edges.begin(), edges.end(), [](const Edge &a, const Edge &b) {
      return std::tie(a.relation, a.neighbor) < std::tie(b.relation, b.neighbor);
    });
  }
  return edges;
}

std::vector<Edge> KnowledgeBase::Neighborhood(std::string_view entity,
                                              Direction direction) const {
  auto id = FindEntity(entity);
  if (!id) return {};
  return Neighborhood(*id, direction);
}

bool KnowledgeBase::HasEdge(TermId term, RelationId relation,
                            Direction direction) const {
  if (direction != Direction::kIn && !Objects(term, relation).empty()) return true;
  if (direction != Direction::kOut && !Subjects(term, relation).empty()) return true;
  return false;
}

bool KnowledgeBase::HasTriple(TermId subject, RelationId relation,
                              TermId object) const {
  auto slice = Objects(subject, relation);
  return std::binary_search(slice.begin(), slice.end(), Adjacent{relation, object});
}

}  // namespace casebase
