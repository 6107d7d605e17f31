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

#include "casebase/json_io.h"

#include "casebase/error.h"

namespace casebase {

void to_json(nlohmann::json &j, const Mention &m) {
  j = nlohmann::json{{"span", {m.begin, m.end}},
                     {"entity", m.entity},
                     {"surface", m.surface},
                     {"source", m.source == MentionSource::kGold ? "gold" : "linked"}};
}

void from_json(const nlohmann::json &j, Mention &m) {
  const auto &span = j.at("span");
  if (!span.is_array() || span.size() != 2) {
    throw Error(ErrorCode::kInvalidArgument, "mention span must be [begin, end]");
  }
  m.begin = span[0].get<size_t>();
  m.end = span[1].get<size_t>();
  m.entity = j.at("entity").get<std::string>();
  m.surface = j.value("surface", std::string());
  std::string source = j.value("source", std::string("gold"));
  if (source != "gold" && source != "linked") {
    throw Error(ErrorCode::kInvalidArgument, "unknown mention source " + source);
  }
  m.source = source == "gold" ? MentionSource::kGold : MentionSource::kLinked;
}

nlohmann::json ValueToJson(const Value &v) {
  if (v.is_entity()) return v.text;
  return {{"literal", v.text}, {"type", std::string(TermKindName(v.kind))}};
}

Value ValueFromJson(const nlohmann::json &j) {
  if (j.is_string()) return {TermKind::kEntity, j.get<std::string>()};
  std::string type = j.at("type").get<std::string>();
  auto kind = ParseLiteralKind(type);
  if (!kind) throw Error(ErrorCode::kInvalidArgument, "unknown literal type " + type);
  return {*kind, j.at("literal").get<std::string>()};
}

nlohmann::json AnswersToJson(const AnswerSet &answers) {
  nlohmann::json out = nlohmann::json::array();
  for (const Value &v : answers) out.push_back(ValueToJson(v));
  return out;
}

AnswerSet AnswersFromJson(const nlohmann::json &j) {
  AnswerSet out;
  for (const auto &v : j) out.insert(ValueFromJson(v));
  return out;
}

void CheckMentions(std::string_view question, std::vector<Mention> &mentions) {
  for (Mention &m : mentions) {
    if (m.begin >= m.end || m.end > question.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "mention span [" + std::to_string(m.begin) + ", " +
                      std::to_string(m.end) + ") is outside the question");
    }
    if (m.entity.empty()) throw Error(ErrorCode::kInvalidArgument, "mention without entity");
    if (m.surface.empty()) m.surface = std::string(question.substr(m.begin, m.end - m.begin));
  }
}

}  // namespace casebase
