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

#ifndef CASEBASE_JSON_IO_H_
#define CASEBASE_JSON_IO_H_

#include "casebase/entity_linker.h"
#include "casebase/kb.h"
#include "json.hpp"

namespace casebase {

// {"span": [begin, end], "entity": id, "surface": text, "source": "gold"}
void to_json(nlohmann::json &j, const Mention &m);
// "surface" and "source" are optional; the surface defaults to the spanned
// text once the caller has checked the span.
void from_json(const nlohmann::json &j, Mention &m);

// Entities are bare strings; literals are {"literal": text, "type": kind}.
nlohmann::json ValueToJson(const Value &v);
Value ValueFromJson(const nlohmann::json &j);
nlohmann::json AnswersToJson(const AnswerSet &answers);
AnswerSet AnswersFromJson(const nlohmann::json &j);

// Fills empty surfaces and checks spans against the question. Throws
// Error(kInvalidArgument).
void CheckMentions(std::string_view question, std::vector<Mention> &mentions);

}  // namespace casebase

#endif  // CASEBASE_JSON_IO_H_
