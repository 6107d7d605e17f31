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

#ifndef CASEBASE_TEXT_H_
#define CASEBASE_TEXT_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace casebase {

// A lowercased word with its byte span [begin, end) in the source text.
struct Token {
  std::string text;
  size_t begin = 0;
  size_t end = 0;
};

// Splits on anything that is not an ASCII letter or digit. Bytes >= 0x80 are
// kept inside words so UTF-8 names stay intact.
std::vector<Token> Tokenize(std::string_view text);

// Lowercase tokens of a dotted relation name, split on '.' and '_'.
std::vector<std::string> RelationTokens(std::string_view relation);

std::string ToLower(std::string_view text);

// Function words that carry no relation signal (lowercase input).
bool IsStopword(std::string_view word);

// 64-bit FNV-1a. Stable across platforms, unlike std::hash.
uint64_t Fnv1a(std::string_view data, uint64_t seed = 14695981039346656037ULL);

// Smoothed tf-idf weighting over a fixed document collection. Tokens absent
// from the collection get the maximum idf.
class TfIdf {
 public:
  TfIdf() = default;
  explicit TfIdf(const std::vector<std::vector<std::string>> &documents);

  double Idf(const std::string &token) const;
  bool Contains(const std::string &token) const {
    return df_.count(token) > 0;
  }
  double Cosine(std::span<const std::string> a,
                std::span<const std::string> b) const;

 private:
  std::unordered_map<std::string, int> df_;
  size_t num_documents_ = 0;
};

}  // namespace casebase

#endif  // CASEBASE_TEXT_H_
