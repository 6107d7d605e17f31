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

#include "casebase/text.h"

#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <unordered_set>

namespace casebase {
namespace {

bool IsWordByte(unsigned char c) {
  return std::isalnum(c) || c >= 0x80;
}

}  // namespace

std::string ToLower(std::string_view text) {
  std::string out(text);
  for (char &c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

bool IsStopword(std::string_view word) {
  static const std::set<std::string, std::less<>> kStopwords = {
      "a",    "an",   "and",  "are",  "as",    "at",   "by",    "did",  "do",
      "does", "for",  "from", "has",  "have",  "he",   "her",   "his",  "how",
      "in",   "is",   "it",   "its",  "name",  "of",   "on",    "or",   "she",
      "that", "the",  "their", "them", "they", "this", "to",    "was",  "were",
      "what", "when", "where", "which", "who", "whom", "whose", "with"};
  return kStopwords.count(word) > 0;
}

std::vector<Token> Tokenize(std::string_view text) {
  std::vector<Token> tokens;
  size_t i = 0;
  while (i < text.size()) {
    if (!IsWordByte(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    size_t start = i;
    while (i < text.size() && IsWordByte(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    tokens.push_back({ToLower(text.substr(start, i - start)), start, i});
  }
  return tokens;
}

std::vector<std::string> RelationTokens(std::string_view relation) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : relation) {
    if (c == '.' || c == '_') {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

uint64_t Fnv1a(std::string_view data, uint64_t seed) {
  uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

TfIdf::TfIdf(const std::vector<std::vector<std::string>> &documents)
    : num_documents_(documents.size()) {
  for (const auto &doc : documents) {
    std::unordered_set<std::string> seen(doc.begin(), doc.end());
    for (const auto &t : seen) ++df_[t];
  }
}

double TfIdf::Idf(const std::string &token) const {
  auto it = df_.find(token);
  int df = it == df_.end() ? 0 : it->second;
  return std::log((1.0 + num_documents_) / (1.0 + df)) + 1.0;
}

double TfIdf::Cosine(std::span<const std::string> a,
                     std::span<const std::string> b) const {
  auto weigh = [this](std::span<const std::string> bag) {
    std::map<std::string, double> v;
    for (const auto &t : bag) {
      v[t] += 1.0;
    }
    for (auto &[t, w] : v) w *= Idf(t);
    return v;
  };
  auto va = weigh(a);
  auto vb = weigh(b);
  double dot = 0, na = 0, nb = 0;
  for (const auto &[t, w] : va) {
    na += w * w;
    auto it = vb.find(t);
    if (it != vb.end()) dot += w * it->second;
  }
  for (const auto &[t, w] : vb) nb += w * w;
  if (na == 0 || nb == 0) return 0.0;
  return dot / std::sqrt(na * nb);
}

}  // namespace casebase
