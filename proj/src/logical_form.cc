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

#include "casebase/logical_form.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <deque>
#include <map>
#include <tuple>
#include <unordered_map>

#include "casebase/error.h"
#include "casebase/text.h"

namespace casebase {
namespace {

bool IsVariableChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool IsNameStop(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == '{' || c == '}' ||
         c == '(' || c == ')' || c == '"' || c == ',';
}

bool IsValidVariable(std::string_view v) {
  if (v.size() < 2 || v[0] != '?') return false;
  return std::all_of(v.begin() + 1, v.end(), IsVariableChar);
}

bool IsValidName(std::string_view name) {
  if (name.empty() || name[0] == '?' || name[0] == '"' || name.back() == '.') {
    return false;
  }
  return std::none_of(name.begin(), name.end(), IsNameStop);
}

bool IsNumeric(std::string_view s) {
  if (s.empty()) return false;
  size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  bool digit = false, dot = false;
  for (; i < s.size(); ++i) {
    if (std::isdigit(static_cast<unsigned char>(s[i]))) {
      digit = true;
    } else if (s[i] == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  return digit;
}

bool EqualsIgnoreCase(std::string_view a, std::string_view b) {
  return a.size() == b.size() && ToLower(a) == ToLower(b);
}

std::string_view StripNs(std::string_view name) {
  if (name.size() > 3 && name.substr(0, 3) == "ns:") return name.substr(3);
  return name;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  LogicalForm Parse() {
    LogicalForm lf;
    SkipWs();
    while (PeekKeyword("PREFIX")) {
      ReadWord();
      SkipWs();
      ReadName();  // prefix label, e.g. "ns:"
      SkipWs();
      Expect('<');
      while (pos_ < s_.size() && s_[pos_] != '>') ++pos_;
      Expect('>');
      SkipWs();
    }
    ExpectKeyword("SELECT");
    SkipWs();
    if (PeekKeyword("DISTINCT")) {
      ReadWord();
      SkipWs();
    }
    size_t select_pos = pos_;
    lf.select_var = ReadVariable();
    SkipWs();
    if (PeekKeyword("WHERE")) ReadWord();
    SkipWs();
    size_t body_pos = pos_;
    Expect('{');
    while (true) {
      SkipWs();
      if (AtEnd()) Fail("unterminated WHERE block");
      char c = s_[pos_];
      if (c == '}') {
        ++pos_;
        break;
      }
      if (c == '.') {
        ++pos_;
        continue;
      }
      if (PeekKeyword("FILTER")) {
        ReadWord();
        SkipWs();
        SkipBalancedParens();
        continue;
      }
      lf.patterns.push_back(ParsePattern());
    }
    if (lf.patterns.empty()) {
      throw ParseError(body_pos, "empty WHERE block");
    }
    SkipWs();
    size_t order_pos = pos_;
    if (PeekKeyword("ORDER")) {
      ReadWord();
      SkipWs();
      ExpectKeyword("BY");
      SkipWs();
      OrderLimit ol;
      ParseOrderExpr(&ol);
      SkipWs();
      if (!PeekKeyword("LIMIT")) {
        throw ParseError(pos_, "unsupported construct: ORDER BY without LIMIT");
      }
      ReadWord();
      SkipWs();
      ol.limit = ReadPositiveInteger();
      lf.order_limit = ol;
    } else if (PeekKeyword("LIMIT")) {
      throw ParseError(pos_, "unsupported construct: LIMIT without ORDER BY");
    }
    SkipWs();
    if (!AtEnd()) Fail("unexpected trailing input");

    auto vars = VariablesOf(lf);
    auto used = [&](const std::string &v) {
      for (const auto &p : lf.patterns) {
        if (p.subject.is_variable() && p.subject.text == v) return true;
        if (p.object.is_variable() && p.object.text == v) return true;
      }
      return false;
    };
    if (!used(lf.select_var)) {
      throw ParseError(select_pos, "select variable " + lf.select_var +
                                       " does not occur in any pattern");
    }
    if (lf.order_limit && !used(lf.order_limit->variable)) {
      throw ParseError(order_pos, "sort variable " + lf.order_limit->variable +
                                      " does not occur in any pattern");
    }
    return lf;
  }

 private:
  [[noreturn]] void Fail(const std::string &message) {
    throw ParseError(pos_, message);
  }

  bool AtEnd() const { return pos_ >= s_.size(); }

  void SkipWs() {
    while (!AtEnd() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  void Expect(char c) {
    if (AtEnd() || s_[pos_] != c) Fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  // Letters, digits, ':' and '_'.
  std::string_view PeekWordView() const {
    size_t i = pos_;
    while (i < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[i])) || s_[i] == ':' ||
            s_[i] == '_')) {
      ++i;
    }
    return s_.substr(pos_, i - pos_);
  }

  bool PeekKeyword(std::string_view keyword) const {
    return EqualsIgnoreCase(PeekWordView(), keyword);
  }

  std::string_view ReadWord() {
    auto w = PeekWordView();
    pos_ += w.size();
    return w;
  }

  void ExpectKeyword(std::string_view keyword) {
    if (!PeekKeyword(keyword)) Fail("expected " + std::string(keyword));
    ReadWord();
  }

  std::string ReadVariable() {
    if (AtEnd() || s_[pos_] != '?') Fail("expected variable");
    size_t start = pos_++;
    while (!AtEnd() && IsVariableChar(s_[pos_])) ++pos_;
    if (pos_ - start < 2) throw ParseError(start, "empty variable name");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string_view ReadName() {
    size_t start = pos_;
    while (!AtEnd() && !IsNameStop(s_[pos_])) ++pos_;
    // A trailing '.' is the pattern separator, not part of the name.
    while (pos_ > start + 1 && s_[pos_ - 1] == '.') --pos_;
    if (pos_ == start) Fail("expected a name");
    return s_.substr(start, pos_ - start);
  }

  int64_t ReadPositiveInteger() {
    size_t start = pos_;
    while (!AtEnd() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    int64_t value = 0;
    auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, value);
    if (start == pos_ || ec != std::errc() || value <= 0) {
      throw ParseError(start, "LIMIT must be a positive integer");
    }
    return value;
  }

  void SkipBalancedParens() {
    size_t start = pos_;
    Expect('(');
    int depth = 1;
    while (depth > 0) {
      if (AtEnd()) throw ParseError(start, "unbalanced parentheses in FILTER");
      char c = s_[pos_++];
      if (c == '"') {
        while (!AtEnd() && s_[pos_] != '"') {
          if (s_[pos_] == '\\') ++pos_;
          ++pos_;
        }
        if (AtEnd()) throw ParseError(start, "unterminated string in FILTER");
        ++pos_;
      } else if (c == '(') {
        ++depth;
      } else if (c == ')') {
        --depth;
      }
    }
  }

  LfTerm ParseLiteral() {
    size_t start = pos_;
    Expect('"');
    std::string text;
    while (true) {
      if (AtEnd()) throw ParseError(start, "unterminated string literal");
      char c = s_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (AtEnd()) throw ParseError(start, "unterminated string literal");
        text.push_back(s_[pos_++]);
      } else {
        text.push_back(c);
      }
    }
    TermKind kind = TermKind::kPlain;
    if (s_.substr(pos_, 2) == "^^") {
      pos_ += 2;
      size_t type_pos = pos_;
      std::string type = ToLower(ReadName());
      if (type.find("date") != std::string::npos) {
        kind = TermKind::kDate;
      } else if (type.find("int") != std::string::npos ||
                 type.find("decimal") != std::string::npos ||
                 type.find("double") != std::string::npos ||
                 type.find("float") != std::string::npos ||
                 type.find("long") != std::string::npos) {
        kind = TermKind::kNumber;
      } else if (type.find("string") != std::string::npos) {
        kind = TermKind::kPlain;
      } else {
        throw ParseError(type_pos, "unknown literal datatype " + type);
      }
    } else if (!AtEnd() && s_[pos_] == '@') {
      ++pos_;
      while (!AtEnd() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                          s_[pos_] == '-')) {
        ++pos_;
      }
    }
    return LfTerm::Literal(std::move(text), kind);
  }

  LfTerm ParseNode() {
    SkipWs();
    if (AtEnd()) Fail("expected a term");
    if (s_[pos_] == '?') return LfTerm::Variable(ReadVariable());
    if (s_[pos_] == '"') return ParseLiteral();
    size_t start = pos_;
    std::string_view name = ReadName();
    if (IsNumeric(name)) return LfTerm::Literal(std::string(name), TermKind::kNumber);
    name = StripNs(name);
    if (name.empty() || name.front() == '<') {
      throw ParseError(start, "unsupported term");
    }
    return LfTerm::Entity(std::string(name));
  }

  TriplePattern ParsePattern() {
    TriplePattern p;
    p.subject = ParseNode();
    if (p.subject.kind == LfTerm::Kind::kLiteral) {
      Fail("literal in subject position");
    }
    SkipWs();
    if (AtEnd()) Fail("expected relation");
    if (s_[pos_] == '?') {
      Fail("unsupported construct: relation variables are not allowed");
    }
    size_t rel_pos = pos_;
    std::string_view rel = StripNs(ReadName());
    if (RelationTokens(rel).empty() || !IsValidName(rel)) {
      throw ParseError(rel_pos, "invalid relation name");
    }
    p.relation = std::string(rel);
    p.object = ParseNode();
    return p;
  }

  void ParseOrderExpr(OrderLimit *ol) {
    if ((PeekKeyword("ASC") || PeekKeyword("DESC"))) {
      size_t save = pos_;
      bool desc = PeekKeyword("DESC");
      ReadWord();
      SkipWs();
      if (!AtEnd() && s_[pos_] == '(') {
        ++pos_;
        SkipWs();
        ParseOrderExpr(ol);
        ol->descending = desc;
        SkipWs();
        Expect(')');
        return;
      }
      pos_ = save;
      Fail("expected '(' after ASC/DESC");
    }
    if (PeekKeyword("xsd:datetime")) {
      ReadWord();
      SkipWs();
      Expect('(');
      SkipWs();
      ol->variable = ReadVariable();
      ol->datetime_cast = true;
      SkipWs();
      Expect(')');
      return;
    }
    ol->variable = ReadVariable();
  }

  std::string_view s_;
  size_t pos_ = 0;
};

std::string EscapeLiteral(const std::string &text) {
  std::string out;
  for (char c : text) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string PrintTerm(const LfTerm &t) {
  switch (t.kind) {
    case LfTerm::Kind::kVariable:
      return t.text;
    case LfTerm::Kind::kEntity:
      return "ns:" + t.text;
    case LfTerm::Kind::kLiteral: {
      std::string out = "\"" + EscapeLiteral(t.text) + "\"";
      if (t.literal_kind == TermKind::kDate) out += "^^xsd:dateTime";
      if (t.literal_kind == TermKind::kNumber) out += "^^xsd:decimal";
      return out;
    }
  }
  return t.text;
}

}  // namespace

LogicalForm ParseLogicalForm(std::string_view text) {
  return Parser(text).Parse();
}

std::string PrintLogicalForm(const LogicalForm &lf) {
  std::string out = "SELECT DISTINCT " + lf.select_var + " WHERE { ";
  for (const auto &p : lf.patterns) {
    out += PrintTerm(p.subject);
    out += " ns:" + p.relation + " ";
    out += PrintTerm(p.object);
    out += " . ";
  }
  out += "}";
  if (lf.order_limit) {
    const auto &ol = *lf.order_limit;
    std::string expr = ol.datetime_cast ? "xsd:datetime(" + ol.variable + ")" : ol.variable;
    if (ol.descending) expr = "DESC(" + expr + ")";
    out += " ORDER BY " + expr + " LIMIT " + std::to_string(ol.limit);
  }
  return out;
}

void ValidateLogicalForm(const LogicalForm &lf) {
  auto fail = [](const std::string &m) { throw Error(ErrorCode::kInvalidArgument, m); };
  if (!IsValidVariable(lf.select_var)) fail("invalid select variable");
  if (lf.patterns.empty()) fail("logical form has no patterns");
  bool select_used = false, sort_used = false;
  for (const auto &p : lf.patterns) {
    if (p.subject.kind == LfTerm::Kind::kLiteral) fail("literal subject");
    if (RelationTokens(p.relation).empty() || !IsValidName(p.relation)) {
      fail("invalid relation '" + p.relation + "'");
    }
    for (const LfTerm *t : {&p.subject, &p.object}) {
      if (t->is_variable()) {
        if (!IsValidVariable(t->text)) fail("invalid variable '" + t->text + "'");
        select_used |= t->text == lf.select_var;
        if (lf.order_limit) sort_used |= t->text == lf.order_limit->variable;
      } else if (t->is_entity() && !IsValidName(t->text)) {
        fail("invalid entity id '" + t->text + "'");
      }
    }
  }
  if (!select_used) fail("select variable does not occur in any pattern");
  if (lf.order_limit) {
    if (!sort_used) fail("sort variable does not occur in any pattern");
    if (lf.order_limit->limit <= 0) fail("LIMIT must be positive");
  }
}

std::set<std::string> RelationsOf(const LogicalForm &lf) {
  std::set<std::string> out;
  for (const auto &p : lf.patterns) out.insert(p.relation);
  return out;
}

std::vector<std::string> AnchorsOf(const LogicalForm &lf) {
  std::vector<std::string> out;
  for (const auto &p : lf.patterns) {
    for (const LfTerm *t : {&p.subject, &p.object}) {
      if (t->is_entity() && std::find(out.begin(), out.end(), t->text) == out.end()) {
        out.push_back(t->text);
      }
    }
  }
  return out;
}

std::vector<std::string> VariablesOf(const LogicalForm &lf) {
  std::vector<std::string> out{lf.select_var};
  auto add = [&](const std::string &v) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  };
  for (const auto &p : lf.patterns) {
    if (p.subject.is_variable()) add(p.subject.text);
    if (p.object.is_variable()) add(p.object.text);
  }
  if (lf.order_limit) add(lf.order_limit->variable);
  return out;
}

std::vector<int> PatternDepths(const LogicalForm &lf) {
  const size_t n = lf.patterns.size();
  std::vector<int> depth(n, -1);
  std::deque<size_t> queue;
  for (size_t i = 0; i < n; ++i) {
    if (lf.patterns[i].subject.is_entity() || lf.patterns[i].object.is_entity()) {
      depth[i] = 0;
      queue.push_back(i);
    }
  }
  auto shares_variable = [&](size_t a, size_t b) {
    const auto &pa = lf.patterns[a];
    const auto &pb = lf.patterns[b];
    for (const LfTerm *x : {&pa.subject, &pa.object}) {
      if (!x->is_variable()) continue;
      for (const LfTerm *y : {&pb.subject, &pb.object}) {
        if (y->is_variable() && x->text == y->text) return true;
      }
    }
    return false;
  };
  while (!queue.empty()) {
    size_t i = queue.front();
    queue.pop_front();
    for (size_t j = 0; j < n; ++j) {
      if (depth[j] < 0 && shares_variable(i, j)) {
        depth[j] = depth[i] + 1;
        queue.push_back(j);
      }
    }
  }
  return depth;
}

std::string CanonicalVariableName(int index) {
  static const char *kNames[] = {"?x", "?y", "?z", "?w", "?u"};
  if (index < 5) return kNames[index];
  return "?v" + std::to_string(index);
}

Skeleton SkeletonOf(const LogicalForm &lf) {
  Skeleton sk;
  auto vars = VariablesOf(lf);
  auto anchors = AnchorsOf(lf);
  sk.num_variables = static_cast<int>(vars.size());
  sk.num_anchors = static_cast<int>(anchors.size());
  auto index_of = [](const std::vector<std::string> &list, const std::string &x) {
    return static_cast<int>(std::find(list.begin(), list.end(), x) - list.begin());
  };
  auto convert = [&](const LfTerm &t) {
    Skeleton::Term out;
    switch (t.kind) {
      case LfTerm::Kind::kVariable:
        out.kind = Skeleton::Term::Kind::kVariable;
        out.index = index_of(vars, t.text);
        break;
      case LfTerm::Kind::kEntity:
        out.kind = Skeleton::Term::Kind::kAnchor;
        out.index = index_of(anchors, t.text);
        break;
      case LfTerm::Kind::kLiteral:
        out.kind = Skeleton::Term::Kind::kLiteral;
        out.literal = t.text;
        out.literal_kind = t.literal_kind;
        break;
    }
    return out;
  };
  auto depths = PatternDepths(lf);
  auto term_key = [](const Skeleton::Term &t) -> std::string {
    switch (t.kind) {
      case Skeleton::Term::Kind::kVariable: return "?" + std::to_string(t.index);
      case Skeleton::Term::Kind::kAnchor: return "$" + std::to_string(t.index);
      case Skeleton::Term::Kind::kLiteral:
        return "\"" + EscapeLiteral(t.literal) + "\"^" +
               std::string(TermKindName(t.literal_kind));
    }
    return "";
  };
  std::string key = "?0 {";
  for (size_t i = 0; i < lf.patterns.size(); ++i) {
    Skeleton::Pattern p{convert(lf.patterns[i].subject),
                        convert(lf.patterns[i].object), depths[i]};
    key += " " + term_key(p.subject) + " <" + std::to_string(i) + "> " +
           term_key(p.object) + " .";
    sk.patterns.push_back(std::move(p));
  }
  key += " }";
  if (lf.order_limit) {
    OrderLimit ol = *lf.order_limit;
    ol.variable = CanonicalVariableName(index_of(vars, ol.variable));
    key += std::string(" order ") + (ol.descending ? "desc " : "asc ") +
           (ol.datetime_cast ? "datetime " : "") + ol.variable + " " +
           std::to_string(ol.limit);
    sk.order_limit = ol;
  }
  sk.key = std::move(key);
  return sk;
}

LogicalForm Skeleton::Instantiate(std::span<const std::string> relations,
                                  std::span<const std::string> anchors) const {
  if (relations.size() != patterns.size() ||
      anchors.size() != static_cast<size_t>(num_anchors)) {
    throw Error(ErrorCode::kInvalidArgument,
                "skeleton instantiation arity mismatch");
  }
  auto convert = [&](const Term &t) {
    switch (t.kind) {
      case Term::Kind::kVariable: return LfTerm::Variable(CanonicalVariableName(t.index));
      case Term::Kind::kAnchor: return LfTerm::Entity(anchors[t.index]);
      case Term::Kind::kLiteral: return LfTerm::Literal(t.literal, t.literal_kind);
    }
    return LfTerm{};
  };
  LogicalForm lf;
  lf.select_var = CanonicalVariableName(0);
  for (size_t i = 0; i < patterns.size(); ++i) {
    lf.patterns.push_back(
        {convert(patterns[i].subject), relations[i], convert(patterns[i].object)});
  }
  lf.order_limit = order_limit;
  return lf;
}

// ---------------------------------------------------------------------------
// Execution.

namespace {

struct CompiledTerm {
  bool is_variable = false;
  int variable = -1;
  TermId id = 0;
};

struct CompiledPattern {
  CompiledTerm subject;
  RelationId relation = 0;
  CompiledTerm object;
};

class Executor {
 public:
  Executor(const KnowledgeBase &kb, std::vector<CompiledPattern> patterns,
           size_t num_variables)
      : kb_(kb),
        patterns_(std::move(patterns)),
        bound_(num_variables, false),
        binding_(num_variables, 0),
        done_(patterns_.size(), false) {}

  template <typename Leaf>
  void Run(Leaf &&leaf) {
    Search(0, leaf);
  }

  const std::vector<TermId> &binding() const { return binding_; }

 private:
  bool IsBound(const CompiledTerm &t) const {
    return !t.is_variable || bound_[t.variable];
  }
  TermId Value(const CompiledTerm &t) const {
    return t.is_variable ? binding_[t.variable] : t.id;
  }

  // Binds t to v if free; returns whether the binding is consistent and
  // whether this call created it.
  bool Bind(const CompiledTerm &t, TermId v, bool *created) {
    *created = false;
    if (!t.is_variable) return t.id == v;
    if (bound_[t.variable]) return binding_[t.variable] == v;
    bound_[t.variable] = true;
    binding_[t.variable] = v;
    *created = true;
    return true;
  }

  void Unbind(const CompiledTerm &t, bool created) {
    if (created) bound_[t.variable] = false;
  }

  template <typename Leaf>
  void Search(size_t depth, Leaf &leaf) {
    if (depth == patterns_.size()) {
      leaf();
      return;
    }
    // Most constrained first: fewest unbound positions, then lowest index.
    size_t best = patterns_.size();
    int best_free = 3;
    for (size_t i = 0; i < patterns_.size(); ++i) {
      if (done_[i]) continue;
      int free = !IsBound(patterns_[i].subject) + !IsBound(patterns_[i].object);
      if (free < best_free) {
        best_free = free;
        best = i;
      }
    }
    const CompiledPattern &p = patterns_[best];
    done_[best] = true;
    auto visit = [&](TermId s, TermId o) {
      bool cs = false, co = false;
      if (Bind(p.subject, s, &cs)) {
        if (Bind(p.object, o, &co)) Search(depth + 1, leaf);
        Unbind(p.object, co);
      }
      Unbind(p.subject, cs);
    };
    if (IsBound(p.subject)) {
      TermId s = Value(p.subject);
      if (IsBound(p.object)) {
        if (kb_.HasTriple(s, p.relation, Value(p.object))) Search(depth + 1, leaf);
      } else {
        for (const auto &a : kb_.Objects(s, p.relation)) visit(s, a.neighbor);
      }
    } else if (IsBound(p.object)) {
      TermId o = Value(p.object);
      for (const auto &a : kb_.Subjects(o, p.relation)) visit(a.neighbor, o);
    } else {
      for (const auto &t : kb_.WithRelation(p.relation)) visit(t.subject, t.object);
    }
    done_[best] = false;
  }

  const KnowledgeBase &kb_;
  std::vector<CompiledPattern> patterns_;
  std::vector<bool> bound_;
  std::vector<TermId> binding_;
  std::vector<bool> done_;
};

}  // namespace

AnswerSet Execute(const LogicalForm &lf, const KnowledgeBase &kb) {
  auto vars = VariablesOf(lf);
  auto var_index = [&](const std::string &v) {
    return static_cast<int>(std::find(vars.begin(), vars.end(), v) - vars.begin());
  };
  std::vector<CompiledPattern> compiled;
  for (const auto &p : lf.patterns) {
    CompiledPattern cp;
    auto rel = kb.FindRelation(p.relation);
    if (!rel) return {};
    cp.relation = *rel;
    for (auto [src, dst] : {std::pair{&p.subject, &cp.subject},
                            std::pair{&p.object, &cp.object}}) {
      if (src->is_variable()) {
        dst->is_variable = true;
        dst->variable = var_index(src->text);
      } else {
        auto id = src->is_entity() ? kb.FindEntity(src->text)
                                   : kb.FindTerm(src->literal_kind, src->text);
        if (!id) return {};
        dst->id = *id;
      }
    }
    compiled.push_back(cp);
  }

  Executor exec(kb, std::move(compiled), vars.size());
  AnswerSet answers;
  if (!lf.order_limit) {
    exec.Run([&] { answers.insert(kb.TermValue(exec.binding()[0])); });
    return answers;
  }

  std::vector<std::vector<TermId>> rows;
  exec.Run([&] { rows.push_back(exec.binding()); });
  if (rows.empty()) return answers;
  const OrderLimit &ol = *lf.order_limit;
  const int sort_var = var_index(ol.variable);
  const TermKind kind = kb.Kind(rows[0][sort_var]);
  for (const auto &row : rows) {
    if (kb.Kind(row[sort_var]) != kind) {
      throw Error(ErrorCode::kUnorderable,
                  "unorderable: ORDER BY variable " + ol.variable +
                      " binds values of different kinds");
    }
  }
  // Numbers compare numerically; every other kind compares by name, which
  // matches id order within a kind. Equal keys fall back to the full binding
  // tuple so truncation is deterministic.
  std::unordered_map<TermId, double> numbers;
  if (kind == TermKind::kNumber) {
    for (const auto &row : rows) {
      numbers[row[sort_var]] = std::strtod(kb.TermName(row[sort_var]).c_str(), nullptr);
    }
  }
  auto key_less = [&](TermId a, TermId b) {
    if (kind == TermKind::kNumber) return numbers[a] < numbers[b];
    return a < b;
  };
  std::sort(rows.begin(), rows.end(), [&](const auto &a, const auto &b) {
    TermId ka = a[sort_var], kb_ = b[sort_var];
    if (key_less(ka, kb_)) return !ol.descending;
    if (key_less(kb_, ka)) return ol.descending;
    return a < b;
  });
  const size_t keep = std::min<size_t>(rows.size(), static_cast<size_t>(ol.limit));
  for (size_t i = 0; i < keep; ++i) answers.insert(kb.TermValue(rows[i][0]));
  return answers;
}

}  // namespace casebase
