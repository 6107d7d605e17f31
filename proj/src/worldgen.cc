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

#include "casebase/worldgen.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "casebase/error.h"
#include "casebase/text.h"

namespace casebase {
namespace {

using nlohmann::json;

RelationSchema Rel(std::string name, std::string domain, std::string range, FanoutMode mode,
                   double coverage, int min_fanout, int max_fanout,
                   std::vector<std::string> questions, std::string phrase,
                   std::string object_clause, std::string subject_clause,
                   std::string synonym = "", std::string date_noun = "") {
  RelationSchema r;
  r.name = std::move(name);
  r.domain = std::move(domain);
  r.range = std::move(range);
  r.mode = mode;
  r.coverage = coverage;
  r.min_fanout = min_fanout;
  r.max_fanout = max_fanout;
  r.questions = std::move(questions);
  r.phrase = std::move(phrase);
  r.object_clause = std::move(object_clause);
  r.subject_clause = std::move(subject_clause);
  r.synonym = std::move(synonym);
  r.date_noun = std::move(date_noun);
  return r;
}

const std::vector<std::string> kFirstNames = {
    "Ada",    "Bruno",  "Celia",   "Dmitri", "Elena",  "Farid",   "Greta",  "Hector",
    "Ines",   "Jonas",  "Keiko",   "Lionel", "Marta",  "Nikolai", "Odette", "Pavel",
    "Quentin", "Rosa",  "Soren",   "Tamsin", "Ulric",  "Vera",    "Wendell", "Ximena",
    "Yusuf",  "Zelda",  "Anouk",   "Basil",  "Cosima", "Dorian",  "Esme",   "Florian",
    "Giselle", "Hugo",  "Isolde",  "Jasper", "Katya",  "Leander", "Mirela", "Nestor",
    "Ophelia", "Piers", "Renata",  "Silas",  "Thea",   "Ugo",     "Viggo",  "Wilma",
    "Yara",   "Zoltan", "Amara",   "Bastian", "Clio",  "Desmond", "Eliska", "Fabian"};
const std::vector<std::string> kLastNames = {
    "Abernathy", "Belcourt",  "Castellan", "Draxler",  "Eriksen",  "Falconer", "Galloway",
    "Halvorsen", "Ibarra",    "Jankowski", "Kessler",  "Lindqvist", "Marchetti", "Novak",
    "Okafor",    "Petrakis",  "Quimby",    "Rasmussen", "Sandoval", "Thorne",   "Umberto",
    "Vasquez",   "Whitlock",  "Xavier",    "Yamada",   "Zeller",   "Ashdown",  "Brannigan",
    "Corvin",    "Delacroix", "Ellery",    "Fontaine", "Grimaldi", "Hargreave", "Ivanova",
    "Jourdan",   "Kowalczyk", "Lazaro",    "Montague", "Nakamura", "Oyelaran", "Pemberton",
    "Quaresma",  "Rosenthal", "Strand",    "Tiberi",   "Ulloa",    "Valdivia", "Wexford",
    "Yardley"};
const std::vector<std::string> kSyllables = {
    "ka", "lo", "ri", "ven", "dor", "mar", "sel", "tan", "bri", "mon", "var", "el",
    "ost", "quin", "zar", "len", "pa", "shi", "gor", "fal", "nu", "ter", "vis", "ash",
    "or", "lin", "dra", "ce", "hol", "mir", "bel", "cor", "dun", "ith", "ra", "vo"};
const std::vector<std::string> kAdjectives = {
    "Silent",  "Crimson", "Hollow", "Golden", "Distant", "Broken", "Hidden", "Velvet",
    "Frozen",  "Burning", "Quiet",  "Wild",   "Iron",    "Paper",  "Glass",  "Midnight",
    "Scarlet", "Lonely",  "Bright", "Restless", "Secret", "Endless", "Amber", "Sunken"};
const std::vector<std::string> kNouns = {
    "Harbor", "Garden", "Mirror", "Empire", "Lantern", "River",  "Orchard", "Tide",
    "Kingdom", "Compass", "Echo",  "Horizon", "Meadow", "Voyage", "Summit", "Canyon",
    "Frontier", "Citadel", "Tempest", "Labyrinth", "Carnival", "Mosaic", "Comet", "Pilgrim"};
const std::vector<std::string> kProfessions = {
    "architect", "economist", "surgeon",   "cartographer", "botanist",   "linguist",
    "sculptor",  "novelist",  "chemist",   "astronomer",   "diplomat",   "pianist",
    "journalist", "engineer", "historian", "photographer", "geologist",  "violinist",
    "philosopher", "mathematician", "nurse", "pharmacist",  "choreographer", "poet",
    "zoologist", "physicist", "barrister", "illustrator", "archaeologist", "composer"};
const std::vector<std::string> kGenres = {
    "drama",  "comedy", "thriller", "western", "musical", "documentary", "horror",
    "romance", "mystery", "fantasy", "animation", "satire", "noir", "adventure",
    "melodrama", "biopic", "slapstick", "science fiction", "war epic", "sitcom"};
const std::vector<std::string> kCurrencyUnits = {"peso", "dollar", "franc", "crown",
                                                 "mark", "dinar", "lira", "rand"};

}  // namespace

WorldConfig DefaultWorldConfig(uint64_t seed, int n_entities) {
  WorldConfig c;
  c.seed = seed;
  c.n_entities = n_entities;
  c.types = {{"person", 0.42, "person"},        {"city", 0.08, "city"},
             {"country", 0.04, "country"},      {"language", 0.03, "language"},
             {"profession", 0.03, "profession"}, {"religion", 0.015, "religion"},
             {"school", 0.04, "school"},        {"text", 0.03, "text"},
             {"film", 0.15, "film"},            {"genre", 0.015, "genre"},
             {"tv_program", 0.07, "tv program"}, {"organization", 0.06, "organization"},
             {"currency", 0.03, "currency"}};
  const auto S = FanoutMode::kBySubject;
  const auto O = FanoutMode::kByObject;
  const auto G = FanoutMode::kSymmetricGroups;
  c.relations = {
      Rel("people.person.sibling_s", "person", "person", G, 0.5, 2, 3,
          {"who is the sibling of {E}?", "who are {E}'s siblings?",
           "name a brother or sister of {E}."},
          "the sibling of {X}", "is a sibling of {E}", "",
          "fictional_universe.fictional_character.sibling_s"),
      Rel("people.person.spouse_s", "person", "person", G, 0.4, 2, 2,
          {"who is the spouse of {E}?", "who is {E} married to?", "who is {E}'s spouse?"},
          "the spouse of {X}", "is the spouse of {E}", ""),
      Rel("people.person.place_of_birth", "person", "city", S, 0.9, 1, 1,
          {"what is the place of birth of {E}?", "where was {E} born?",
           "in which city was {E} born?"},
          "the place of birth of {X}", "is the place of birth of {E}",
          "has place of birth {E}", "people.person.birthplace"),
      Rel("people.person.nationality", "person", "country", S, 0.9, 1, 1,
          {"what is the nationality of {E}?", "which country is {E} a citizen of?",
           "what is {E}'s nationality?"},
          "the nationality of {X}", "is the nationality of {E}", "has nationality {E}"),
      Rel("people.person.profession", "person", "profession", S, 0.9, 1, 2,
          {"what is the profession of {E}?", "what does {E} do for a living?",
           "what is {E}'s profession?"},
          "the profession of {X}", "", "has profession {E}"),
      Rel("people.person.religion", "person", "religion", S, 0.5, 1, 1,
          {"what is the religion of {E}?", "which faith does {E} follow?",
           "what is {E}'s religion?"},
          "the religion of {X}", "", "follows religion {E}"),
      Rel("people.person.education", "person", "school", S, 0.5, 1, 2,
          {"where did {E} receive an education?", "which school did {E} attend?",
           "what institution is part of {E}'s education?"},
          "", "", "got an education at {E}"),
      Rel("people.person.languages", "person", "language", S, 0.7, 1, 2,
          {"what languages does {E} speak?", "which language does {E} know?",
           "what are the languages of {E}?"},
          "the languages of {X}", "is a language spoken by {E}", "speaks the language {E}"),
      Rel("people.person.date_of_birth", "person", "date", S, 0.9, 1, 1,
          {"what is the date of birth of {E}?", "when was {E} born?",
           "what is {E}'s birth date?"},
          "", "", "", "", "date of birth"),
      Rel("location.location.containedby", "city", "country", S, 1.0, 1, 1,
          {"which location contains {E}?", "in which country is {E}?",
           "what location is {E} in?"},
          "the country containing {X}", "", "is located in {E}"),
      Rel("location.country.languages_spoken", "country", "language", S, 1.0, 1, 3,
          {"what languages are spoken in {E}?", "what language do people in {E} speak?",
           "which languages are spoken by the people of {E}?"},
          "the languages spoken in {X}", "is a spoken language in {E}",
          "has spoken language {E}", "location.country.official_language"),
      Rel("location.country.capital", "country", "city", S, 1.0, 1, 1,
          {"what is the capital of {E}?", "which city is the capital of {E}?",
           "name the capital city of {E}."},
          "the capital of {X}", "is the capital of {E}", "has capital {E}"),
      Rel("location.country.currency_used", "country", "currency", S, 1.0, 1, 1,
          {"what currency is used in {E}?", "what is the currency of {E}?",
           "which currency do they use in {E}?"},
          "the currency used in {X}", "is the currency used in {E}", "uses currency {E}"),
      Rel("finance.currency.currency_code", "currency", "plain", S, 1.0, 1, 1,
          {"what is the currency code of {E}?", "what is the code for {E}?",
           "what is {E}'s currency code?"},
          "", "", ""),
      Rel("religion.religion.notable_figures", "religion", "person", S, 1.0, 1, 3,
          {"who are the notable figures of {E}?", "who is a notable figure in {E}?",
           "name a famous figure of {E}."},
          "the notable figures of {X}", "is a notable figure of {E}", "",
          "religion.religion.deities"),
      Rel("religion.religion.texts", "religion", "text", S, 1.0, 1, 2,
          {"what are the religious texts of {E}?", "which text is sacred in {E}?",
           "what are the holy texts of {E}?"},
          "the religious texts of {X}", "is a religious text of {E}", ""),
      Rel("film.director.film", "person", "film", O, 1.0, 1, 1,
          {"what films did {E} direct?", "which film has director {E}?",
           "what are the films of director {E}?"},
          "the films directed by {X}", "was made by director {E}", ""),
      Rel("film.actor.film", "person", "film", O, 1.0, 1, 3,
          {"what films did {E} act in?", "which films feature actor {E}?",
           "what movies has {E} acted in?"},
          "the films of actor {X}", "features actor {E}", ""),
      Rel("film.film.genre", "film", "genre", S, 1.0, 1, 2,
          {"what is the genre of {E}?", "what kind of film is {E}?",
           "which genre does {E} belong to?"},
          "the genre of {X}", "", "has genre {E}"),
      Rel("film.film.release_date", "film", "date", S, 1.0, 1, 1,
          {"when was {E} released?", "what is the release date of {E}?",
           "when did {E} come out?"},
          "", "", "", "", "release date"),
      Rel("film.film.country", "film", "country", S, 1.0, 1, 1,
          {"what country is {E} from?", "which country produced the film {E}?",
           "what is the country of the film {E}?"},
          "the country of {X}", "", "is from country {E}"),
      Rel("tv.tv_actor.starring_roles", "person", "tv_program", O, 1.0, 1, 3,
          {"what tv programs did {E} star in?", "which shows has {E} had starring roles in?",
           "in what tv series did {E} star?"},
          "the tv programs starring {X}", "has {E} in a starring role", "",
          "tv.tv_character.appeared_in_tv_program"),
      Rel("tv.tv_program.genre", "tv_program", "genre", S, 1.0, 1, 1,
          {"what genre is the tv program {E}?", "what kind of show is {E}?",
           "which genre does the program {E} have?"},
          "the genre of the program {X}", "", "has tv genre {E}"),
      Rel("tv.tv_program.air_date_of_first_episode", "tv_program", "date", S, 1.0, 1, 1,
          {"when did {E} first air?", "what is the air date of the first episode of {E}?",
           "when was the first episode of {E} aired?"},
          "", "", "", "", "first air date"),
      Rel("organization.organization.founders", "organization", "person", S, 1.0, 1, 2,
          {"who founded {E}?", "who are the founders of {E}?", "who is the founder of {E}?"},
          "the founders of {X}", "is a founder of {E}", "",
          "organization.organization.founded_by"),
      Rel("organization.organization.headquarters", "organization", "city", S, 1.0, 1, 1,
          {"where are the headquarters of {E}?", "in which city is {E} headquartered?",
           "where is {E} based?"},
          "the headquarters of {X}", "is the headquarters of {E}", "has headquarters in {E}"),
  };
  return c;
}

const RelationSchema *World::Schema(std::string_view relation) const {
  for (const auto &r : config.relations) {
    if (r.name == relation) return &r;
  }
  return nullptr;
}

namespace {

bool IsLiteralRange(const std::string &range) { return range == "date" || range == "plain"; }

class WorldBuilder {
 public:
  explicit WorldBuilder(const WorldConfig &config) : config_(config), rng_(config.seed) {}

  World Build() {
    Validate();
    CollectTemplateWords();
    MakeEntities();
    for (const auto &schema : config_.relations) MakeEdges(schema);
    EnsureParticipation();
    MakeAliases();
    World world;
    world.config = config_;
    std::vector<RawTriple> full = triples_;
    for (const auto &schema : config_.relations) {
      if (!schema.synonym.empty()) AddSynonym(schema, full, world);
    }
    std::vector<RawTriple> incomplete = DropEdges(full, world);
    world.full = KnowledgeBase::FromTriples(full);
    world.incomplete = KnowledgeBase::FromTriples(std::move(incomplete));
    world.aliases = aliases_;
    for (const auto &e : entities_) world.entities.emplace(e.id, e);
    return world;
  }

 private:
  void Validate() {
    if (config_.n_entities <= 0) {
      throw Error(ErrorCode::kInvalidArgument, "n_entities must be positive");
    }
    if (config_.relations.empty() || config_.types.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "world needs types and relations");
    }
    if (config_.n_question_templates <= 0) {
      throw Error(ErrorCode::kInvalidArgument, "n_question_templates must be positive");
    }
    if (!(config_.drop_edge_rate >= 0 && config_.drop_edge_rate < 1)) {
      throw Error(ErrorCode::kInvalidArgument, "drop_edge_rate must lie in [0, 1)");
    }
    // Type counts: floor of the shares, remainder to the largest type.
    double total_share = 0;
    size_t largest = 0;
    for (size_t i = 0; i < config_.types.size(); ++i) {
      total_share += config_.types[i].share;
      if (config_.types[i].share > config_.types[largest].share) largest = i;
    }
    int assigned = 0;
    for (const auto &t : config_.types) {
      int n = static_cast<int>(std::floor(t.share / total_share * config_.n_entities));
      counts_[t.name] = n;
      assigned += n;
    }
    counts_[config_.types[largest].name] += config_.n_entities - assigned;
    for (const auto &r : config_.relations) {
      std::vector<std::string> needed = {r.domain};
      if (!IsLiteralRange(r.range)) needed.push_back(r.range);
      for (const std::string &type : needed) {
        if (counts_[type] <= 0) {
          throw Error(ErrorCode::kInvalidArgument,
                      "infeasible schema: relation " + r.name + " needs type " + type +
                          " which has no entities");
        }
      }
      if (r.min_fanout < 1 || r.max_fanout < r.min_fanout) {
        throw Error(ErrorCode::kInvalidArgument, "bad fan-out for " + r.name);
      }
    }
  }

  void CollectTemplateWords() {
    auto add = [this](const std::string &s) {
      for (const Token &t : Tokenize(s)) {
        if (!IsStopword(t.text)) template_words_.insert(t.text);
      }
    };
    for (const auto &r : config_.relations) {
      for (const auto &q : r.questions) add(q);
      add(r.phrase);
      add(r.object_clause);
      add(r.subject_clause);
      add(r.date_noun);
    }
    for (const auto &t : config_.types) add(t.noun);
    for (const char *w : {"earliest", "latest", "e", "x"}) {
      template_words_.insert(w);
    }
  }

  std::string Word(int min_syllables, int max_syllables) {
    int n = min_syllables + static_cast<int>(rng_() % (max_syllables - min_syllables + 1));
    std::string w;
    for (int i = 0; i < n; ++i) w += kSyllables[rng_() % kSyllables.size()];
    w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    return w;
  }

  template <typename T>
  const T &Pick(const std::vector<T> &v) {
    return v[rng_() % v.size()];
  }

  std::string Candidate(const std::string &type, int attempt) {
    if (type == "person") {
      std::string name = Pick(kFirstNames);
      if (rng_() % 10 < 3) name += " " + Pick(kFirstNames);
      return name + " " + Pick(kLastNames);
    }
    if (type == "city") {
      switch (rng_() % 4) {
        case 0: return "Port " + Word(2, 3);
        case 1: return Word(2, 3) + " Falls";
        default: return Word(2, 3);
      }
    }
    if (type == "country") return Word(2, 3) + (rng_() % 2 ? "ia" : "land");
    if (type == "language") return Word(2, 2) + (rng_() % 2 ? "ese" : "ic");
    if (type == "profession") {
      if (attempt < 20) return Pick(kProfessions);
      return ToLower(Word(2, 2)) + "ist";
    }
    if (type == "religion") return Word(2, 2) + "ism";
    if (type == "school") {
      switch (rng_() % 3) {
        case 0: return Word(2, 3) + " University";
        case 1: return Word(2, 3) + " Institute of Technology";
        default: return Word(2, 3) + " College";
      }
    }
    if (type == "text") {
      return rng_() % 2 ? "The Book of " + Word(2, 3) : "The " + Word(2, 3) + " Scrolls";
    }
    if (type == "film") return "The " + Pick(kAdjectives) + " " + Pick(kNouns);
    if (type == "genre") {
      if (attempt < 20) return Pick(kGenres);
      return ToLower(Word(2, 3)) + " drama";
    }
    if (type == "tv_program") return Pick(kAdjectives) + " " + Pick(kNouns) + " Stories";
    if (type == "organization") {
      static const std::vector<std::string> kinds = {"Industries", "Labs", "Group",
                                                     "Holdings", "Works"};
      return Word(2, 3) + " " + Pick(kinds);
    }
    if (type == "currency") return Word(2, 2) + " " + Pick(kCurrencyUnits);
    return Word(2, 3) + " " + Word(2, 3);
  }

  bool Usable(const std::string &name) {
    if (used_names_.count(ToLower(name))) return false;
    for (const Token &t : Tokenize(name)) {
      if (template_words_.count(t.text)) return false;
    }
    return true;
  }

  std::string NewId() {
    static constexpr char kChars[] = "0123456789bcdfghjklmnpqrstvwxyz_";
    std::string id;
    do {
      id = "m.";
      for (int i = 0; i < 6; ++i) id += kChars[rng_() % (sizeof(kChars) - 1)];
    } while (used_ids_.count(id));
    used_ids_.insert(id);
    return id;
  }

  void MakeEntities() {
    for (const auto &t : config_.types) {
      std::vector<size_t> members;
      for (int i = 0; i < counts_[t.name]; ++i) {
        std::string name;
        for (int attempt = 0;; ++attempt) {
          name = Candidate(t.name, attempt);
          if (Usable(name)) break;
          if (attempt > 1000) {
            name = Candidate(t.name, attempt) + " " + Word(3, 3);
            if (Usable(name)) break;
          }
          if (attempt > 20000) {
            throw Error(ErrorCode::kFailedPrecondition,
                        "cannot find unused names for type " + t.name);
          }
        }
        used_names_.insert(ToLower(name));
        members.push_back(entities_.size());
        entities_.push_back({NewId(), t.name, name, ""});
      }
      // Zipfian popularity over a random rank order.
      std::vector<size_t> ranks(members.size());
      for (size_t i = 0; i < ranks.size(); ++i) ranks[i] = i;
      std::shuffle(ranks.begin(), ranks.end(), rng_);
      std::vector<double> weights(members.size());
      for (size_t i = 0; i < members.size(); ++i) {
        weights[i] = 1.0 / std::pow(static_cast<double>(ranks[i] + 1), config_.zipf_exponent);
      }
      by_type_[t.name] = members;
      popularity_[t.name] = std::discrete_distribution<size_t>(weights.begin(), weights.end());
    }
  }

  size_t SamplePopular(const std::string &type) {
    return by_type_[type][popularity_[type](rng_)];
  }

  std::string Literal(const RelationSchema &schema) {
    auto &used = used_literals_[schema.name];
    for (;;) {
      std::string value;
      if (schema.range == "date") {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", 1900 + static_cast<int>(rng_() % 121),
                      1 + static_cast<int>(rng_() % 12), 1 + static_cast<int>(rng_() % 28));
        value = buf;
      } else {
        for (int i = 0; i < 3; ++i) value += static_cast<char>('A' + rng_() % 26);
      }
      if (used.insert(value).second) return value;
    }
  }

  void AddEdge(const RelationSchema &schema, size_t subject, size_t object) {
    triples_.push_back({entities_[subject].id, schema.name, entities_[object].id,
                        TermKind::kEntity});
    touched_.insert(subject);
    touched_.insert(object);
  }

  void AddLiteralEdge(const RelationSchema &schema, size_t subject) {
    triples_.push_back({entities_[subject].id, schema.name, Literal(schema),
                        schema.range == "date" ? TermKind::kDate : TermKind::kPlain});
    touched_.insert(subject);
  }

  int Fanout(const RelationSchema &schema) {
    return schema.min_fanout +
           static_cast<int>(rng_() % (schema.max_fanout - schema.min_fanout + 1));
  }

  // Draws up to n distinct popular entities of a type, excluding `self`.
  std::vector<size_t> Distinct(const std::string &type, int n, size_t self) {
    std::vector<size_t> out;
    for (int attempt = 0; static_cast<int>(out.size()) < n && attempt < 20 * n; ++attempt) {
      size_t e = SamplePopular(type);
      if (e == self || std::find(out.begin(), out.end(), e) != out.end()) continue;
      out.push_back(e);
    }
    return out;
  }

  void MakeEdges(const RelationSchema &schema) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    switch (schema.mode) {
      case FanoutMode::kBySubject:
        for (size_t s : by_type_[schema.domain]) {
          if (unit(rng_) >= schema.coverage) continue;
          if (IsLiteralRange(schema.range)) {
            AddLiteralEdge(schema, s);
            continue;
          }
          for (size_t o : Distinct(schema.range, Fanout(schema), s)) AddEdge(schema, s, o);
        }
        break;
      case FanoutMode::kByObject:
        for (size_t o : by_type_[schema.range]) {
          if (unit(rng_) >= schema.coverage) continue;
          for (size_t s : Distinct(schema.domain, Fanout(schema), o)) AddEdge(schema, s, o);
        }
        break;
      case FanoutMode::kSymmetricGroups: {
        std::vector<size_t> pool;
        for (size_t e : by_type_[schema.domain]) {
          if (unit(rng_) < schema.coverage && !grouped_[schema.name].count(e)) pool.push_back(e);
        }
        std::shuffle(pool.begin(), pool.end(), rng_);
        size_t i = 0;
        while (i + 1 < pool.size()) {
          size_t size = std::min<size_t>(Fanout(schema), pool.size() - i);
          if (size < 2) break;
          for (size_t a = i; a < i + size; ++a) {
            for (size_t b = i; b < i + size; ++b) {
              if (a != b) AddEdge(schema, pool[a], pool[b]);
            }
            grouped_[schema.name].insert(pool[a]);
          }
          i += size;
        }
        break;
      }
    }
  }

  void EnsureParticipation() {
    for (size_t e = 0; e < entities_.size(); ++e) {
      if (touched_.count(e)) continue;
      const std::string &type = entities_[e].type;
      bool done = false;
      for (const auto &schema : config_.relations) {
        if (schema.domain != type) continue;
        if (schema.mode == FanoutMode::kSymmetricGroups) {
          auto partner = Distinct(type, 1, e);
          if (partner.empty()) continue;
          AddEdge(schema, e, partner[0]);
          AddEdge(schema, partner[0], e);
        } else if (IsLiteralRange(schema.range)) {
          AddLiteralEdge(schema, e);
        } else {
          auto objects = Distinct(schema.range, 1, e);
          if (objects.empty()) continue;
          AddEdge(schema, e, objects[0]);
        }
        done = true;
        break;
      }
      if (done) continue;
      for (const auto &schema : config_.relations) {
        if (schema.range != type) continue;
        auto subjects = Distinct(schema.domain, 1, e);
        if (subjects.empty()) continue;
        AddEdge(schema, subjects[0], e);
        done = true;
        break;
      }
      if (!done) {
        throw Error(ErrorCode::kInvalidArgument,
                    "infeasible schema: no relation can connect an entity of type " + type);
      }
    }
  }

  void MakeAliases() {
    for (const auto &e : entities_) aliases_.Add(e.id, e.name);
    // Shared last names become ambiguous short aliases.
    std::map<std::string, std::vector<size_t>> by_last;
    for (size_t i : by_type_["person"]) {
      const std::string &name = entities_[i].name;
      by_last[name.substr(name.rfind(' ') + 1)].push_back(i);
    }
    std::vector<std::vector<size_t>> groups;
    for (auto &[last, members] : by_last) {
      if (members.size() >= 2 && !used_names_.count(ToLower(last))) groups.push_back(members);
    }
    std::shuffle(groups.begin(), groups.end(), rng_);
    const size_t target =
        static_cast<size_t>(std::lround(config_.ambiguous_alias_rate * config_.n_entities));
    size_t covered = 0;
    for (const auto &members : groups) {
      if (covered >= target) break;
      for (size_t k = 0; k < 2; ++k) {
        EntityInfo &info = entities_[members[k]];
        info.short_alias = info.name.substr(info.name.rfind(' ') + 1);
        aliases_.Add(info.id, info.short_alias);
        ++covered;
      }
    }
  }

  void AddSynonym(const RelationSchema &schema, std::vector<RawTriple> &full, World &world) {
    world.synonyms.push_back({schema.name, schema.synonym});
    std::map<std::string, std::vector<const RawTriple *>> by_head;
    for (const auto &t : triples_) {
      if (t.relation == schema.name) by_head[t.subject].push_back(&t);
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const auto &[head, edges] : by_head) {
      if (unit(rng_) >= config_.synonym_rate) continue;
      copied_heads_.push_back({head, schema.name});
      for (const RawTriple *t : edges) {
        full.push_back({t->subject, schema.synonym, t->object, t->object_kind});
      }
    }
  }

  // Withholds every edge of a (head, relation) group whose head also carries
  // synonym copies, so the answers stay recoverable.
  std::vector<RawTriple> DropEdges(const std::vector<RawTriple> &full, World &) {
    size_t n_drop = static_cast<size_t>(
        std::lround(config_.drop_edge_rate * static_cast<double>(copied_heads_.size())));
    std::vector<std::pair<std::string, std::string>> groups = copied_heads_;
    std::sort(groups.begin(), groups.end());
    std::shuffle(groups.begin(), groups.end(), rng_);
    std::set<std::pair<std::string, std::string>> dropped(groups.begin(),
                                                          groups.begin() + n_drop);
    std::vector<RawTriple> kept;
    for (const auto &t : full) {
      if (!dropped.count({t.subject, t.relation})) kept.push_back(t);
    }
    return kept;
  }

  const WorldConfig &config_;
  std::mt19937_64 rng_;
  std::map<std::string, int> counts_;
  std::unordered_set<std::string> template_words_;
  std::unordered_set<std::string> used_names_;
  std::unordered_set<std::string> used_ids_;
  std::vector<EntityInfo> entities_;
  std::map<std::string, std::vector<size_t>> by_type_;
  std::map<std::string, std::discrete_distribution<size_t>> popularity_;
  std::map<std::string, std::set<std::string>> used_literals_;
  std::map<std::string, std::set<size_t>> grouped_;
  std::vector<RawTriple> triples_;
  std::set<size_t> touched_;
  AliasTable aliases_;
  std::vector<std::pair<std::string, std::string>> copied_heads_;
};

std::string_view FanoutModeName(FanoutMode mode) {
  switch (mode) {
    case FanoutMode::kBySubject: return "by_subject";
    case FanoutMode::kByObject: return "by_object";
    case FanoutMode::kSymmetricGroups: return "symmetric_groups";
  }
  return "by_subject";
}

FanoutMode ParseFanoutMode(const std::string &name) {
  if (name == "by_subject") return FanoutMode::kBySubject;
  if (name == "by_object") return FanoutMode::kByObject;
  if (name == "symmetric_groups") return FanoutMode::kSymmetricGroups;
  throw Error(ErrorCode::kInvalidArgument, "unknown fan-out mode " + name);
}

json ConfigToJson(const WorldConfig &c) {
  json types = json::array();
  for (const auto &t : c.types) types.push_back({{"name", t.name}, {"share", t.share}, {"noun", t.noun}});
  json relations = json::array();
  for (const auto &r : c.relations) {
    relations.push_back({{"name", r.name},
                         {"domain", r.domain},
                         {"range", r.range},
                         {"mode", std::string(FanoutModeName(r.mode))},
                         {"coverage", r.coverage},
                         {"min_fanout", r.min_fanout},
                         {"max_fanout", r.max_fanout},
                         {"questions", r.questions},
                         {"phrase", r.phrase},
                         {"object_clause", r.object_clause},
                         {"subject_clause", r.subject_clause},
                         {"date_noun", r.date_noun},
                         {"synonym", r.synonym}});
  }
  return {{"seed", c.seed},
          {"n_entities", c.n_entities},
          {"n_question_templates", c.n_question_templates},
          {"drop_edge_rate", c.drop_edge_rate},
          {"ambiguous_alias_rate", c.ambiguous_alias_rate},
          {"synonym_rate", c.synonym_rate},
          {"zipf_exponent", c.zipf_exponent},
          {"types", types},
          {"relations", relations}};
}

WorldConfig ConfigFromJson(const json &j) {
  WorldConfig c;
  c.seed = j.at("seed").get<uint64_t>();
  c.n_entities = j.at("n_entities").get<int>();
  c.n_question_templates = j.at("n_question_templates").get<int>();
  c.drop_edge_rate = j.at("drop_edge_rate").get<double>();
  c.ambiguous_alias_rate = j.at("ambiguous_alias_rate").get<double>();
  c.synonym_rate = j.at("synonym_rate").get<double>();
  c.zipf_exponent = j.at("zipf_exponent").get<double>();
  for (const auto &t : j.at("types")) {
    c.types.push_back({t.at("name"), t.at("share"), t.at("noun")});
  }
  for (const auto &r : j.at("relations")) {
    RelationSchema s;
    s.name = r.at("name");
    s.domain = r.at("domain");
    s.range = r.at("range");
    s.mode = ParseFanoutMode(r.at("mode"));
    s.coverage = r.at("coverage");
    s.min_fanout = r.at("min_fanout");
    s.max_fanout = r.at("max_fanout");
    s.questions = r.at("questions").get<std::vector<std::string>>();
    s.phrase = r.at("phrase");
    s.object_clause = r.at("object_clause");
    s.subject_clause = r.at("subject_clause");
    s.date_noun = r.at("date_noun");
    s.synonym = r.at("synonym");
    c.relations.push_back(std::move(s));
  }
  return c;
}

}  // namespace

World GenerateWorld(const WorldConfig &config) { return WorldBuilder(config).Build(); }

void SaveWorld(const World &world, const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  world.full.Save(dir / "kb_full.tsv");
  world.incomplete.Save(dir / "kb.tsv");
  world.aliases.Save(dir / "aliases.tsv");
  std::ofstream entities(dir / "entities.tsv");
  for (const auto &[id, e] : world.entities) {
    entities << id << '\t' << e.type << '\t' << e.name << '\t' << e.short_alias << '\n';
  }
  json synonyms = json::array();
  for (const auto &[r, s] : world.synonyms) synonyms.push_back({r, s});
  std::ofstream meta(dir / "world.json");
  meta << json{{"config", ConfigToJson(world.config)}, {"synonyms", synonyms}}.dump(2) << '\n';
  if (!meta || !entities) throw Error(ErrorCode::kUnavailable, "cannot write world to " + dir.string());
}

World LoadWorld(const std::filesystem::path &dir) {
  World world;
  std::ifstream meta_in(dir / "world.json");
  if (!meta_in) throw Error(ErrorCode::kNotFound, "no world.json in " + dir.string());
  json meta;
  try {
    meta = json::parse(meta_in);
    world.config = ConfigFromJson(meta.at("config"));
    for (const auto &pair : meta.at("synonyms")) {
      world.synonyms.push_back({pair.at(0).get<std::string>(), pair.at(1).get<std::string>()});
    }
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kParse, std::string("bad world.json: ") + e.what());
  }
  world.full = KnowledgeBase::Load(dir / "kb_full.tsv");
  world.incomplete = KnowledgeBase::Load(dir / "kb.tsv");
  world.aliases = AliasTable::Load(dir / "aliases.tsv");
  std::ifstream entities(dir / "entities.tsv");
  std::string line;
  while (std::getline(entities, line)) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() < 3) throw Error(ErrorCode::kParse, "bad entities.tsv line: " + line);
    EntityInfo info{fields[0], fields[1], fields[2], fields.size() > 3 ? fields[3] : ""};
    world.entities.emplace(info.id, info);
  }
  return world;
}

}  // namespace casebase
