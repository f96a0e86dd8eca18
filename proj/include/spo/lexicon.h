#ifndef SPO_LEXICON_H_
#define SPO_LEXICON_H_

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "spo/types.h"

namespace spo {

// Phrase-level synonym space. Keys and candidates are lowercase phrases of
// one or two tokens joined by a single space. Each entry is keyed either by
// a specific POS or by the wildcard.
class SynonymSpace {
 public:
  // Merges into any existing entry. Candidates equal to `phrase` are dropped.
  void add(const std::string& phrase, std::optional<Pos> pos,
           const std::vector<std::string>& candidates);

  // Union over every POS key, including the wildcard.
  std::set<std::string> lookup(const std::string& phrase) const;
  // Entries keyed by `pos` plus wildcard entries.
  std::set<std::string> lookup(const std::string& phrase, Pos pos) const;

  std::size_t size() const;  // number of (phrase, pos) keys

 private:
  // Wildcard entries are stored under std::nullopt.
  std::map<std::string, std::map<std::optional<Pos>, std::set<std::string>>>
      entries_;
};

class SememeSpace {
 public:
  void add(const std::string& word, const std::vector<std::string>& sememes);

  const std::set<std::string>& sememes_of(const std::string& word) const;
  const std::set<std::string>& words_with(const std::string& sememe) const;
  // Words sharing at least one sememe with `word`, excluding `word`.
  std::set<std::string> related(const std::string& word) const;

  std::size_t size() const { return forward_.size(); }

 private:
  std::map<std::string, std::set<std::string>> forward_;
  std::map<std::string, std::set<std::string>> inverted_;
};

struct NeRecord {
  std::string surface;
  std::string ne_type;
  int class_id = 0;
  std::uint64_t count = 0;
};

// Named-entity frequency table, also used as the NE recognition dictionary.
// Surfaces are single lowercase tokens.
class NeTable {
 public:
  NeTable() = default;
  NeTable(const NeTable& other);
  NeTable& operator=(const NeTable& other);

  // Throws std::invalid_argument on a duplicate (surface, type, class) row.
  void add(NeRecord record);

  // NE type for a surface; lexicographically smallest when ambiguous.
  std::optional<std::string> type_of(const std::string& surface) const;

  // Surface of `ne_type` with the highest count summed over all classes
  // other than `gold_label`. Ties go to the smallest surface. `exclude` is
  // skipped (callers pass the word being replaced).
  std::optional<std::string> complementary_candidate(
      const std::string& ne_type, int gold_label,
      const std::optional<std::string>& exclude = std::nullopt) const;

  // Surface with the highest count for (ne_type, target_label).
  std::optional<std::string> target_candidate(
      const std::string& ne_type, int target_label,
      const std::optional<std::string>& exclude = std::nullopt) const;

  const std::vector<NeRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

 private:
  using Ranking = std::vector<std::string>;

  std::vector<NeRecord> records_;
  std::set<std::tuple<std::string, std::string, int>> keys_;
  std::map<std::string, std::set<std::string>> types_by_surface_;

  mutable std::mutex cache_mu_;
  mutable std::map<std::pair<std::string, int>, Ranking> comp_cache_;
};

class PosLexicon {
 public:
  void add(const std::string& word, Pos pos);

  // Dictionary entry if present, otherwise the built-in suffix rules,
  // otherwise OTHER.
  Pos tag(const std::string& word) const;

  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, Pos> entries_;
};

struct ResourcePaths {
  std::string synonyms;  // empty path means "no resource"
  std::string sememes;
  std::string named_entities;
  std::string pos;
};

struct Lexicon {
  SynonymSpace synonyms;
  SememeSpace sememes;
  NeTable named_entities;
  PosLexicon pos;

  // Fills pos and ne_type on every token. Punctuation stays OTHER.
  void annotate(Document& doc) const;
};

SynonymSpace load_synonyms(const std::string& path);
SememeSpace load_sememes(const std::string& path);
NeTable load_named_entities(const std::string& path);
PosLexicon load_pos_lexicon(const std::string& path);
// Throws FormatError (file + line) on malformed lines, std::runtime_error
// on IO failure.
Lexicon load_resources(const ResourcePaths& paths);

// The phrase-level synonyms of "w_i w_next". Bigram candidates carry no POS
// filter.
std::set<std::string> bigram_candidates(const Lexicon& lexicon,
                                        const Token& current,
                                        const Token& next);

struct CandidateSources {
  bool synonyms = true;
  bool sememes = true;
  bool named_entities = true;
};

// Same-POS synonyms and sememe neighbours of `token`, plus one named entity
// of the same type when the token is an NE: the most frequent surface from
// the complementary classes, or from `target_label` when one is given.
std::set<std::string> unigram_candidates(
    const Lexicon& lexicon, const Token& token, int gold_label,
    CandidateSources sources = {},
    std::optional<int> target_label = std::nullopt);

std::optional<std::string> ne_target_candidate(const std::string& ne_type,
                                               int target_label,
                                               const NeTable& table);

}  // namespace spo

#endif  // SPO_LEXICON_H_
