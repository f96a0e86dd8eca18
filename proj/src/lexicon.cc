#include "spo/lexicon.h"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

namespace spo {

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(text.substr(start));
      return parts;
    }
    parts.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

// "new_york" -> "new york". Rejects empty pieces and phrases longer than two
// tokens.
std::optional<std::string> phrase_from_field(std::string_view field) {
  const auto pieces = split(field, '_');
  if (pieces.empty() || pieces.size() > 2) return std::nullopt;
  std::string phrase;
  for (const auto& piece : pieces) {
    if (piece.empty() || piece.find(' ') != std::string::npos) {
      return std::nullopt;
    }
    if (!phrase.empty()) phrase.push_back(' ');
    phrase += to_lower(piece);
  }
  return phrase;
}

// Calls fn(fields, line_no) for every non-blank, non-comment line.
template <typename Fn>
void for_each_tsv_line(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open resource file: " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    fn(split(line, '\t'), line_no);
  }
}

struct SuffixRule {
  std::string_view suffix;
  Pos pos;
};

constexpr SuffixRule kSuffixRules[] = {
    {"ly", Pos::kAdv},     {"ing", Pos::kVerb},  {"ed", Pos::kVerb},
    {"ness", Pos::kNoun},  {"tion", Pos::kNoun}, {"ment", Pos::kNoun},
    {"ity", Pos::kNoun},   {"ous", Pos::kAdj},   {"ful", Pos::kAdj},
    {"able", Pos::kAdj},   {"ive", Pos::kAdj},
};

// Picks the best surface from accumulated totals: highest count, then
// smallest surface.
std::vector<std::string> rank_by_count(
    const std::map<std::string, std::uint64_t>& totals) {
  std::vector<std::pair<std::string, std::uint64_t>> items(totals.begin(),
                                                           totals.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  std::vector<std::string> ranking;
  ranking.reserve(items.size());
  for (auto& item : items) ranking.push_back(std::move(item.first));
  return ranking;
}

std::optional<std::string> first_except(
    const std::vector<std::string>& ranking,
    const std::optional<std::string>& exclude) {
  for (const auto& surface : ranking) {
    if (!exclude || surface != *exclude) return surface;
  }
  return std::nullopt;
}

}  // namespace

void SynonymSpace::add(const std::string& phrase, std::optional<Pos> pos,
                       const std::vector<std::string>& candidates) {
  auto& bucket = entries_[phrase][pos];
  for (const auto& candidate : candidates) {
    if (candidate != phrase) bucket.insert(candidate);
  }
}

std::set<std::string> SynonymSpace::lookup(const std::string& phrase) const {
  std::set<std::string> out;
  const auto it = entries_.find(phrase);
  if (it == entries_.end()) return out;
  for (const auto& [pos, candidates] : it->second) {
    out.insert(candidates.begin(), candidates.end());
  }
  return out;
}

std::set<std::string> SynonymSpace::lookup(const std::string& phrase,
                                           Pos pos) const {
  std::set<std::string> out;
  const auto it = entries_.find(phrase);
  if (it == entries_.end()) return out;
  for (const auto& key : {std::optional<Pos>(pos), std::optional<Pos>()}) {
    const auto bucket = it->second.find(key);
    if (bucket != it->second.end()) {
      out.insert(bucket->second.begin(), bucket->second.end());
    }
  }
  return out;
}

std::size_t SynonymSpace::size() const {
  std::size_t n = 0;
  for (const auto& [phrase, by_pos] : entries_) n += by_pos.size();
  return n;
}

void SememeSpace::add(const std::string& word,
                      const std::vector<std::string>& sememes) {
  auto& tags = forward_[word];
  for (const auto& sememe : sememes) {
    tags.insert(sememe);
    inverted_[sememe].insert(word);
  }
}

const std::set<std::string>& SememeSpace::sememes_of(
    const std::string& word) const {
  static const std::set<std::string> kEmpty;
  const auto it = forward_.find(word);
  return it == forward_.end() ? kEmpty : it->second;
}

const std::set<std::string>& SememeSpace::words_with(
    const std::string& sememe) const {
  static const std::set<std::string> kEmpty;
  const auto it = inverted_.find(sememe);
  return it == inverted_.end() ? kEmpty : it->second;
}

std::set<std::string> SememeSpace::related(const std::string& word) const {
  std::set<std::string> out;
  for (const auto& sememe : sememes_of(word)) {
    const auto& words = words_with(sememe);
    out.insert(words.begin(), words.end());
  }
  out.erase(word);
  return out;
}

NeTable::NeTable(const NeTable& other)
    : records_(other.records_),
      keys_(other.keys_),
      types_by_surface_(other.types_by_surface_) {}

NeTable& NeTable::operator=(const NeTable& other) {
  if (this != &other) {
    records_ = other.records_;
    keys_ = other.keys_;
    types_by_surface_ = other.types_by_surface_;
    std::lock_guard<std::mutex> lock(cache_mu_);
    comp_cache_.clear();
  }
  return *this;
}

void NeTable::add(NeRecord record) {
  if (!keys_.emplace(record.surface, record.ne_type, record.class_id).second) {
    throw std::invalid_argument("duplicate NE row: " + record.surface + "/" +
                                record.ne_type + "/" +
                                std::to_string(record.class_id));
  }
  types_by_surface_[record.surface].insert(record.ne_type);
  records_.push_back(std::move(record));
  std::lock_guard<std::mutex> lock(cache_mu_);
  comp_cache_.clear();
}

std::optional<std::string> NeTable::type_of(const std::string& surface) const {
  const auto it = types_by_surface_.find(surface);
  if (it == types_by_surface_.end()) return std::nullopt;
  return *it->second.begin();
}

std::optional<std::string> NeTable::complementary_candidate(
    const std::string& ne_type, int gold_label,
    const std::optional<std::string>& exclude) const {
  std::lock_guard<std::mutex> lock(cache_mu_);
  auto it = comp_cache_.find({ne_type, gold_label});
  if (it == comp_cache_.end()) {
    std::map<std::string, std::uint64_t> totals;
    for (const auto& record : records_) {
      if (record.ne_type == ne_type && record.class_id != gold_label) {
        totals[record.surface] += record.count;
      }
    }
    it = comp_cache_.emplace(std::make_pair(ne_type, gold_label),
                             rank_by_count(totals))
             .first;
  }
  return first_except(it->second, exclude);
}

std::optional<std::string> NeTable::target_candidate(
    const std::string& ne_type, int target_label,
    const std::optional<std::string>& exclude) const {
  std::map<std::string, std::uint64_t> totals;
  for (const auto& record : records_) {
    if (record.ne_type == ne_type && record.class_id == target_label) {
      totals[record.surface] += record.count;
    }
  }
  return first_except(rank_by_count(totals), exclude);
}

void PosLexicon::add(const std::string& word, Pos pos) { entries_[word] = pos; }

Pos PosLexicon::tag(const std::string& word) const {
  const auto it = entries_.find(word);
  if (it != entries_.end()) return it->second;
  if (word.find(' ') != std::string::npos) return Pos::kOther;
  for (const auto& rule : kSuffixRules) {
    // Require a stem of at least two characters so "fed" or "fly" stay OTHER.
    if (word.size() >= rule.suffix.size() + 2 && word.ends_with(rule.suffix)) {
      return rule.pos;
    }
  }
  return Pos::kOther;
}

void Lexicon::annotate(Document& doc) const {
  for (Token& token : doc.tokens) {
    if (is_punctuation(token.surface)) {
      token.pos = Pos::kOther;
      token.ne_type.reset();
      continue;
    }
    token.pos = pos.tag(token.norm);
    token.ne_type = named_entities.type_of(token.norm);
  }
}

SynonymSpace load_synonyms(const std::string& path) {
  SynonymSpace space;
  for_each_tsv_line(path, [&](const std::vector<std::string>& fields,
                              std::size_t line_no) {
    if (fields.size() != 3) {
      throw FormatError(path, line_no, "expected phrase<TAB>pos<TAB>candidates");
    }
    const auto phrase = phrase_from_field(fields[0]);
    if (!phrase) throw FormatError(path, line_no, "bad phrase: " + fields[0]);
    std::optional<Pos> pos;
    if (fields[1] != "*") {
      pos = parse_pos(fields[1]);
      if (!pos || *pos == Pos::kOther) {
        throw FormatError(path, line_no, "bad POS: " + fields[1]);
      }
    }
    std::vector<std::string> candidates;
    for (const auto& raw : split(fields[2], '|')) {
      const auto candidate = phrase_from_field(raw);
      if (!candidate) throw FormatError(path, line_no, "bad candidate: " + raw);
      candidates.push_back(*candidate);
    }
    space.add(*phrase, pos, candidates);
  });
  return space;
}

SememeSpace load_sememes(const std::string& path) {
  SememeSpace space;
  for_each_tsv_line(path, [&](const std::vector<std::string>& fields,
                              std::size_t line_no) {
    if (fields.size() != 2 || fields[0].empty()) {
      throw FormatError(path, line_no, "expected word<TAB>sememes");
    }
    std::vector<std::string> sememes;
    for (const auto& sememe : split(fields[1], '|')) {
      if (sememe.empty()) throw FormatError(path, line_no, "empty sememe");
      sememes.push_back(to_lower(sememe));
    }
    space.add(to_lower(fields[0]), sememes);
  });
  return space;
}

NeTable load_named_entities(const std::string& path) {
  NeTable table;
  for_each_tsv_line(path, [&](const std::vector<std::string>& fields,
                              std::size_t line_no) {
    if (fields.size() != 4 || fields[0].empty() || fields[1].empty()) {
      throw FormatError(path, line_no,
                        "expected surface<TAB>ne_type<TAB>class_id<TAB>count");
    }
    NeRecord record;
    record.surface = to_lower(fields[0]);
    record.ne_type = fields[1];
    std::size_t used = 0;
    try {
      record.class_id = std::stoi(fields[2], &used);
      if (used != fields[2].size() || record.class_id < 0) throw 0;
      if (fields[3].empty() || fields[3][0] == '-') throw 0;
      record.count = std::stoull(fields[3], &used);
      if (used != fields[3].size()) throw 0;
    } catch (...) {
      throw FormatError(path, line_no, "class_id and count must be "
                                       "non-negative integers");
    }
    try {
      table.add(std::move(record));
    } catch (const std::invalid_argument& e) {
      throw FormatError(path, line_no, e.what());
    }
  });
  return table;
}

PosLexicon load_pos_lexicon(const std::string& path) {
  PosLexicon lexicon;
  for_each_tsv_line(path, [&](const std::vector<std::string>& fields,
                              std::size_t line_no) {
    if (fields.size() != 2 || fields[0].empty()) {
      throw FormatError(path, line_no, "expected word<TAB>pos");
    }
    const auto pos = parse_pos(fields[1]);
    if (!pos) throw FormatError(path, line_no, "bad POS: " + fields[1]);
    const auto phrase = phrase_from_field(fields[0]);
    if (!phrase) throw FormatError(path, line_no, "bad word: " + fields[0]);
    lexicon.add(*phrase, *pos);
  });
  return lexicon;
}

Lexicon load_resources(const ResourcePaths& paths) {
  Lexicon lexicon;
  if (!paths.synonyms.empty()) lexicon.synonyms = load_synonyms(paths.synonyms);
  if (!paths.sememes.empty()) lexicon.sememes = load_sememes(paths.sememes);
  if (!paths.named_entities.empty()) {
    lexicon.named_entities = load_named_entities(paths.named_entities);
  }
  if (!paths.pos.empty()) lexicon.pos = load_pos_lexicon(paths.pos);
  return lexicon;
}

std::set<std::string> bigram_candidates(const Lexicon& lexicon,
                                        const Token& current,
                                        const Token& next) {
  return lexicon.synonyms.lookup(current.norm + " " + next.norm);
}

std::set<std::string> unigram_candidates(const Lexicon& lexicon,
                                         const Token& token, int gold_label,
                                         CandidateSources sources,
                                         std::optional<int> target_label) {
  std::set<std::string> out;
  if (sources.synonyms) {
    for (auto& candidate : lexicon.synonyms.lookup(token.norm, token.pos)) {
      if (lexicon.pos.tag(candidate) == token.pos) out.insert(candidate);
    }
  }
  if (sources.sememes) {
    for (auto& candidate : lexicon.sememes.related(token.norm)) {
      if (lexicon.pos.tag(candidate) == token.pos) out.insert(candidate);
    }
  }
  if (sources.named_entities && token.ne_type) {
    const auto entity =
        target_label ? lexicon.named_entities.target_candidate(
                           *token.ne_type, *target_label, token.norm)
                     : lexicon.named_entities.complementary_candidate(
                           *token.ne_type, gold_label, token.norm);
    if (entity) out.insert(*entity);
  }
  out.erase(token.norm);
  return out;
}

std::optional<std::string> ne_target_candidate(const std::string& ne_type,
                                               int target_label,
                                               const NeTable& table) {
  return table.target_candidate(ne_type, target_label);
}

}  // namespace spo
