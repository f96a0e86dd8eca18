#include "spo/types.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace spo {

std::string_view pos_name(Pos pos) {
  switch (pos) {
    case Pos::kNoun:
      return "NOUN";
    case Pos::kVerb:
      return "VERB";
    case Pos::kAdj:
      return "ADJ";
    case Pos::kAdv:
      return "ADV";
    case Pos::kOther:
      return "OTHER";
  }
  return "OTHER";
}

std::optional<Pos> parse_pos(std::string_view name) {
  if (name == "NOUN") return Pos::kNoun;
  if (name == "VERB") return Pos::kVerb;
  if (name == "ADJ") return Pos::kAdj;
  if (name == "ADV") return Pos::kAdv;
  if (name == "OTHER") return Pos::kOther;
  return std::nullopt;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

bool is_punctuation(std::string_view text) {
  if (text.empty()) return false;
  return std::all_of(text.begin(), text.end(), [](unsigned char c) {
    return c < 0x80 && std::ispunct(c);
  });
}

Token Token::from_surface(std::string surface) {
  Token token;
  token.norm = to_lower(surface);
  token.surface = std::move(surface);
  return token;
}

std::string Document::text() const { return detokenize(tokens); }

namespace {

bool is_punct_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u);
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) {
    if (is_punctuation(word)) {
      tokens.push_back(Token::from_surface(word));
      continue;
    }
    std::size_t begin = 0;
    while (is_punct_byte(word[begin])) ++begin;
    std::size_t end = word.size();
    while (is_punct_byte(word[end - 1])) --end;
    if (begin > 0) tokens.push_back(Token::from_surface(word.substr(0, begin)));
    tokens.push_back(Token::from_surface(word.substr(begin, end - begin)));
    if (end < word.size()) {
      tokens.push_back(Token::from_surface(word.substr(end)));
    }
  }
  return tokens;
}

std::string detokenize(std::span<const Token> tokens) {
  std::string out;
  for (const Token& token : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += token.surface;
  }
  return out;
}

Document make_document(std::string_view text, int gold_label, std::string id) {
  Document doc;
  doc.tokens = tokenize(text);
  doc.gold_label = gold_label;
  doc.id = std::move(id);
  return doc;
}

bool LabelDistribution::is_valid() const {
  if (probs.empty()) return false;
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) return false;  // also rejects NaN
    sum += p;
  }
  return std::abs(sum - 1.0) <= 1e-6;
}

int argmax_label(const LabelDistribution& dist) {
  int best = 0;
  for (std::size_t k = 1; k < dist.probs.size(); ++k) {
    if (dist.probs[k] > dist.probs[best]) best = static_cast<int>(k);
  }
  return best;
}

namespace {

struct MethodEntry {
  Method method;
  std::string_view name;
};

constexpr MethodEntry kMethods[] = {
    {Method::kUSpo, "u-spo"},     {Method::kHuSpo, "hu-spo"},
    {Method::kBuSpo, "bu-spo"},   {Method::kBuSpof, "bu-spof"},
    {Method::kStatic, "static"},  {Method::kRand, "rand"},
    {Method::kWsa, "wsa"},
};

}  // namespace

std::string_view method_name(Method method) {
  for (const auto& entry : kMethods) {
    if (entry.method == method) return entry.name;
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (const auto& entry : kMethods) {
    if (entry.name == name) return entry.method;
  }
  return std::nullopt;
}

void AttackConfig::validate() const {
  if (max_replacements < 1) {
    throw std::invalid_argument("max_replacements must be >= 1");
  }
  if (mode.targeted() && *mode.target_label < 0) {
    throw std::invalid_argument("target label must be non-negative");
  }
}

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> kStopwords = {
      "a",     "an",   "and",  "are",   "as",   "at",    "be",   "been",
      "but",   "by",   "for",  "from",  "had",  "has",   "have", "he",
      "her",   "his",  "i",    "if",    "in",   "into",  "is",   "it",
      "its",   "me",   "my",   "of",    "on",   "or",    "our",  "she",
      "so",    "than", "that", "the",   "their", "them", "then", "there",
      "these", "they", "this", "those", "to",   "was",   "we",   "were",
      "what",  "when", "which", "who",  "will", "with",  "you",  "your",
  };
  return kStopwords;
}

FormatError::FormatError(std::string file, std::size_t line,
                         const std::string& what)
    : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
      file_(std::move(file)),
      line_(line) {}

std::vector<Document> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(path, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("text") ||
        !obj.contains("label") || !obj["id"].is_string() ||
        !obj["text"].is_string() || !obj["label"].is_number_integer()) {
      throw FormatError(path, line_no,
                        "expected {\"id\": string, \"text\": string, "
                        "\"label\": integer}");
    }
    const int label = obj["label"].get<int>();
    if (label < 0) throw FormatError(path, line_no, "negative label");
    Document doc = make_document(obj["text"].get<std::string>(), label,
                                 obj["id"].get<std::string>());
    if (doc.tokens.empty()) throw FormatError(path, line_no, "empty text");
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace spo
