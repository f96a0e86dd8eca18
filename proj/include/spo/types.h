#ifndef SPO_TYPES_H_
#define SPO_TYPES_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spo {

// Coarse part-of-speech classes. OTHER is the fallback for anything the
// POS lexicon cannot place.
enum class Pos { kNoun, kVerb, kAdj, kAdv, kOther };

std::string_view pos_name(Pos pos);
// Parses NOUN/VERB/ADJ/ADV/OTHER. Returns nullopt on anything else.
std::optional<Pos> parse_pos(std::string_view name);

struct Token {
  std::string surface;
  std::string norm;  // lowercase(surface)
  Pos pos = Pos::kOther;
  std::optional<std::string> ne_type;

  static Token from_surface(std::string surface);
};

// True when every byte of `text` is ASCII punctuation.
bool is_punctuation(std::string_view text);

std::string to_lower(std::string_view text);

struct Document {
  std::vector<Token> tokens;
  int gold_label = 0;
  std::string id;

  // Tokens joined by single spaces.
  std::string text() const;
};

// Whitespace split, then leading and trailing punctuation runs are peeled
// off into their own tokens. POS is left at OTHER; see Lexicon::annotate.
std::vector<Token> tokenize(std::string_view text);
std::string detokenize(std::span<const Token> tokens);

Document make_document(std::string_view text, int gold_label,
                       std::string id = {});

struct LabelDistribution {
  std::vector<double> probs;

  std::size_t num_labels() const { return probs.size(); }
  double operator[](std::size_t k) const { return probs[k]; }
  // Non-negative entries summing to 1 within 1e-6.
  bool is_valid() const;
};

// Lowest index achieving the maximum probability.
int argmax_label(const LabelDistribution& dist);

enum class Method { kUSpo, kHuSpo, kBuSpo, kBuSpof, kStatic, kRand, kWsa };

std::string_view method_name(Method method);  // "u-spo", "bu-spof", ...
std::optional<Method> parse_method(std::string_view name);

struct AttackMode {
  // nullopt means untargeted.
  std::optional<int> target_label;

  bool targeted() const { return target_label.has_value(); }
  static AttackMode untargeted() { return {}; }
  static AttackMode targeted_at(int label) { return {label}; }
};

struct AttackConfig {
  int max_replacements = 20;
  AttackMode mode;
  Method method = Method::kBuSpo;
  bool stopword_skip = false;
  std::set<std::string> stopwords;  // consulted only when stopword_skip
  std::uint64_t seed = 0;           // RAND baseline only

  // Throws std::invalid_argument when M < 1.
  void validate() const;
};

const std::set<std::string>& default_stopwords();

class FormatError : public std::runtime_error {
 public:
  FormatError(std::string file, std::size_t line, const std::string& what);

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

// JSON-lines dataset: {"id": string, "text": string, "label": integer}.
std::vector<Document> load_dataset(const std::string& path);

}  // namespace spo

#endif  // SPO_TYPES_H_
