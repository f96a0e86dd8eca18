#ifndef SPO_CANDIDATES_H_
#define SPO_CANDIDATES_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "spo/lexicon.h"
#include "spo/types.h"
#include "spo/victim.h"

namespace spo {

struct Span {
  std::size_t begin = 0;
  std::size_t length = 1;

  std::size_t end() const { return begin + length; }
  bool overlaps(const Span& other) const {
    return begin < other.end() && other.begin < end();
  }
  friend bool operator==(const Span&, const Span&) = default;
};

enum class UnitKind { kUnigram, kBigram };

struct AttackUnit {
  Span span;
  UnitKind kind = UnitKind::kUnigram;
  std::vector<std::string> candidates;  // sorted, unique, never the original
  std::string best_substitute;          // empty until selected
  double delta_p_star = 0.0;
};

struct UnitPlan {
  std::vector<AttackUnit> units;  // ordered by span start, disjoint
  Document source;
  AttackConfig config;
};

// A phrase (space-separated, lowercase) placed over a span of the original
// document.
struct Substitution {
  Span span;
  std::string phrase;
};

// Replaces every span with its phrase. Spans must be disjoint and in range
// (std::invalid_argument otherwise); order does not matter. When the first
// replaced token started with an uppercase letter, so does the substitute.
Document apply_substitutions(const Document& doc,
                             std::span<const Substitution> substitutions);

struct UnitSources {
  CandidateSources unigram;
  bool bigrams = true;
};

// U-SPO: synonyms only. HU-SPO: synonyms, sememes and named entities.
// Everything else adds bigram phrases on top.
UnitSources sources_for(Method method);

// Left-to-right scan over an annotated document. A position whose bigram with
// the next token has phrase synonyms becomes a BIGRAM unit and consumes the
// next token; otherwise a UNIGRAM unit is emitted when its candidate set is
// nonempty. Punctuation is never attacked. Candidates are not scored here.
UnitPlan build_units(const Document& doc, const Lexicon& lexicon,
                     const AttackConfig& config);

// The attack goal for one document: which label to push down (untargeted)
// or pull up (targeted), relative to the clean distribution.
class Objective {
 public:
  Objective(int true_label, AttackMode mode, LabelDistribution clean);

  // Untargeted: P(true|clean) - P(true|adv). Targeted: P(t|adv) - P(t|clean).
  double gain(const LabelDistribution& adv) const;
  // Untargeted: argmax != true label. Targeted: argmax == target.
  bool is_success(const LabelDistribution& adv) const;

  int true_label() const { return true_label_; }
  const AttackMode& mode() const { return mode_; }
  const LabelDistribution& clean() const { return clean_; }

 private:
  int true_label_;
  AttackMode mode_;
  LabelDistribution clean_;
};

// Importance of one candidate: the objective gain of substituting it alone.
// Issues one query.
double candidate_importance(ClassifierHandle& handle, const Document& doc,
                            const Objective& objective, const AttackUnit& unit,
                            const std::string& candidate,
                            QueryTally* tally = nullptr);

struct BestSubstitute {
  std::string phrase;
  double delta_p_star = 0.0;
};

// Argmax of candidate importance over unit.candidates, ties to the smallest
// candidate. One batched call of |candidates| texts.
BestSubstitute select_best(ClassifierHandle& handle, const Document& doc,
                           const Objective& objective, const AttackUnit& unit,
                           QueryTally* tally = nullptr);

// Runs select_best on every unit of the plan against the original document.
void select_substitutes(ClassifierHandle& handle, UnitPlan& plan,
                        const Objective& objective,
                        QueryTally* tally = nullptr);

}  // namespace spo

#endif  // SPO_CANDIDATES_H_
