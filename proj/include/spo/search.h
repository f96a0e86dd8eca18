#ifndef SPO_SEARCH_H_
#define SPO_SEARCH_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spo/candidates.h"
#include "spo/encoder.h"
#include "spo/lexicon.h"
#include "spo/types.h"
#include "spo/victim.h"

namespace spo {

// A set of plan units substituted together, each with its fixed best
// substitute. `units` holds indices into UnitPlan::units; inherited units
// come first, the newly added unit last.
struct GenerationElement {
  std::vector<std::size_t> units;
  double delta_p_adv = 0.0;
};

struct SuccessfulExample {
  std::size_t element = 0;  // index into the population
  Document adversarial;
  LabelDistribution probs;
  double use_score = 0.0;
};

struct SearchState {
  int m = 0;  // index of the current population; 0 before the first
  std::vector<GenerationElement> population;
  std::optional<GenerationElement> best_prev;
  std::vector<SuccessfulExample> success_pool;  // SPOF only
};

// Advances `state` to generation m + 1. The first generation holds one
// singleton per unit. Later generations inherit the previous element with
// the highest delta_p_adv (earliest on ties) and extend it by each unit it
// does not contain, in plan order. The population is empty once every unit
// has been consumed.
void generation_create(SearchState& state, const UnitPlan& plan);

std::vector<Substitution> element_substitutions(const UnitPlan& plan,
                                                const GenerationElement& element);

enum class AttackStatus { kSuccess, kFailure, kSkipped, kError };

std::string_view status_name(AttackStatus status);

struct Replacement {
  Span span;
  std::string original;  // surface text of the replaced span
  std::string substitute;
};

struct AttackOutcome {
  AttackStatus status = AttackStatus::kFailure;
  bool success = false;
  // On failure, the best element found (highest delta_p_adv) when any
  // generation ran.
  std::optional<Document> adversarial;
  std::vector<Replacement> replaced_units;
  int words_replaced = 0;  // tokens, so a bigram counts 2
  double use_score = 0.0;
  std::uint64_t queries = 0;
  int generations_used = 0;
  int clean_label = 0;
  int predicted_label = 0;
  std::string error;  // kError only
};

// Semantic Preservation Optimization. Each generation is scored in one
// batched call; the first element (in population order) whose prediction
// satisfies the objective is returned. At most min(M, |plan|) generations.
AttackOutcome spo_attack(const UnitPlan& plan, ClassifierHandle& handle,
                         const Objective& objective,
                         QueryTally* tally = nullptr);

// SPO with the semantic filter: every success in a generation is scored
// against the original with the encoder and the most similar one (earliest
// on ties) is returned at the end of that generation.
AttackOutcome spof_attack(const UnitPlan& plan, ClassifierHandle& handle,
                          const SentenceEncoder& encoder,
                          const Objective& objective,
                          QueryTally* tally = nullptr);

// Baseline: substitute units incrementally in the given priority order
// (top-1, top-1+2, ...) until success or the cap.
AttackOutcome incremental_attack(const UnitPlan& plan,
                                 const std::vector<std::size_t>& order,
                                 ClassifierHandle& handle,
                                 const Objective& objective,
                                 QueryTally* tally = nullptr);

// Units by delta_p_star descending, ties in span order.
std::vector<std::size_t> static_order(const UnitPlan& plan);

AttackOutcome static_attack(const UnitPlan& plan, ClassifierHandle& handle,
                            const Objective& objective,
                            QueryTally* tally = nullptr);

// Replaces every unit's best substitute with a uniformly drawn candidate.
void randomize_substitutes(UnitPlan& plan, std::uint64_t seed);

// RAND baseline: random substitutes, SPO ordering.
AttackOutcome rand_attack(UnitPlan plan, ClassifierHandle& handle,
                          const Objective& objective, std::uint64_t seed,
                          QueryTally* tally = nullptr);

// Word saliency of each unit: the objective gain of replacing its span by
// the single token "unknown". One batched call of |plan| texts.
std::vector<double> word_saliency(const UnitPlan& plan,
                                  ClassifierHandle& handle,
                                  const Objective& objective,
                                  QueryTally* tally = nullptr);

// Unit indices by saliency descending, ties in span order.
std::vector<std::size_t> wsa_order(const UnitPlan& plan,
                                   ClassifierHandle& handle,
                                   const Objective& objective,
                                   QueryTally* tally = nullptr);

AttackOutcome wsa_attack(const UnitPlan& plan, ClassifierHandle& handle,
                         const Objective& objective,
                         QueryTally* tally = nullptr);

// Full pipeline for one document: annotation, clean prediction, unit
// construction, substitute selection and the configured search.
class Attacker {
 public:
  // `encoder` may be null unless the method is BU-SPOF; without one,
  // outcomes report use_score = 0.
  Attacker(const Lexicon& lexicon, ClassifierHandle& handle,
           const SentenceEncoder* encoder, AttackConfig config);

  AttackOutcome attack(const Document& doc) const;

  // For callers that already classified the clean (annotated) document;
  // `tally` carries the queries spent so far.
  AttackOutcome attack_classified(const Document& annotated,
                                  const LabelDistribution& clean,
                                  QueryTally tally) const;

  // Unit plan with best substitutes selected, as the search would see it.
  UnitPlan prepare(const Document& annotated, const Objective& objective,
                   QueryTally* tally) const;

  const AttackConfig& config() const { return config_; }

 private:
  const Lexicon& lexicon_;
  ClassifierHandle& handle_;
  const SentenceEncoder* encoder_;
  AttackConfig config_;
};

// Stable 64-bit FNV-1a, used to derive per-document seeds.
std::uint64_t fnv1a64(std::string_view text);

}  // namespace spo

#endif  // SPO_SEARCH_H_
