#include "spo/search.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace spo {

namespace {

std::size_t generation_cap(const UnitPlan& plan) {
  return std::min<std::size_t>(
      static_cast<std::size_t>(std::max(plan.config.max_replacements, 0)),
      plan.units.size());
}

std::string span_text(const Document& doc, const Span& span) {
  std::string out;
  for (std::size_t i = span.begin; i < span.end(); ++i) {
    if (!out.empty()) out.push_back(' ');
    out += doc.tokens[i].surface;
  }
  return out;
}

// Fills the outcome fields that describe one substitution set.
void describe(const UnitPlan& plan, const std::vector<std::size_t>& units,
              Document adversarial, const LabelDistribution& probs,
              AttackOutcome& outcome) {
  std::vector<std::size_t> ordered = units;
  std::sort(ordered.begin(), ordered.end(), [&](std::size_t a, std::size_t b) {
    return plan.units[a].span.begin < plan.units[b].span.begin;
  });
  outcome.replaced_units.clear();
  outcome.words_replaced = 0;
  for (std::size_t idx : ordered) {
    const AttackUnit& unit = plan.units[idx];
    outcome.replaced_units.push_back(
        {unit.span, span_text(plan.source, unit.span), unit.best_substitute});
    outcome.words_replaced += static_cast<int>(unit.span.length);
  }
  outcome.adversarial = std::move(adversarial);
  outcome.predicted_label = argmax_label(probs);
}

AttackOutcome empty_failure(const Objective& objective) {
  AttackOutcome outcome;
  outcome.status = AttackStatus::kFailure;
  outcome.clean_label = argmax_label(objective.clean());
  outcome.predicted_label = outcome.clean_label;
  return outcome;
}

struct ScoredPopulation {
  std::vector<Document> docs;
  std::vector<LabelDistribution> probs;
};

ScoredPopulation score_population(const UnitPlan& plan,
                                  const std::vector<GenerationElement>& population,
                                  ClassifierHandle& handle, QueryTally* tally) {
  ScoredPopulation scored;
  scored.docs.reserve(population.size());
  for (const auto& element : population) {
    const auto subs = element_substitutions(plan, element);
    scored.docs.push_back(apply_substitutions(plan.source, subs));
  }
  scored.probs = handle.classify_batch(scored.docs, tally);
  return scored;
}

// The SPO and SPOF loops differ only in what happens to successes within a
// generation. With `encoder` null the first success ends the search.
AttackOutcome run_generations(const UnitPlan& plan, ClassifierHandle& handle,
                              const SentenceEncoder* encoder,
                              const Objective& objective, QueryTally* tally) {
  AttackOutcome outcome = empty_failure(objective);
  const std::size_t cap = generation_cap(plan);
  SearchState state;
  for (std::size_t m = 1; m <= cap; ++m) {
    generation_create(state, plan);
    if (state.population.empty()) break;
    outcome.generations_used = static_cast<int>(m);
    ScoredPopulation scored =
        score_population(plan, state.population, handle, tally);

    for (std::size_t i = 0; i < state.population.size(); ++i) {
      if (objective.is_success(scored.probs[i])) {
        if (!encoder) {
          outcome.status = AttackStatus::kSuccess;
          outcome.success = true;
          describe(plan, state.population[i].units, std::move(scored.docs[i]),
                   scored.probs[i], outcome);
          return outcome;
        }
        const double similarity =
            use_score(*encoder, plan.source, scored.docs[i]);
        state.success_pool.push_back(
            {i, scored.docs[i], scored.probs[i], similarity});
      } else {
        state.population[i].delta_p_adv = objective.gain(scored.probs[i]);
      }
    }

    if (!state.success_pool.empty()) {
      const SuccessfulExample* best = &state.success_pool.front();
      for (const auto& candidate : state.success_pool) {
        if (candidate.use_score > best->use_score) best = &candidate;
      }
      outcome.status = AttackStatus::kSuccess;
      outcome.success = true;
      outcome.use_score = best->use_score;
      describe(plan, state.population[best->element].units, best->adversarial,
               best->probs, outcome);
      return outcome;
    }

    // Best-effort report for a failed search: the strongest element so far.
    std::size_t best = 0;
    for (std::size_t i = 1; i < state.population.size(); ++i) {
      if (state.population[i].delta_p_adv >
          state.population[best].delta_p_adv) {
        best = i;
      }
    }
    describe(plan, state.population[best].units, std::move(scored.docs[best]),
             scored.probs[best], outcome);
  }
  return outcome;
}

}  // namespace

std::string_view status_name(AttackStatus status) {
  switch (status) {
    case AttackStatus::kSuccess:
      return "success";
    case AttackStatus::kFailure:
      return "failure";
    case AttackStatus::kSkipped:
      return "skipped";
    case AttackStatus::kError:
      return "error";
  }
  return "error";
}

void generation_create(SearchState& state, const UnitPlan& plan) {
  const std::size_t n = plan.units.size();
  std::vector<GenerationElement> next;
  if (state.m == 0) {
    state.best_prev.reset();
    for (std::size_t u = 0; u < n; ++u) next.push_back({{u}, 0.0});
  } else if (!state.population.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < state.population.size(); ++i) {
      if (state.population[i].delta_p_adv >
          state.population[best].delta_p_adv) {
        best = i;
      }
    }
    state.best_prev = state.population[best];
    std::vector<bool> used(n, false);
    for (std::size_t u : state.best_prev->units) used[u] = true;
    for (std::size_t u = 0; u < n; ++u) {
      if (used[u]) continue;
      GenerationElement element{state.best_prev->units, 0.0};
      element.units.push_back(u);
      next.push_back(std::move(element));
    }
  }
  state.population = std::move(next);
  state.success_pool.clear();
  ++state.m;
}

std::vector<Substitution> element_substitutions(
    const UnitPlan& plan, const GenerationElement& element) {
  std::vector<Substitution> subs;
  subs.reserve(element.units.size());
  for (std::size_t idx : element.units) {
    const AttackUnit& unit = plan.units.at(idx);
    subs.push_back({unit.span, unit.best_substitute});
  }
  return subs;
}

AttackOutcome spo_attack(const UnitPlan& plan, ClassifierHandle& handle,
                         const Objective& objective, QueryTally* tally) {
  return run_generations(plan, handle, nullptr, objective, tally);
}

AttackOutcome spof_attack(const UnitPlan& plan, ClassifierHandle& handle,
                          const SentenceEncoder& encoder,
                          const Objective& objective, QueryTally* tally) {
  return run_generations(plan, handle, &encoder, objective, tally);
}

AttackOutcome incremental_attack(const UnitPlan& plan,
                                 const std::vector<std::size_t>& order,
                                 ClassifierHandle& handle,
                                 const Objective& objective,
                                 QueryTally* tally) {
  AttackOutcome outcome = empty_failure(objective);
  const std::size_t cap = std::min(generation_cap(plan), order.size());
  std::vector<std::size_t> chosen;
  double best_gain = 0.0;
  for (std::size_t k = 1; k <= cap; ++k) {
    chosen.push_back(order[k - 1]);
    const GenerationElement element{chosen, 0.0};
    const auto subs = element_substitutions(plan, element);
    Document adversarial = apply_substitutions(plan.source, subs);
    const LabelDistribution probs = handle.classify(adversarial, tally);
    outcome.generations_used = static_cast<int>(k);
    if (objective.is_success(probs)) {
      outcome.status = AttackStatus::kSuccess;
      outcome.success = true;
      describe(plan, chosen, std::move(adversarial), probs, outcome);
      return outcome;
    }
    const double gain = objective.gain(probs);
    if (k == 1 || gain > best_gain) {
      best_gain = gain;
      describe(plan, chosen, std::move(adversarial), probs, outcome);
    }
  }
  return outcome;
}

std::vector<std::size_t> static_order(const UnitPlan& plan) {
  std::vector<std::size_t> order(plan.units.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return plan.units[a].delta_p_star > plan.units[b].delta_p_star;
  });
  return order;
}

AttackOutcome static_attack(const UnitPlan& plan, ClassifierHandle& handle,
                            const Objective& objective, QueryTally* tally) {
  return incremental_attack(plan, static_order(plan), handle, objective, tally);
}

void randomize_substitutes(UnitPlan& plan, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (AttackUnit& unit : plan.units) {
    if (unit.candidates.empty()) {
      throw std::invalid_argument("unit without candidates");
    }
    std::uniform_int_distribution<std::size_t> pick(0,
                                                    unit.candidates.size() - 1);
    unit.best_substitute = unit.candidates[pick(rng)];
    unit.delta_p_star = 0.0;
  }
}

AttackOutcome rand_attack(UnitPlan plan, ClassifierHandle& handle,
                          const Objective& objective, std::uint64_t seed,
                          QueryTally* tally) {
  randomize_substitutes(plan, seed);
  return spo_attack(plan, handle, objective, tally);
}

std::vector<double> word_saliency(const UnitPlan& plan,
                                  ClassifierHandle& handle,
                                  const Objective& objective,
                                  QueryTally* tally) {
  if (plan.units.empty()) return {};
  std::vector<Document> masked;
  masked.reserve(plan.units.size());
  for (const AttackUnit& unit : plan.units) {
    const Substitution sub{unit.span, "unknown"};
    masked.push_back(apply_substitutions(plan.source, {&sub, 1}));
  }
  const auto probs = handle.classify_batch(masked, tally);
  std::vector<double> saliency;
  saliency.reserve(probs.size());
  for (const auto& p : probs) saliency.push_back(objective.gain(p));
  return saliency;
}

std::vector<std::size_t> wsa_order(const UnitPlan& plan,
                                   ClassifierHandle& handle,
                                   const Objective& objective,
                                   QueryTally* tally) {
  const auto saliency = word_saliency(plan, handle, objective, tally);
  std::vector<std::size_t> order(plan.units.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return saliency[a] > saliency[b];
  });
  return order;
}

AttackOutcome wsa_attack(const UnitPlan& plan, ClassifierHandle& handle,
                         const Objective& objective, QueryTally* tally) {
  const auto order = wsa_order(plan, handle, objective, tally);
  return incremental_attack(plan, order, handle, objective, tally);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

Attacker::Attacker(const Lexicon& lexicon, ClassifierHandle& handle,
                   const SentenceEncoder* encoder, AttackConfig config)
    : lexicon_(lexicon),
      handle_(handle),
      encoder_(encoder),
      config_(std::move(config)) {
  config_.validate();
  if (config_.method == Method::kBuSpof && !encoder_) {
    throw std::invalid_argument("bu-spof needs a sentence encoder");
  }
  if (config_.mode.targeted() &&
      *config_.mode.target_label >= handle_.num_labels()) {
    throw std::invalid_argument("target label outside [0, K)");
  }
}

AttackOutcome Attacker::attack(const Document& doc) const {
  Document annotated = doc;
  lexicon_.annotate(annotated);
  QueryTally tally;
  const LabelDistribution clean = handle_.classify(annotated, &tally);
  return attack_classified(annotated, clean, tally);
}

UnitPlan Attacker::prepare(const Document& annotated,
                           const Objective& objective,
                           QueryTally* tally) const {
  UnitPlan plan = build_units(annotated, lexicon_, config_);
  if (config_.method == Method::kRand) {
    randomize_substitutes(plan, config_.seed ^ fnv1a64(annotated.id));
  } else {
    select_substitutes(handle_, plan, objective, tally);
  }
  return plan;
}

AttackOutcome Attacker::attack_classified(const Document& annotated,
                                          const LabelDistribution& clean,
                                          QueryTally tally) const {
  const int clean_label = argmax_label(clean);
  const bool skip =
      clean_label != annotated.gold_label ||
      (config_.mode.targeted() &&
       *config_.mode.target_label == annotated.gold_label);
  if (skip) {
    AttackOutcome outcome;
    outcome.status = AttackStatus::kSkipped;
    outcome.clean_label = clean_label;
    outcome.predicted_label = clean_label;
    outcome.queries = tally.queries;
    return outcome;
  }

  const Objective objective(annotated.gold_label, config_.mode, clean);
  const UnitPlan plan = prepare(annotated, objective, &tally);

  AttackOutcome outcome;
  switch (config_.method) {
    case Method::kUSpo:
    case Method::kHuSpo:
    case Method::kBuSpo:
    case Method::kRand:
      outcome = spo_attack(plan, handle_, objective, &tally);
      break;
    case Method::kBuSpof:
      outcome = spof_attack(plan, handle_, *encoder_, objective, &tally);
      break;
    case Method::kStatic:
      outcome = static_attack(plan, handle_, objective, &tally);
      break;
    case Method::kWsa:
      outcome = wsa_attack(plan, handle_, objective, &tally);
      break;
  }
  outcome.clean_label = clean_label;
  if (encoder_ && outcome.adversarial &&
      (config_.method != Method::kBuSpof || !outcome.success)) {
    outcome.use_score = use_score(*encoder_, annotated, *outcome.adversarial);
  }
  outcome.queries = tally.queries;
  return outcome;
}

}  // namespace spo
