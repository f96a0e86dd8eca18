#include "spo/candidates.h"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace spo {

namespace {

std::vector<std::string> split_phrase(const std::string& phrase) {
  std::vector<std::string> words;
  std::size_t start = 0;
  while (start <= phrase.size()) {
    const std::size_t pos = phrase.find(' ', start);
    const std::size_t stop = pos == std::string::npos ? phrase.size() : pos;
    if (stop > start) words.push_back(phrase.substr(start, stop - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return words;
}

bool starts_upper(const std::string& surface) {
  return !surface.empty() &&
         std::isupper(static_cast<unsigned char>(surface.front()));
}

}  // namespace

Document apply_substitutions(const Document& doc,
                             std::span<const Substitution> substitutions) {
  std::vector<const Substitution*> ordered;
  ordered.reserve(substitutions.size());
  for (const auto& sub : substitutions) ordered.push_back(&sub);
  std::sort(ordered.begin(), ordered.end(),
            [](const Substitution* a, const Substitution* b) {
              return a->span.begin < b->span.begin;
            });
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const Span& span = ordered[i]->span;
    if (span.length == 0 || span.end() > doc.tokens.size()) {
      throw std::invalid_argument("substitution span out of range");
    }
    if (i > 0 && ordered[i - 1]->span.overlaps(span)) {
      throw std::invalid_argument("overlapping substitution spans");
    }
  }

  Document out;
  out.gold_label = doc.gold_label;
  out.id = doc.id;
  out.tokens.reserve(doc.tokens.size());
  std::size_t next = 0;
  for (const Substitution* sub : ordered) {
    for (; next < sub->span.begin; ++next) out.tokens.push_back(doc.tokens[next]);
    const bool capitalize = starts_upper(doc.tokens[sub->span.begin].surface);
    const auto words = split_phrase(sub->phrase);
    for (std::size_t w = 0; w < words.size(); ++w) {
      Token token = Token::from_surface(words[w]);
      if (w == 0 && capitalize) {
        token.surface[0] = static_cast<char>(
            std::toupper(static_cast<unsigned char>(token.surface[0])));
      }
      const std::size_t source =
          sub->span.begin + std::min(w, sub->span.length - 1);
      token.pos = doc.tokens[source].pos;
      out.tokens.push_back(std::move(token));
    }
    next = sub->span.end();
  }
  for (; next < doc.tokens.size(); ++next) out.tokens.push_back(doc.tokens[next]);
  return out;
}

UnitSources sources_for(Method method) {
  switch (method) {
    case Method::kUSpo:
      return {{.synonyms = true, .sememes = false, .named_entities = false},
              false};
    case Method::kHuSpo:
      return {{.synonyms = true, .sememes = true, .named_entities = true},
              false};
    default:
      return {{.synonyms = true, .sememes = true, .named_entities = true},
              true};
  }
}

UnitPlan build_units(const Document& doc, const Lexicon& lexicon,
                     const AttackConfig& config) {
  UnitPlan plan;
  plan.source = doc;
  plan.config = config;
  const UnitSources sources = sources_for(config.method);
  const std::size_t n = doc.tokens.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Token& token = doc.tokens[i];
    if (is_punctuation(token.surface)) continue;
    if (sources.bigrams && i + 1 < n &&
        !is_punctuation(doc.tokens[i + 1].surface)) {
      const auto phrases = bigram_candidates(lexicon, token, doc.tokens[i + 1]);
      if (!phrases.empty()) {
        AttackUnit unit;
        unit.span = {i, 2};
        unit.kind = UnitKind::kBigram;
        unit.candidates.assign(phrases.begin(), phrases.end());
        plan.units.push_back(std::move(unit));
        ++i;  // the next token belongs to this bigram
        continue;
      }
    }
    if (config.stopword_skip && config.stopwords.contains(token.norm)) continue;
    const auto words = unigram_candidates(lexicon, token, doc.gold_label,
                                          sources.unigram,
                                          config.mode.target_label);
    if (words.empty()) continue;
    AttackUnit unit;
    unit.span = {i, 1};
    unit.kind = UnitKind::kUnigram;
    unit.candidates.assign(words.begin(), words.end());
    plan.units.push_back(std::move(unit));
  }
  return plan;
}

Objective::Objective(int true_label, AttackMode mode, LabelDistribution clean)
    : true_label_(true_label), mode_(mode), clean_(std::move(clean)) {
  const int k = static_cast<int>(clean_.num_labels());
  if (true_label_ < 0 || true_label_ >= k) {
    throw std::invalid_argument("true label outside [0, K)");
  }
  if (mode_.targeted()) {
    const int target = *mode_.target_label;
    if (target < 0 || target >= k) {
      throw std::invalid_argument("target label outside [0, K)");
    }
    if (target == true_label_) {
      throw std::invalid_argument("target label equals the true label");
    }
  }
}

double Objective::gain(const LabelDistribution& adv) const {
  if (mode_.targeted()) {
    const int target = *mode_.target_label;
    return adv[target] - clean_[target];
  }
  return clean_[true_label_] - adv[true_label_];
}

bool Objective::is_success(const LabelDistribution& adv) const {
  const int predicted = argmax_label(adv);
  if (mode_.targeted()) return predicted == *mode_.target_label;
  return predicted != true_label_;
}

double candidate_importance(ClassifierHandle& handle, const Document& doc,
                            const Objective& objective, const AttackUnit& unit,
                            const std::string& candidate, QueryTally* tally) {
  const Substitution sub{unit.span, candidate};
  const Document variant = apply_substitutions(doc, {&sub, 1});
  return objective.gain(handle.classify(variant, tally));
}

BestSubstitute select_best(ClassifierHandle& handle, const Document& doc,
                           const Objective& objective, const AttackUnit& unit,
                           QueryTally* tally) {
  if (unit.candidates.empty()) {
    throw std::invalid_argument("select_best on a unit without candidates");
  }
  // Scan in lexicographic order so a strict comparison keeps the smallest
  // candidate on ties.
  std::vector<std::string> ordered = unit.candidates;
  std::sort(ordered.begin(), ordered.end());
  std::vector<Document> variants;
  variants.reserve(ordered.size());
  for (const auto& candidate : ordered) {
    const Substitution sub{unit.span, candidate};
    variants.push_back(apply_substitutions(doc, {&sub, 1}));
  }
  const auto dists = handle.classify_batch(variants, tally);
  BestSubstitute best{ordered[0], objective.gain(dists[0])};
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    const double importance = objective.gain(dists[i]);
    if (importance > best.delta_p_star) best = {ordered[i], importance};
  }
  return best;
}

void select_substitutes(ClassifierHandle& handle, UnitPlan& plan,
                        const Objective& objective, QueryTally* tally) {
  for (AttackUnit& unit : plan.units) {
    const BestSubstitute best =
        select_best(handle, plan.source, objective, unit, tally);
    unit.best_substitute = best.phrase;
    unit.delta_p_star = best.delta_p_star;
  }
}

}  // namespace spo
