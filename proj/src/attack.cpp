#include "advtext/attack.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "advtext/error.hpp"
#include "advtext/math.hpp"

namespace advtext {

namespace {

ImportanceRanking rank_from_base(const ClassifierModel& model, const Document& x, Label y,
                                 std::size_t k, const ProbVector& base) {
  if (x.size() < 2) throw InvalidArgument("rank_words: a single-token document has no deletable word");
  if (k == 0) throw InvalidArgument("rank_words: k must be at least 1");
  ImportanceRanking all;
  all.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    all.push_back({i, importance_score(base, model.predict_proba(delete_word(x, i)), y)});
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const RankedWord& a, const RankedWord& b) { return a.score > b.score; });
  all.resize(std::min(k, all.size()));
  return all;
}

}  // namespace

void AttackConfig::validate() const {
  if (k < 1) throw InvalidArgument("attack k must be at least 1");
  if (m < 1) throw InvalidArgument("attack m must be at least 1");
  // Values above 1 are allowed and close the gate entirely.
  if (!(threshold > 0.0) || !std::isfinite(threshold)) {
    throw InvalidArgument("attack threshold must be positive and finite");
  }
  if (!(min_word_cos >= -1.0 && min_word_cos <= 1.0)) {
    throw InvalidArgument("min_word_cos must lie in [-1, 1]");
  }
}

double importance_score(const ProbVector& before, const ProbVector& after, Label y) {
  const auto yi = static_cast<Eigen::Index>(y);
  double score = before(yi) - after(yi);
  const Label flipped = argmax_label(after);
  if (flipped != y) {
    const auto fi = static_cast<Eigen::Index>(flipped);
    score += after(fi) - before(fi);
  }
  return score;
}

double word_importance(const ClassifierModel& model, const Document& x, Label y, std::size_t i) {
  if (x.size() < 2) throw InvalidArgument("word_importance: a single-token document has no deletable word");
  const Document without = delete_word(x, i);
  return importance_score(model.predict_proba(x), model.predict_proba(without), y);
}

ImportanceRanking rank_words(const ClassifierModel& model, const Document& x, Label y, std::size_t k) {
  if (x.size() < 2) throw InvalidArgument("rank_words: a single-token document has no deletable word");
  return rank_from_base(model, x, y, k, model.predict_proba(x));
}

Attacker::Attacker(const EmbeddingTable& table, const SentenceEncoder& encoder, AttackConfig config)
    : table_(table), encoder_(encoder), config_(config) {
  config_.validate();
}

std::optional<Replacement> Attacker::perturb_word(const ClassifierModel& model, const Document& x_prime,
                                                  std::size_t i, Label y) const {
  const auto candidates = nearest_synonyms(table_, x_prime.word(i), config_.m);
  if (!candidates) return std::nullopt;

  const auto yi = static_cast<Eigen::Index>(y);
  std::optional<Replacement> best;
  for (const auto& c : *candidates) {
    if (c.similarity < config_.min_word_cos) continue;
    Replacement r{i, c.word, c.similarity, replace_word(x_prime, i, c.word), {}};
    r.probabilities = model.predict_proba(r.document);
    if (config_.policy == CandidatePolicy::FirstFlip) {
      if (argmax_label(r.probabilities) != y) return r;
      if (!best) best = std::move(r);
      continue;
    }
    if (!best) {
      best = std::move(r);
      continue;
    }
    const double pr = r.probabilities(yi);
    const double pb = best->probabilities(yi);
    const bool better = pr < pb || (pr == pb && (r.word_cosine > best->word_cosine ||
                                                 (r.word_cosine == best->word_cosine && r.word < best->word)));
    if (better) best = std::move(r);
  }
  return best;
}

AttackOutcome Attacker::generate(const ClassifierModel& model, const LabeledExample& example) const {
  QueryCounter counted(model);
  const Document& x = example.document;
  const Label y = example.label;

  AttackOutcome out;
  out.original = example;
  out.adversarial = x;

  ProbVector current = counted.predict_proba(x);
  out.predicted_before = argmax_label(current);
  if (out.predicted_before != y) {
    out.skipped = true;
  } else if (x.size() >= 2) {
    const Eigen::VectorXd original_code = encoder_.encode(x);
    const ImportanceRanking ranking = rank_from_base(counted, x, y, config_.k, current);
    for (const auto& r : ranking) {
      auto p = perturb_word(counted, out.adversarial, r.index, y);
      if (!p || argmax_label(p->probabilities) == y) continue;
      const Eigen::VectorXd code = encoder_.encode(p->document);
      const double sim = code.isZero(0.0) || original_code.isZero(0.0) ? 0.0
                                                                         : cosine_similarity(code, original_code);
      if (sim > config_.threshold) {
        out.adversarial = std::move(p->document);
        current = std::move(p->probabilities);
        out.perturbed_indices.push_back(r.index);
      }
    }
  }
  std::sort(out.perturbed_indices.begin(), out.perturbed_indices.end());
  out.predicted_after = argmax_label(current);
  out.success = !out.skipped && out.predicted_after != y;
  out.similarity = encoder_.similarity(out.adversarial, x);
  out.queries = counted.queries();
  return out;
}

std::vector<std::size_t> sample_indices(std::size_t size, std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min(n, size));
  return order;
}

CorpusAttack Attacker::attack_corpus(const ClassifierModel& model, std::span<const LabeledExample> dataset,
                                     std::size_t n, std::uint64_t seed, std::size_t threads) const {
  if (dataset.empty()) throw InvalidArgument("attack_corpus: empty dataset");
  const auto picked = sample_indices(dataset.size(), n, seed);
  CorpusAttack result;
  result.outcomes.resize(picked.size());

  auto work = [&](std::size_t offset, std::size_t step) {
    for (std::size_t j = offset; j < picked.size(); j += step) {
      result.outcomes[j] = generate(model, dataset[picked[j]]);
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, picked.size()));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }
  result.summary = summarize(result.outcomes, n);
  return result;
}

AttackSummary summarize(std::span<const AttackOutcome> outcomes, std::size_t requested) {
  AttackSummary s;
  s.requested = requested;
  s.sampled = outcomes.size();
  double similarity_sum = 0.0;
  for (const auto& o : outcomes) {
    s.total_queries += o.queries;
    if (o.skipped) {
      ++s.skipped;
      continue;
    }
    ++s.attacked;
    if (o.success) {
      ++s.successes;
      s.total_perturbed += o.perturbed_indices.size();
      similarity_sum += o.similarity;
    } else {
      ++s.failures;
    }
  }
  s.correct = s.attacked;
  auto ratio = [](double a, std::size_t b) { return b ? a / static_cast<double>(b) : 0.0; };
  s.clean_accuracy = ratio(static_cast<double>(s.correct), s.sampled);
  s.robust_accuracy = ratio(static_cast<double>(s.failures), s.attacked);
  s.robust_accuracy_overall = ratio(static_cast<double>(s.failures), s.sampled);
  s.success_rate = ratio(static_cast<double>(s.successes), s.attacked);
  s.mean_queries = ratio(static_cast<double>(s.total_queries), s.sampled);
  s.mean_perturbed_words = ratio(static_cast<double>(s.total_perturbed), s.successes);
  s.mean_similarity = ratio(similarity_sum, s.successes);
  return s;
}

AttackOutcome generate_adversarial(const ClassifierModel& model, const EmbeddingTable& table,
                                   const LabeledExample& example, const AttackConfig& config) {
  const MeanEmbeddingEncoder encoder(table);
  return Attacker(table, encoder, config).generate(model, example);
}

}  // namespace advtext
