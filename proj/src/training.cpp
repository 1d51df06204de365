#include "advtext/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>
#include <unordered_set>

#include "advtext/error.hpp"

namespace advtext {

namespace {

// Runs generate over `picked` in parallel blocks; `consume` sees outcomes in
// order and returns false to stop.
template <typename Consume>
void ordered_attacks(const ClassifierModel& model, const Attacker& attacker,
                     std::span<const LabeledExample> dataset, const std::vector<std::size_t>& picked,
                     std::size_t threads, Consume consume) {
  threads = std::max<std::size_t>(1, threads);
  const std::size_t block = threads == 1 ? 1 : threads * 4;
  std::vector<AttackOutcome> buffer;
  for (std::size_t start = 0; start < picked.size(); start += block) {
    const std::size_t end = std::min(picked.size(), start + block);
    buffer.assign(end - start, {});
    if (threads == 1) {
      buffer[0] = attacker.generate(model, dataset[picked[start]]);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          for (std::size_t j = start + t; j < end; j += threads) {
            buffer[j - start] = attacker.generate(model, dataset[picked[j]]);
          }
        });
      }
    }
    for (auto& outcome : buffer) {
      if (!consume(std::move(outcome))) return;
    }
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw InvalidArgument("batch_size must be at least 1");
  if (!(K >= 0.0 && K <= 1.0)) throw InvalidArgument("K must lie in [0, 1]");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be non-negative");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw InvalidArgument("lr must be positive");
  attack.validate();
}

const char* phase_name(Phase phase) {
  switch (phase) {
    case Phase::Natural: return "natural";
    case Phase::Adversarial: return "adversarial";
    case Phase::Augmented: return "augmented";
  }
  return "unknown";
}

std::vector<std::size_t> epoch_order(std::size_t size, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(derive_seed(seed, Stream::Shuffle, epoch));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

Trainer::Trainer(TrainableModel& model, const TrainConfig& config)
    : model_(model), config_(config), optimizer_(AdamOptions<double>{config.lr}) {
  config_.validate();
}

EpochLog Trainer::run_epoch(std::span<const LabeledExample> data, std::span<const double> weights, Phase phase) {
  if (data.size() != weights.size()) throw InvalidArgument("run_epoch: weights must match data");
  const auto t0 = std::chrono::steady_clock::now();
  EpochLog log;
  log.epoch = epoch_;
  log.phase = phase;
  log.train_size = data.size();

  const auto order = epoch_order(data.size(), config_.seed, epoch_);
  std::vector<WeightedExample> batch;
  double loss_sum = 0.0;
  for (std::size_t start = 0; start < order.size(); start += config_.batch_size) {
    const std::size_t end = std::min(order.size(), start + config_.batch_size);
    batch.clear();
    for (std::size_t j = start; j < end; ++j) batch.push_back({&data[order[j]], weights[order[j]]});
    const TrainBatchReport r = train_batch(model_, batch, optimizer_);
    loss_sum += r.mean_loss * static_cast<double>(batch.size());
  }
  log.mean_loss = data.empty() ? 0.0 : loss_sum / static_cast<double>(data.size());
  log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ++epoch_;
  return log;
}

std::vector<EpochLog> natural_train(TrainableModel& model, std::span<const LabeledExample> dataset,
                                    const TrainConfig& config) {
  if (dataset.empty()) throw InvalidArgument("natural_train: empty dataset");
  Trainer trainer(model, config);
  const std::vector<double> ones(dataset.size(), 1.0);
  std::vector<EpochLog> logs;
  for (std::size_t e = 0; e < config.n_nat; ++e) logs.push_back(trainer.run_epoch(dataset, ones, Phase::Natural));
  return logs;
}

std::size_t adv_set_limit(double K, std::size_t natural_size) {
  const double x = K * static_cast<double>(natural_size);
  const double r = std::nearbyint(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, x)) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(x));
}

AdvSetResult build_adv_set(const ClassifierModel& model, const Attacker& attacker,
                           std::span<const LabeledExample> dataset, const TrainConfig& config,
                           std::size_t epoch) {
  AdvSetResult result;
  const std::size_t limit = adv_set_limit(config.K, dataset.size());
  if (limit == 0 || dataset.empty()) return result;

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(derive_seed(config.seed, Stream::AdvOrder, epoch));
  std::shuffle(order.begin(), order.end(), rng);

  ordered_attacks(model, attacker, dataset, order, config.threads, [&](AttackOutcome&& outcome) {
    ++result.attempts;
    if (outcome.success) {
      result.examples.push_back({outcome.adversarial, outcome.original.label});
      result.outcomes.push_back(std::move(outcome));
    }
    return result.examples.size() < limit;
  });
  return result;
}

MergedSet merge_unique(std::span<const LabeledExample> natural, std::span<const LabeledExample> adversarial,
                       double adversarial_weight) {
  MergedSet merged;
  std::unordered_set<std::string> seen;
  auto add = [&](const LabeledExample& e, double w) {
    if (seen.insert(detokenize(e.document)).second) {
      merged.examples.push_back(e);
      merged.weights.push_back(w);
    }
  };
  for (const auto& e : natural) add(e, 1.0);
  for (const auto& e : adversarial) add(e, adversarial_weight);
  return merged;
}

std::vector<EpochLog> adversarial_train(TrainableModel& model, const Attacker& attacker,
                                        std::span<const LabeledExample> dataset, const TrainConfig& config,
                                        const AdversarialEpochHook& hook) {
  if (dataset.empty()) throw InvalidArgument("adversarial_train: empty dataset");
  Trainer trainer(model, config);
  const std::vector<double> ones(dataset.size(), 1.0);
  std::vector<EpochLog> logs;
  for (std::size_t e = 0; e < config.n_nat; ++e) logs.push_back(trainer.run_epoch(dataset, ones, Phase::Natural));

  for (std::size_t e = 0; e < config.n_adv; ++e) {
    const std::size_t epoch = trainer.epochs_completed();
    const auto t0 = std::chrono::steady_clock::now();
    const AdvSetResult adv = build_adv_set(model, attacker, dataset, config, epoch);
    std::size_t misclassified = 0;
    for (const auto& o : adv.outcomes) {
      if (o.predicted_after != o.original.label) ++misclassified;
    }
    if (misclassified != adv.examples.size()) {
      throw InvariantError("adversarial set contains an example the model classifies correctly");
    }
    const MergedSet merged = merge_unique(dataset, adv.examples, config.gamma);
    if (hook) hook(model, adv, merged.examples, merged.weights, epoch);

    EpochLog log = trainer.run_epoch(merged.examples, merged.weights, Phase::Adversarial);
    log.adv_set_size = adv.examples.size();
    log.adv_attempts = adv.attempts;
    log.adv_misclassified = misclassified;
    log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    logs.push_back(log);
  }
  return logs;
}

SynonymSwapAugmenter::SynonymSwapAugmenter(const EmbeddingTable& table, std::size_t swaps)
    : table_(table), swaps_(swaps) {
  if (swaps_ == 0) throw InvalidArgument("augmenter needs at least one swap");
}

std::vector<LabeledExample> SynonymSwapAugmenter::transform(const LabeledExample& example,
                                                            std::uint64_t seed) const {
  const Document& doc = example.document;
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (table_.contains(doc[i])) positions.push_back(i);
  }
  if (positions.empty() || table_.size() < 2) return {};
  std::mt19937_64 rng(seed);
  std::shuffle(positions.begin(), positions.end(), rng);
  positions.resize(std::min(swaps_, positions.size()));

  Document out = doc;
  for (std::size_t i : positions) {
    const auto top = nearest_synonyms(table_, doc[i], 1);
    out = replace_word(out, i, top->front().word);
  }
  return {LabeledExample{out, example.label}};
}

std::vector<LabeledExample> augment_dataset(std::span<const LabeledExample> dataset, const Augmenter& augmenter,
                                            std::uint64_t seed, std::span<const LabeledExample> extra) {
  std::vector<LabeledExample> out(dataset.begin(), dataset.end());
  std::unordered_set<std::string> seen;
  for (const auto& e : dataset) seen.insert(detokenize(e.document));
  auto add = [&](const LabeledExample& e) {
    if (seen.insert(detokenize(e.document)).second) out.push_back(e);
  };
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (const auto& e : augmenter.transform(dataset[i], derive_seed(seed, Stream::Augment, i))) add(e);
  }
  for (const auto& e : extra) add(e);
  return out;
}

std::vector<EpochLog> augmented_train(TrainableModel& model, std::span<const LabeledExample> dataset,
                                      const Augmenter& augmenter, const TrainConfig& config,
                                      std::span<const LabeledExample> extra) {
  if (dataset.empty()) throw InvalidArgument("augmented_train: empty dataset");
  const auto augmented = augment_dataset(dataset, augmenter, config.seed, extra);
  Trainer trainer(model, config);
  const std::vector<double> ones(augmented.size(), 1.0);
  std::vector<EpochLog> logs;
  for (std::size_t e = 0; e < config.n_nat + config.n_adv; ++e) {
    EpochLog log = trainer.run_epoch(augmented, ones, Phase::Augmented);
    logs.push_back(log);
  }
  return logs;
}

}  // namespace advtext
