#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "advtext/attack.hpp"
#include "advtext/classifier.hpp"
#include "advtext/seed.hpp"
#include "advtext/text.hpp"

namespace advtext {

struct TrainConfig {
  std::size_t n_nat = 3;
  std::size_t n_adv = 7;
  std::size_t batch_size = 8;
  double lr = 1e-2;
  double K = 0.2;
  double gamma = 1.0;
  std::uint64_t seed = 0;
  AttackConfig attack;
  std::size_t augment_swaps = 2;
  std::size_t threads = 1;

  void validate() const;
};

enum class Phase { Natural, Adversarial, Augmented };
const char* phase_name(Phase phase);

struct EpochLog {
  std::size_t epoch = 0;
  Phase phase = Phase::Natural;
  double mean_loss = 0.0;
  std::size_t train_size = 0;
  std::size_t adv_set_size = 0;
  std::size_t adv_attempts = 0;
  // Members of D_adv the generating model got wrong; equals adv_set_size by construction.
  std::size_t adv_misclassified = 0;
  double wall_seconds = 0.0;
};

// Permutation used for epoch `epoch` over `size` items.
std::vector<std::size_t> epoch_order(std::size_t size, std::uint64_t seed, std::size_t epoch);

// Runs numbered epochs over weighted data with one Adam state across calls.
class Trainer {
 public:
  Trainer(TrainableModel& model, const TrainConfig& config);

  EpochLog run_epoch(std::span<const LabeledExample> data, std::span<const double> weights, Phase phase);
  std::size_t epochs_completed() const { return epoch_; }
  Adam<double>& optimizer() { return optimizer_; }

 private:
  TrainableModel& model_;
  TrainConfig config_;
  Adam<double> optimizer_;
  std::size_t epoch_ = 0;
};

std::vector<EpochLog> natural_train(TrainableModel& model, std::span<const LabeledExample> dataset,
                                    const TrainConfig& config);

struct AdvSetResult {
  std::vector<LabeledExample> examples;
  std::vector<AttackOutcome> outcomes;  // successful outcomes, one per example
  std::size_t attempts = 0;
};

std::size_t adv_set_limit(double K, std::size_t natural_size);

AdvSetResult build_adv_set(const ClassifierModel& model, const Attacker& attacker,
                           std::span<const LabeledExample> dataset, const TrainConfig& config,
                           std::size_t epoch);

// Called after D_new is formed and before the epoch trains on it.
using AdversarialEpochHook = std::function<void(const TrainableModel& model, const AdvSetResult& adv,
                                                const std::vector<LabeledExample>& d_new,
                                                const std::vector<double>& weights, std::size_t epoch)>;

std::vector<EpochLog> adversarial_train(TrainableModel& model, const Attacker& attacker,
                                        std::span<const LabeledExample> dataset, const TrainConfig& config,
                                        const AdversarialEpochHook& hook = {});

// D_nat ∪ D_adv without repeated detokenized text; first occurrence wins.
struct MergedSet {
  std::vector<LabeledExample> examples;
  std::vector<double> weights;
};
MergedSet merge_unique(std::span<const LabeledExample> natural, std::span<const LabeledExample> adversarial,
                       double adversarial_weight);

class Augmenter {
 public:
  virtual ~Augmenter() = default;
  virtual std::vector<LabeledExample> transform(const LabeledExample& example, std::uint64_t seed) const = 0;
};

// Replaces `swaps` distinct random in-vocabulary positions with their top-1 synonym.
class SynonymSwapAugmenter : public Augmenter {
 public:
  SynonymSwapAugmenter(const EmbeddingTable& table, std::size_t swaps = 2);
  std::vector<LabeledExample> transform(const LabeledExample& example, std::uint64_t seed) const override;

 private:
  const EmbeddingTable& table_;
  std::size_t swaps_;
};

// `extra` holds externally produced augmentations (for example back-translations
// read from JSONL); they pass through the same deduplication.
std::vector<LabeledExample> augment_dataset(std::span<const LabeledExample> dataset, const Augmenter& augmenter,
                                            std::uint64_t seed, std::span<const LabeledExample> extra = {});

std::vector<EpochLog> augmented_train(TrainableModel& model, std::span<const LabeledExample> dataset,
                                      const Augmenter& augmenter, const TrainConfig& config,
                                      std::span<const LabeledExample> extra = {});

}  // namespace advtext
