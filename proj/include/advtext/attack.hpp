#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "advtext/classifier.hpp"
#include "advtext/embedding.hpp"
#include "advtext/text.hpp"

namespace advtext {

// How P(X, i) picks among the surviving synonym candidates.
enum class CandidatePolicy {
  MinTrueClass,  // lowest true-class probability; ties to higher cosine, then word
  FirstFlip,     // first candidate in cosine order that flips the prediction
};

struct AttackConfig {
  std::size_t k = 10;
  std::size_t m = 8;
  double threshold = 0.5;
  double min_word_cos = 0.5;
  CandidatePolicy policy = CandidatePolicy::MinTrueClass;

  void validate() const;
};

struct RankedWord {
  std::size_t index = 0;
  double score = 0.0;
};

using ImportanceRanking = std::vector<RankedWord>;

// Importance of word i given probabilities before and after deleting it.
double importance_score(const ProbVector& before, const ProbVector& after, Label y);

double word_importance(const ClassifierModel& model, const Document& x, Label y, std::size_t i);
ImportanceRanking rank_words(const ClassifierModel& model, const Document& x, Label y, std::size_t k);

struct Replacement {
  std::size_t index = 0;
  std::string word;
  double word_cosine = 0.0;
  Document document;
  ProbVector probabilities;
};

struct AttackOutcome {
  LabeledExample original;
  Document adversarial;
  bool success = false;
  bool skipped = false;
  std::vector<std::size_t> perturbed_indices;  // ascending
  double similarity = 0.0;
  std::size_t queries = 0;
  Label predicted_before = 0;
  Label predicted_after = 0;
};

struct AttackSummary {
  std::size_t requested = 0;
  std::size_t sampled = 0;
  std::size_t correct = 0;
  std::size_t skipped = 0;
  std::size_t attacked = 0;
  std::size_t successes = 0;
  std::size_t failures = 0;
  std::size_t total_queries = 0;
  std::size_t total_perturbed = 0;
  double clean_accuracy = 0.0;           // correct / sampled
  double robust_accuracy = 0.0;          // failures / attacked
  double robust_accuracy_overall = 0.0;  // failures / sampled
  double success_rate = 0.0;             // successes / attacked
  double mean_queries = 0.0;             // over sampled
  double mean_perturbed_words = 0.0;     // over successes
  double mean_similarity = 0.0;          // over successes
};

struct CorpusAttack {
  std::vector<AttackOutcome> outcomes;
  AttackSummary summary;
};

AttackSummary summarize(std::span<const AttackOutcome> outcomes, std::size_t requested);

class Attacker {
 public:
  Attacker(const EmbeddingTable& table, const SentenceEncoder& encoder, AttackConfig config);

  const AttackConfig& config() const { return config_; }
  const EmbeddingTable& table() const { return table_; }
  const SentenceEncoder& encoder() const { return encoder_; }

  // nullopt when the word is out of vocabulary or no candidate clears min_word_cos.
  std::optional<Replacement> perturb_word(const ClassifierModel& model, const Document& x_prime,
                                          std::size_t i, Label y) const;

  AttackOutcome generate(const ClassifierModel& model, const LabeledExample& example) const;

  // Attacks min(n, size) examples drawn by a seeded shuffle. Outcomes are in
  // sample order regardless of thread count.
  CorpusAttack attack_corpus(const ClassifierModel& model, std::span<const LabeledExample> dataset,
                             std::size_t n, std::uint64_t seed, std::size_t threads = 1) const;

 private:
  const EmbeddingTable& table_;
  const SentenceEncoder& encoder_;
  AttackConfig config_;
};

AttackOutcome generate_adversarial(const ClassifierModel& model, const EmbeddingTable& table,
                                   const LabeledExample& example, const AttackConfig& config);

std::vector<std::size_t> sample_indices(std::size_t size, std::size_t n, std::uint64_t seed);

}  // namespace advtext
