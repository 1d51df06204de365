#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "advtext/attack.hpp"
#include "advtext/classifier.hpp"
#include "advtext/text.hpp"

namespace advtext {

struct Corpus {
  std::string name;
  std::size_t class_count = 0;
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> dev;
  std::vector<LabeledExample> test;
  std::vector<std::string> warnings;

  const std::vector<LabeledExample>& split(std::string_view which) const;
};

// One {"text", "label"} object per line; blank lines are skipped.
std::vector<LabeledExample> read_jsonl(std::istream& in, const std::string& source_name);
std::vector<LabeledExample> read_jsonl(const std::filesystem::path& path);
void write_jsonl(std::ostream& out, std::span<const LabeledExample> examples);

// Reads train.jsonl, dev.jsonl and test.jsonl; C = max label + 1.
Corpus load_corpus(const std::filesystem::path& dir);
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

struct SynthSpec {
  std::size_t train = 2000;
  std::size_t dev = 200;
  std::size_t test = 500;
  std::uint64_t seed = 0;
  double noise = 0.0;  // probability of flipping a label

  std::size_t filler_words = 150;
  std::size_t filler_dim = 40;
  std::size_t keywords_per_class = 32;
  std::size_t synonyms_per_keyword = 5;  // one close, the rest drifted
  std::size_t min_filler = 15;
  std::size_t max_filler = 40;

  // Geometry of the synonym clusters (see synth.cpp).
  double close_cos = 0.9;
  double close_register = 0.2;
  double drift_cos = 0.81;
  double drift_toward_other = 0.36;
  double register_share = 0.9;
  std::size_t register_dims = 16;
  std::size_t close_register_dims = 2;

  void validate() const;
};

struct SyntheticCorpus {
  Corpus corpus;
  std::string embeddings;  // word2vec text format
  std::vector<std::vector<std::string>> keywords;  // per class
  std::vector<std::string> filler;
};

SyntheticCorpus generate_synthetic_corpus(const SynthSpec& spec);

double evaluate_accuracy(const ClassifierModel& model, std::span<const LabeledExample> examples);

struct RobustnessReport {
  std::string split = "test";
  std::size_t requested = 0;
  std::size_t used = 0;
  bool whole_split = false;
  std::uint64_t seed = 0;
  AttackSummary summary;
};

RobustnessReport evaluate_robustness(const ClassifierModel& model, const Attacker& attacker,
                                     std::span<const LabeledExample> split, std::size_t n, std::uint64_t seed,
                                     std::size_t threads = 1, std::vector<AttackOutcome>* outcomes = nullptr);

struct LengthStats {
  std::string split;
  std::size_t documents = 0;
  double mean = 0.0;
  double median = 0.0;
  std::size_t min = 0;
  std::size_t max = 0;
  std::size_t bucket_width = 100;
  std::map<std::size_t, std::size_t> buckets;  // bucket start -> count
};

LengthStats length_stats(std::string_view split, std::span<const LabeledExample> examples,
                         std::size_t bucket_width = 100);
std::vector<LengthStats> length_stats(const Corpus& corpus, std::size_t bucket_width = 100);

}  // namespace advtext
