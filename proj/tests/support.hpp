#pragma once

// Shared fixtures and independent oracles for the test binaries.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "advtext/attack.hpp"
#include "advtext/classifier.hpp"
#include "advtext/corpus.hpp"
#include "advtext/embedding.hpp"
#include "advtext/text.hpp"

namespace testing_support {

using namespace advtext;

inline Document doc(std::initializer_list<const char*> words) {
  std::vector<std::string> w;
  for (const char* s : words) w.emplace_back(s);
  return Document(std::move(w));
}

inline std::shared_ptr<EmbeddingTable> make_table(
    const std::vector<std::pair<std::string, std::vector<double>>>& entries) {
  std::vector<std::string> words;
  Eigen::MatrixXd vectors(static_cast<Eigen::Index>(entries.front().second.size()),
                          static_cast<Eigen::Index>(entries.size()));
  for (std::size_t j = 0; j < entries.size(); ++j) {
    words.push_back(entries[j].first);
    for (std::size_t i = 0; i < entries[j].second.size(); ++i) {
      vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = entries[j].second[i];
    }
  }
  return std::make_shared<EmbeddingTable>(std::move(words), std::move(vectors));
}

// Returns fixed probabilities per detokenized text, with a fallback.
class ScriptedModel : public ClassifierModel {
 public:
  explicit ScriptedModel(ProbVector fallback) : fallback_(std::move(fallback)) {}
  void set(const Document& d, ProbVector p) { table_[detokenize(d)] = std::move(p); }
  std::size_t class_count() const override { return static_cast<std::size_t>(fallback_.size()); }
  ProbVector predict_proba(const Document& d) const override {
    auto it = table_.find(detokenize(d));
    return it == table_.end() ? fallback_ : it->second;
  }

 private:
  ProbVector fallback_;
  std::map<std::string, ProbVector> table_;
};

inline ProbVector probs(std::initializer_list<double> values) {
  ProbVector p(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) p(i++) = v;
  return p;
}

// Importance recomputed from scratch by explicit deletion and full sort.
inline std::vector<std::pair<std::size_t, double>> brute_force_ranking(const ClassifierModel& model,
                                                                       const Document& x, Label y,
                                                                       std::size_t k) {
  const ProbVector base = model.predict_proba(x);
  std::vector<std::pair<std::size_t, double>> scored;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<std::string> rest;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j != i) rest.push_back(x[j]);
    }
    const ProbVector after = model.predict_proba(Document(rest));
    Eigen::Index top = 0;
    for (Eigen::Index c = 1; c < after.size(); ++c) {
      if (after(c) > after(top)) top = c;
    }
    const auto yi = static_cast<Eigen::Index>(y);
    double score = base(yi) - after(yi);
    if (top != yi) score = (base(yi) - after(yi)) + (after(top) - base(top));
    scored.emplace_back(i, score);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  scored.resize(std::min(k, scored.size()));
  return scored;
}

struct ReferenceOutcome {
  bool skipped = false;
  bool success = false;
  std::vector<std::string> adversarial;
  std::vector<std::size_t> perturbed;
  double similarity = 0.0;
};

inline Eigen::VectorXd reference_encoding(const EmbeddingTable& table, const std::vector<std::string>& words) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(table.dimension());
  int hits = 0;
  for (const auto& w : words) {
    for (std::size_t j = 0; j < table.size(); ++j) {
      if (table.word(static_cast<Eigen::Index>(j)) == w) {
        sum += table.vectors().col(static_cast<Eigen::Index>(j));
        ++hits;
        break;
      }
    }
  }
  return hits ? Eigen::VectorXd(sum / hits) : sum;
}

inline double reference_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.norm() == 0.0 || b.norm() == 0.0) return 0.0;
  return std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0);
}

// Lines 3-14 of the greedy generator written out without library attack code.
inline ReferenceOutcome reference_attack(const ClassifierModel& model, const EmbeddingTable& table,
                                         const Document& x, Label y, const AttackConfig& cfg) {
  ReferenceOutcome out;
  std::vector<std::string> original(x.words().begin(), x.words().end());
  out.adversarial = original;
  auto predict_words = [&](const std::vector<std::string>& w) { return model.predict_proba(Document(w)); };
  auto top_label = [](const ProbVector& p) {
    Eigen::Index t = 0;
    for (Eigen::Index c = 1; c < p.size(); ++c) {
      if (p(c) > p(t)) t = c;
    }
    return static_cast<Label>(t);
  };
  const Eigen::VectorXd original_code = reference_encoding(table, original);
  out.similarity = reference_similarity(original_code, original_code);
  if (top_label(predict_words(original)) != y) {
    out.skipped = true;
    return out;
  }
  if (original.size() < 2) return out;

  const auto ranking = brute_force_ranking(model, x, y, cfg.k);
  for (const auto& [i, score] : ranking) {
    (void)score;
    // Synonyms: full scan, descending cosine, ties by word.
    Eigen::Index self = -1;
    for (std::size_t j = 0; j < table.size(); ++j) {
      if (table.word(static_cast<Eigen::Index>(j)) == out.adversarial[i]) self = static_cast<Eigen::Index>(j);
    }
    if (self < 0) continue;
    std::vector<std::pair<double, std::string>> cands;
    for (std::size_t j = 0; j < table.size(); ++j) {
      if (static_cast<Eigen::Index>(j) == self) continue;
      double c = table.vectors().col(self).dot(table.vectors().col(static_cast<Eigen::Index>(j)));
      cands.emplace_back(std::clamp(c, -1.0, 1.0), table.word(static_cast<Eigen::Index>(j)));
    }
    std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    if (cands.size() > cfg.m) cands.resize(cfg.m);

    bool have = false;
    double best_p = 0.0, best_cos = 0.0;
    std::string best_word;
    for (const auto& [c, w] : cands) {
      if (c < cfg.min_word_cos) continue;
      auto trial = out.adversarial;
      trial[i] = w;
      const double p = predict_words(trial)(static_cast<Eigen::Index>(y));
      if (!have || p < best_p || (p == best_p && (c > best_cos || (c == best_cos && w < best_word)))) {
        have = true;
        best_p = p;
        best_cos = c;
        best_word = w;
      }
    }
    if (!have) continue;
    auto xp = out.adversarial;
    xp[i] = best_word;
    if (top_label(predict_words(xp)) == y) continue;
    if (reference_similarity(reference_encoding(table, xp), original_code) > cfg.threshold) {
      out.adversarial = xp;
      out.perturbed.push_back(i);
    }
  }
  std::sort(out.perturbed.begin(), out.perturbed.end());
  out.success = top_label(predict_words(out.adversarial)) != y;
  out.similarity = reference_similarity(reference_encoding(table, out.adversarial), original_code);
  return out;
}

struct RandomInstance {
  std::shared_ptr<EmbeddingTable> table;
  std::unique_ptr<BagOfEmbeddingsModel> model;
  LabeledExample example;
};

// Small vocabularies with clustered vectors so synonyms clear the word gate
// and strong random weights so single swaps flip predictions.
inline RandomInstance random_instance(std::uint64_t seed, std::size_t max_len) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const int dim = 3 + static_cast<int>(rng() % 3);
  const std::size_t centers = 3 + rng() % 3;
  std::vector<std::pair<std::string, std::vector<double>>> entries;
  for (std::size_t c = 0; c < centers; ++c) {
    std::vector<double> center(static_cast<std::size_t>(dim));
    for (auto& x : center) x = g(rng);
    for (std::size_t k = 0, members = 2 + rng() % 3; k < members; ++k) {
      std::vector<double> v = center;
      for (auto& x : v) x += 0.35 * g(rng);
      entries.push_back({"c" + std::to_string(c) + "m" + std::to_string(k), v});
    }
  }
  RandomInstance inst;
  inst.table = make_table(entries);
  inst.model = std::make_unique<BagOfEmbeddingsModel>(inst.table, 2, seed);
  Eigen::MatrixXd w(2, dim);
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = 4.0 * g(rng);
  std::vector<std::string> words;
  const std::size_t n = 2 + rng() % (max_len - 1);
  for (std::size_t i = 0; i < n; ++i) {
    words.push_back(rng() % 10 == 0 ? "unknown" : entries[rng() % entries.size()].first);
  }
  Document d(words);
  // bias puts the document a small margin from the decision boundary
  inst.model->set_weights(w, Eigen::Vector2d::Zero());
  const Eigen::VectorXd f = inst.model->features(d);
  const double margin = (w.row(0) - w.row(1)).dot(f);
  const double delta = (rng() % 2 ? 1.0 : -1.0) * (0.05 + 0.4 * std::abs(g(rng)));
  inst.model->set_weights(w, Eigen::Vector2d(delta - margin, 0.0));
  // label it with the model's own prediction most of the time so it is attackable
  inst.example = {d, rng() % 5 == 0 ? 1 - predict(*inst.model, d) : predict(*inst.model, d)};
  return inst;
}

// Small synthetic corpus shared by tests; 400/100/100 keeps runs short.
inline const SyntheticCorpus& small_synthetic() {
  static const SyntheticCorpus corpus = [] {
    SynthSpec spec;
    spec.train = 400;
    spec.dev = 100;
    spec.test = 100;
    spec.seed = 11;
    return generate_synthetic_corpus(spec);
  }();
  return corpus;
}

inline std::shared_ptr<EmbeddingTable> synthetic_table(const SyntheticCorpus& s) {
  std::istringstream in(s.embeddings);
  return std::make_shared<EmbeddingTable>(load_embeddings(in, "synthetic"));
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("advtext_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing_support
