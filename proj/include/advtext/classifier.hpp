#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "advtext/embedding.hpp"
#include "advtext/math.hpp"
#include "advtext/text.hpp"

namespace advtext {

using ProbVector = Eigen::VectorXd;

class ClassifierModel {
 public:
  virtual ~ClassifierModel() = default;
  virtual std::size_t class_count() const = 0;
  virtual ProbVector predict_proba(const Document& doc) const = 0;
};

Label argmax_label(const ProbVector& p);
Label predict(const ClassifierModel& model, const Document& doc);
double cross_entropy(const ProbVector& p, Label y);

// Forwards to another model and counts predict_proba calls.
class QueryCounter : public ClassifierModel {
 public:
  explicit QueryCounter(const ClassifierModel& inner) : inner_(inner) {}
  std::size_t class_count() const override { return inner_.class_count(); }
  ProbVector predict_proba(const Document& doc) const override {
    ++queries_;
    return inner_.predict_proba(doc);
  }
  std::size_t queries() const { return queries_; }

 private:
  const ClassifierModel& inner_;
  mutable std::size_t queries_ = 0;
};

struct WeightedExample {
  const LabeledExample* example = nullptr;
  double weight = 1.0;
};

enum class ModelKind : std::uint8_t { BagOfEmbeddings = 1, ChunkedPooling = 2 };

struct ModelOptions {
  ModelKind kind = ModelKind::BagOfEmbeddings;
  std::size_t truncate_last = 0;  // bag model: keep only the last T tokens; 0 keeps all
  std::size_t chunk_size = 510;
  std::size_t overlap = 100;
  std::size_t filters = 32;
  std::size_t width = 3;
};

// Parameters live in one flat vector; models view it through maps.
class TrainableModel : public ClassifierModel {
 public:
  virtual ModelKind kind() const = 0;
  virtual ModelOptions options() const = 0;
  virtual const EmbeddingTable& embeddings() const = 0;
  virtual std::shared_ptr<const EmbeddingTable> embeddings_ptr() const = 0;

  Eigen::Index parameter_count() const { return theta_.size(); }
  const Eigen::VectorXd& parameters() const { return theta_; }
  void set_parameters(const Eigen::Ref<const Eigen::VectorXd>& theta);

  // (1/|B|) * sum_i w_i * CE_i. Adds the matching gradient into *grad when given.
  double loss(std::span<const WeightedExample> batch, Eigen::VectorXd* grad) const;

  // Argmax positions chosen by any max-pooling stage; empty when none.
  virtual std::vector<Eigen::Index> pooling_pattern(const Document&) const { return {}; }

 protected:
  // Cross-entropy of one example; adds scale * dCE/dtheta into *grad when given.
  virtual double example_loss(const Document& doc, Label y, double scale,
                              Eigen::VectorXd* grad) const = 0;

  Eigen::VectorXd theta_;
};

class BagOfEmbeddingsModel : public TrainableModel {
 public:
  BagOfEmbeddingsModel(std::shared_ptr<const EmbeddingTable> table, std::size_t classes,
                       std::uint64_t seed, std::size_t truncate_last = 0);

  std::size_t class_count() const override { return classes_; }
  ProbVector predict_proba(const Document& doc) const override;
  ModelKind kind() const override { return ModelKind::BagOfEmbeddings; }
  ModelOptions options() const override;
  const EmbeddingTable& embeddings() const override { return *table_; }
  std::shared_ptr<const EmbeddingTable> embeddings_ptr() const override { return table_; }

  Eigen::Map<const Eigen::MatrixXd> weights() const;
  Eigen::Map<const Eigen::VectorXd> bias() const;
  void set_weights(const Eigen::Ref<const Eigen::MatrixXd>& w, const Eigen::Ref<const Eigen::VectorXd>& b);

  // Mean of the unit vectors of in-vocabulary tokens; zero when there are none.
  Eigen::VectorXd features(const Document& doc) const;

 protected:
  double example_loss(const Document& doc, Label y, double scale, Eigen::VectorXd* grad) const override;

 private:
  std::shared_ptr<const EmbeddingTable> table_;
  std::size_t classes_;
  std::size_t truncate_last_;
};

class ChunkedPoolingModel : public TrainableModel {
 public:
  ChunkedPoolingModel(std::shared_ptr<const EmbeddingTable> table, std::size_t classes,
                      std::uint64_t seed, std::size_t chunk_size = 510, std::size_t overlap = 100,
                      std::size_t filters = 32, std::size_t width = 3);

  std::size_t class_count() const override { return classes_; }
  ProbVector predict_proba(const Document& doc) const override;
  ModelKind kind() const override { return ModelKind::ChunkedPooling; }
  ModelOptions options() const override;
  const EmbeddingTable& embeddings() const override { return *table_; }
  std::shared_ptr<const EmbeddingTable> embeddings_ptr() const override { return table_; }
  std::vector<Eigen::Index> pooling_pattern(const Document& doc) const override;

  // Forward pass over an explicit chunk sequence.
  ProbVector forward_chunks(std::span<const Document> chunks) const;

 protected:
  double example_loss(const Document& doc, Label y, double scale, Eigen::VectorXd* grad) const override;

 private:
  struct Forward;
  Forward run(std::span<const Document> chunks) const;

  std::shared_ptr<const EmbeddingTable> table_;
  std::size_t classes_;
  std::size_t chunk_size_, overlap_, filters_, width_;
  Eigen::Index dim_;
};

std::unique_ptr<TrainableModel> make_model(std::shared_ptr<const EmbeddingTable> table,
                                           std::size_t classes, std::uint64_t seed,
                                           const ModelOptions& options);

struct TrainBatchReport {
  double mean_loss = 0.0;
  double gradient_norm = 0.0;
  std::size_t examples = 0;
};

// One Adam step on the weighted mean cross-entropy. A batch whose weights are
// all zero leaves the parameters and optimizer state untouched.
TrainBatchReport train_batch(TrainableModel& model, std::span<const WeightedExample> batch,
                             Adam<double>& optimizer);

struct FiniteDiffReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t excluded = 0;  // parameters whose probe moved a max-pool argmax
};

FiniteDiffReport finite_diff_check(TrainableModel& model, std::span<const WeightedExample> batch,
                                   double step = 1e-5, std::size_t max_params = 200,
                                   std::uint64_t seed = 0);

constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const TrainableModel& model, std::ostream& out);
std::unique_ptr<TrainableModel> load_model(std::istream& in, std::shared_ptr<const EmbeddingTable> table);

}  // namespace advtext
