#include <random>

#include "advtext/classifier.hpp"
#include "advtext/error.hpp"
#include "model_detail.hpp"

namespace advtext {

BagOfEmbeddingsModel::BagOfEmbeddingsModel(std::shared_ptr<const EmbeddingTable> table,
                                           std::size_t classes, std::uint64_t seed,
                                           std::size_t truncate_last)
    : table_(std::move(table)), classes_(classes), truncate_last_(truncate_last) {
  if (!table_) throw InvalidArgument("model requires an embedding table");
  if (classes_ < 2) throw InvalidArgument("model requires at least 2 classes");
  const Eigen::Index c = static_cast<Eigen::Index>(classes_);
  const Eigen::Index d = table_->dimension();
  theta_ = Eigen::VectorXd::Zero(c * d + c);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> init(-0.05, 0.05);
  for (Eigen::Index i = 0; i < c * d; ++i) theta_(i) = init(rng);
}

Eigen::Map<const Eigen::MatrixXd> BagOfEmbeddingsModel::weights() const {
  return {theta_.data(), static_cast<Eigen::Index>(classes_), table_->dimension()};
}

Eigen::Map<const Eigen::VectorXd> BagOfEmbeddingsModel::bias() const {
  const Eigen::Index c = static_cast<Eigen::Index>(classes_);
  return {theta_.data() + c * table_->dimension(), c};
}

void BagOfEmbeddingsModel::set_weights(const Eigen::Ref<const Eigen::MatrixXd>& w,
                                       const Eigen::Ref<const Eigen::VectorXd>& b) {
  const Eigen::Index c = static_cast<Eigen::Index>(classes_);
  const Eigen::Index d = table_->dimension();
  if (w.rows() != c || w.cols() != d || b.size() != c) throw InvalidArgument("set_weights: shape mismatch");
  Eigen::Map<Eigen::MatrixXd>(theta_.data(), c, d) = w;
  theta_.tail(c) = b;
}

ModelOptions BagOfEmbeddingsModel::options() const {
  ModelOptions o;
  o.kind = ModelKind::BagOfEmbeddings;
  o.truncate_last = truncate_last_;
  return o;
}

Eigen::VectorXd BagOfEmbeddingsModel::features(const Document& doc) const {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(table_->dimension());
  const std::size_t first =
      truncate_last_ > 0 && doc.size() > truncate_last_ ? doc.size() - truncate_last_ : 0;
  std::size_t hits = 0;
  for (std::size_t i = first; i < doc.size(); ++i) {
    if (auto id = table_->find(doc[i])) {
      f += table_->vector(*id);
      ++hits;
    }
  }
  if (hits) f /= static_cast<double>(hits);
  return f;
}

ProbVector BagOfEmbeddingsModel::predict_proba(const Document& doc) const {
  return softmax(weights() * features(doc) + bias());
}

double BagOfEmbeddingsModel::example_loss(const Document& doc, Label y, double scale,
                                          Eigen::VectorXd* grad) const {
  const Eigen::VectorXd f = features(doc);
  const ProbVector p = softmax(weights() * f + bias());
  if (grad) {
    const Eigen::Index c = static_cast<Eigen::Index>(classes_);
    const Eigen::Index d = table_->dimension();
    const Eigen::VectorXd g = scale * detail::ce_logit_gradient(p, y);
    Eigen::Map<Eigen::MatrixXd>(grad->data(), c, d).noalias() += g * f.transpose();
    grad->tail(c) += g;
  }
  return cross_entropy(p, y);
}

}  // namespace advtext
