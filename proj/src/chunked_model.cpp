#include <random>

#include "advtext/classifier.hpp"
#include "advtext/error.hpp"
#include "model_detail.hpp"

namespace advtext {

using StridedWindows = Eigen::Map<const Eigen::MatrixXd, 0, Eigen::OuterStride<>>;

struct ChunkedPoolingModel::Forward {
  Eigen::MatrixXd padded;  // d x (L + width - 1), zero columns at both ends
  Eigen::VectorXd pooled;  // F
  std::vector<Eigen::Index> winner;  // argmax time step per filter
  ProbVector p;
};

ChunkedPoolingModel::ChunkedPoolingModel(std::shared_ptr<const EmbeddingTable> table,
                                         std::size_t classes, std::uint64_t seed,
                                         std::size_t chunk_size, std::size_t overlap,
                                         std::size_t filters, std::size_t width)
    : table_(std::move(table)),
      classes_(classes),
      chunk_size_(chunk_size),
      overlap_(overlap),
      filters_(filters),
      width_(width) {
  if (!table_) throw InvalidArgument("model requires an embedding table");
  if (classes_ < 2) throw InvalidArgument("model requires at least 2 classes");
  if (filters_ == 0 || width_ == 0) throw InvalidArgument("filters and width must be positive");
  plan_chunks(0, chunk_size_, overlap_);
  dim_ = table_->dimension();
  const Eigen::Index f = static_cast<Eigen::Index>(filters_);
  const Eigen::Index c = static_cast<Eigen::Index>(classes_);
  const Eigen::Index kw = static_cast<Eigen::Index>(width_) * dim_;
  theta_ = Eigen::VectorXd::Zero(f * kw + f + c * f + c);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> init(-0.05, 0.05);
  for (Eigen::Index i = 0; i < f * kw; ++i) theta_(i) = init(rng);
  const Eigen::Index dense = f * kw + f;
  for (Eigen::Index i = 0; i < c * f; ++i) theta_(dense + i) = init(rng);
}

ModelOptions ChunkedPoolingModel::options() const {
  ModelOptions o;
  o.kind = ModelKind::ChunkedPooling;
  o.chunk_size = chunk_size_;
  o.overlap = overlap_;
  o.filters = filters_;
  o.width = width_;
  return o;
}

ChunkedPoolingModel::Forward ChunkedPoolingModel::run(std::span<const Document> chunks) const {
  const Eigen::Index f = static_cast<Eigen::Index>(filters_);
  const Eigen::Index c = static_cast<Eigen::Index>(classes_);
  const Eigen::Index w = static_cast<Eigen::Index>(width_);
  const Eigen::Index len = static_cast<Eigen::Index>(chunks.size());
  const Eigen::Index left = (w - 1) / 2;

  Forward fw;
  fw.padded = Eigen::MatrixXd::Zero(dim_, len + w - 1);
  for (Eigen::Index t = 0; t < len; ++t) {
    std::size_t hits = 0;
    for (const auto& word : chunks[static_cast<std::size_t>(t)].words()) {
      if (auto id = table_->find(word)) {
        fw.padded.col(left + t) += table_->vector(*id);
        ++hits;
      }
    }
    if (hits) fw.padded.col(left + t) /= static_cast<double>(hits);
  }

  Eigen::Map<const Eigen::MatrixXd> kernels(theta_.data(), f, w * dim_);
  Eigen::Map<const Eigen::VectorXd> conv_bias(theta_.data() + f * w * dim_, f);
  Eigen::Map<const Eigen::MatrixXd> dense(theta_.data() + f * w * dim_ + f, c, f);
  Eigen::Map<const Eigen::VectorXd> dense_bias(theta_.data() + f * w * dim_ + f + c * f, c);

  // Column t of the strided view is the stacked window around time step t.
  StridedWindows windows(fw.padded.data(), w * dim_, len, Eigen::OuterStride<>(dim_));
  Eigen::MatrixXd h = kernels * windows;
  h.colwise() += conv_bias;

  fw.pooled.resize(f);
  fw.winner.resize(static_cast<std::size_t>(f));
  for (Eigen::Index i = 0; i < f; ++i) {
    Eigen::Index best = argmax(h.row(i).transpose());
    fw.winner[static_cast<std::size_t>(i)] = best;
    fw.pooled(i) = h(i, best);
  }
  fw.p = softmax(dense * fw.pooled + dense_bias);
  return fw;
}

ProbVector ChunkedPoolingModel::forward_chunks(std::span<const Document> chunks) const {
  if (chunks.empty()) throw InvalidArgument("forward_chunks: empty chunk sequence");
  return run(chunks).p;
}

ProbVector ChunkedPoolingModel::predict_proba(const Document& doc) const {
  const auto chunks = chunk_document(doc, chunk_size_, overlap_);
  return run(chunks).p;
}

std::vector<Eigen::Index> ChunkedPoolingModel::pooling_pattern(const Document& doc) const {
  const auto chunks = chunk_document(doc, chunk_size_, overlap_);
  return run(chunks).winner;
}

double ChunkedPoolingModel::example_loss(const Document& doc, Label y, double scale,
                                         Eigen::VectorXd* grad) const {
  const auto chunks = chunk_document(doc, chunk_size_, overlap_);
  const Forward fw = run(chunks);
  if (grad) {
    const Eigen::Index f = static_cast<Eigen::Index>(filters_);
    const Eigen::Index c = static_cast<Eigen::Index>(classes_);
    const Eigen::Index kw = static_cast<Eigen::Index>(width_) * dim_;
    Eigen::Map<const Eigen::MatrixXd> dense(theta_.data() + f * kw + f, c, f);

    Eigen::Map<Eigen::MatrixXd> d_kernels(grad->data(), f, kw);
    auto d_conv_bias = grad->segment(f * kw, f);
    Eigen::Map<Eigen::MatrixXd> d_dense(grad->data() + f * kw + f, c, f);
    auto d_dense_bias = grad->segment(f * kw + f + c * f, c);

    const Eigen::VectorXd g = scale * detail::ce_logit_gradient(fw.p, y);
    d_dense.noalias() += g * fw.pooled.transpose();
    d_dense_bias += g;
    const Eigen::VectorXd g_pooled = dense.transpose() * g;
    for (Eigen::Index i = 0; i < f; ++i) {
      const Eigen::Index t = fw.winner[static_cast<std::size_t>(i)];
      d_kernels.row(i) += g_pooled(i) * Eigen::Map<const Eigen::VectorXd>(fw.padded.col(t).data(), kw).transpose();
      d_conv_bias(i) += g_pooled(i);
    }
  }
  return cross_entropy(fw.p, y);
}

}  // namespace advtext
