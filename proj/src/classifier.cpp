#include "advtext/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "advtext/error.hpp"

namespace advtext {

Label argmax_label(const ProbVector& p) { return static_cast<Label>(argmax(p)); }

Label predict(const ClassifierModel& model, const Document& doc) {
  return argmax_label(model.predict_proba(doc));
}

double cross_entropy(const ProbVector& p, Label y) {
  if (y >= static_cast<Label>(p.size())) {
    throw InvalidArgument("cross_entropy: label " + std::to_string(y) + " outside [0, " +
                          std::to_string(p.size()) + ")");
  }
  return -std::log(p(static_cast<Eigen::Index>(y)) + 1e-12);
}

void TrainableModel::set_parameters(const Eigen::Ref<const Eigen::VectorXd>& theta) {
  if (theta.size() != theta_.size()) throw InvalidArgument("set_parameters: size mismatch");
  theta_ = theta;
}

double TrainableModel::loss(std::span<const WeightedExample> batch, Eigen::VectorXd* grad) const {
  if (batch.empty()) return 0.0;
  if (grad && grad->size() != theta_.size()) *grad = Eigen::VectorXd::Zero(theta_.size());
  const double inv = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const auto& item : batch) {
    if (item.weight == 0.0) continue;
    if (item.example->label >= class_count()) {
      throw InvalidArgument("training label " + std::to_string(item.example->label) +
                            " outside the model's class range");
    }
    total += item.weight * example_loss(item.example->document, item.example->label,
                                        item.weight * inv, grad);
  }
  return total * inv;
}

std::unique_ptr<TrainableModel> make_model(std::shared_ptr<const EmbeddingTable> table,
                                           std::size_t classes, std::uint64_t seed,
                                           const ModelOptions& options) {
  switch (options.kind) {
    case ModelKind::BagOfEmbeddings:
      return std::make_unique<BagOfEmbeddingsModel>(std::move(table), classes, seed,
                                                    options.truncate_last);
    case ModelKind::ChunkedPooling:
      return std::make_unique<ChunkedPoolingModel>(std::move(table), classes, seed, options.chunk_size,
                                                   options.overlap, options.filters, options.width);
  }
  throw InvalidArgument("unknown model kind");
}

TrainBatchReport train_batch(TrainableModel& model, std::span<const WeightedExample> batch,
                             Adam<double>& optimizer) {
  if (batch.empty()) throw InvalidArgument("train_batch: empty batch");
  TrainBatchReport report;
  report.examples = batch.size();
  const bool any_weight = std::any_of(batch.begin(), batch.end(),
                                      [](const WeightedExample& e) { return e.weight != 0.0; });
  if (!any_weight) return report;

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(model.parameter_count());
  report.mean_loss = model.loss(batch, &grad);
  report.gradient_norm = grad.norm();
  Eigen::VectorXd theta = model.parameters();
  optimizer.step(theta, grad);
  model.set_parameters(theta);
  return report;
}

FiniteDiffReport finite_diff_check(TrainableModel& model, std::span<const WeightedExample> batch,
                                   double step, std::size_t max_params, std::uint64_t seed) {
  FiniteDiffReport report;
  const Eigen::Index p = model.parameter_count();
  if (p == 0 || batch.empty()) return report;

  const Eigen::VectorXd theta = model.parameters();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(p);
  model.loss(batch, &grad);

  std::vector<Eigen::Index> probe(static_cast<std::size_t>(p));
  std::iota(probe.begin(), probe.end(), Eigen::Index{0});
  if (probe.size() > max_params) {
    std::mt19937_64 rng(seed);
    std::shuffle(probe.begin(), probe.end(), rng);
    probe.resize(max_params);
    std::sort(probe.begin(), probe.end());
  }

  std::vector<std::vector<Eigen::Index>> base_pattern;
  for (const auto& item : batch) base_pattern.push_back(model.pooling_pattern(item.example->document));
  auto pattern_moved = [&] {
    for (std::size_t b = 0; b < batch.size(); ++b) {
      if (model.pooling_pattern(batch[b].example->document) != base_pattern[b]) return true;
    }
    return false;
  };

  Eigen::VectorXd probe_theta = theta;
  for (Eigen::Index j : probe) {
    probe_theta(j) = theta(j) + step;
    model.set_parameters(probe_theta);
    const double up = model.loss(batch, nullptr);
    bool moved = pattern_moved();
    probe_theta(j) = theta(j) - step;
    model.set_parameters(probe_theta);
    const double down = model.loss(batch, nullptr);
    moved = moved || pattern_moved();
    probe_theta(j) = theta(j);
    if (moved) {
      ++report.excluded;
      continue;
    }
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(numeric), std::abs(grad(j)), 1e-6});
    report.max_relative_error = std::max(report.max_relative_error, std::abs(numeric - grad(j)) / denom);
    ++report.checked;
  }
  model.set_parameters(theta);
  return report;
}

}  // namespace advtext
