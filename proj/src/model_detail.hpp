#pragma once

#include "advtext/classifier.hpp"

namespace advtext::detail {

// d/dlogits of -log(p_y + 1e-12) for softmax probabilities p.
inline Eigen::VectorXd ce_logit_gradient(const ProbVector& p, Label y) {
  const auto yi = static_cast<Eigen::Index>(y);
  Eigen::VectorXd g = p;
  g(yi) -= 1.0;
  return g * (p(yi) / (p(yi) + 1e-12));
}

}  // namespace advtext::detail
