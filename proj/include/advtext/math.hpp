#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "advtext/error.hpp"

namespace advtext {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Max-subtracted softmax; stable for logits of any magnitude.
template <typename Derived>
Vec<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Vec<Scalar> p = (logits.array() - logits.maxCoeff()).exp().matrix();
  p /= p.sum();
  return p;
}

// Index of the largest entry, lowest index on ties.
template <typename Derived>
Eigen::Index argmax(const Eigen::MatrixBase<Derived>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return best;
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedA>& u,
                                            const Eigen::MatrixBase<DerivedB>& v) {
  using Scalar = typename DerivedA::Scalar;
  if (u.size() != v.size()) throw InvalidArgument("cosine_similarity: dimension mismatch");
  const Scalar nu = u.norm();
  const Scalar nv = v.norm();
  if (nu == Scalar(0) || nv == Scalar(0)) {
    throw InvalidArgument("cosine_similarity: undefined for a zero vector");
  }
  const Scalar c = u.dot(v) / (nu * nv);
  return std::clamp(c, Scalar(-1), Scalar(1));
}

template <typename Scalar>
struct AdamOptions {
  Scalar lr = Scalar(1e-2);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar epsilon = Scalar(1e-8);
};

template <typename Scalar>
class Adam {
 public:
  explicit Adam(AdamOptions<Scalar> options = {}) : opt_(options) {}

  template <typename DerivedP, typename DerivedG>
  void step(Eigen::MatrixBase<DerivedP>& params, const Eigen::MatrixBase<DerivedG>& grad) {
    if (m_.size() != params.size()) {
      m_ = Vec<Scalar>::Zero(params.size());
      v_ = Vec<Scalar>::Zero(params.size());
      t_ = 0;
    }
    ++t_;
    m_ = opt_.beta1 * m_ + (Scalar(1) - opt_.beta1) * grad;
    v_ = opt_.beta2 * v_ + (Scalar(1) - opt_.beta2) * grad.cwiseAbs2();
    const Scalar c1 = Scalar(1) - std::pow(opt_.beta1, Scalar(t_));
    const Scalar c2 = Scalar(1) - std::pow(opt_.beta2, Scalar(t_));
    params.array() -=
        opt_.lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + opt_.epsilon);
  }

  const AdamOptions<Scalar>& options() const { return opt_; }
  long steps() const { return t_; }

 private:
  AdamOptions<Scalar> opt_;
  Vec<Scalar> m_;
  Vec<Scalar> v_;
  long t_ = 0;
};

}  // namespace advtext
