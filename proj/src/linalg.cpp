#include "c2mab/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace c2mab {

RegressionState::RegressionState(int dim, double gamma) : dim_(dim), gamma_(gamma) {
  if (dim < 1) throw std::invalid_argument("regression dimension must be >= 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("regularizer gamma must be a positive finite number");
  }
  gram_ = gamma * Eigen::MatrixXd::Identity(dim, dim);
  bvec_ = Eigen::VectorXd::Zero(dim);
  theta_ = Eigen::VectorXd::Zero(dim);
  factor_.compute(gram_);
}

void RegressionState::update(const Eigen::Ref<const Eigen::VectorXd>& phi, double outcome,
                             double weight) {
  if (phi.size() != dim_) throw std::invalid_argument("feature dimension mismatch");
  if (!phi.allFinite() || !std::isfinite(outcome)) {
    throw std::invalid_argument("non-finite feature or outcome");
  }
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw std::invalid_argument("update weight must be positive and finite");
  }
  if (phi.norm() > 1.0 + 1e-12) throw std::invalid_argument("feature norm exceeds 1");

  // Fill both triangles from the same product so G stays exactly symmetric.
  for (int i = 0; i < dim_; ++i) {
    const double wi = weight * phi[i];
    for (int j = i; j < dim_; ++j) {
      const double v = wi * phi[j];
      gram_(i, j) += v;
      if (j != i) gram_(j, i) += v;
    }
  }
  bvec_ += (weight * outcome) * phi;
  ++update_count_;
  dirty_ = true;
}

void RegressionState::refresh() const {
  if (!dirty_) return;
  factor_.compute(gram_);
  if (factor_.info() != Eigen::Success) {
    throw std::runtime_error("Cholesky factorization of the Gram matrix failed");
  }
  theta_ = factor_.solve(bvec_);
  dirty_ = false;
}

const Eigen::VectorXd& RegressionState::theta() const {
  refresh();
  return theta_;
}

double RegressionState::ellipsoid_norm(const Eigen::Ref<const Eigen::VectorXd>& phi) const {
  if (phi.size() != dim_) throw std::invalid_argument("feature dimension mismatch");
  if (!phi.allFinite()) throw std::invalid_argument("non-finite feature");
  refresh();
  const Eigen::VectorXd y = factor_.matrixL().solve(phi);
  return y.norm();
}

}  // namespace c2mab
