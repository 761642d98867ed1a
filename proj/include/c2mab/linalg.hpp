#pragma once

#include <Eigen/Dense>

namespace c2mab {

/// Regularized, optionally weighted, ridge-regression state.
///
/// Holds the Gram matrix G = gamma*I + sum_s w_s phi_s phi_s^T, the response
/// vector b = sum_s w_s x_s phi_s, and a cached estimate theta = G^{-1} b.
/// G only ever receives symmetric rank-one additions with positive weights,
/// so its eigenvalues stay >= gamma. A Cholesky factor of G is rebuilt
/// lazily the first time it is needed after an update; G^{-1} is never
/// formed explicitly.
class RegressionState {
 public:
  /// Throws std::invalid_argument for dim < 1 or gamma <= 0.
  RegressionState(int dim, double gamma);

  /// G += weight * phi phi^T, b += weight * outcome * phi.
  /// Rejects non-finite entries, weight <= 0, and ||phi|| > 1 + 1e-12.
  void update(const Eigen::Ref<const Eigen::VectorXd>& phi, double outcome, double weight = 1.0);

  /// Ridge estimate G^{-1} b, cached until the next update.
  const Eigen::VectorXd& theta() const;

  /// sqrt(phi^T G^{-1} phi), via one triangular solve against the factor.
  double ellipsoid_norm(const Eigen::Ref<const Eigen::VectorXd>& phi) const;

  int dim() const { return dim_; }
  double gamma() const { return gamma_; }
  long update_count() const { return update_count_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::VectorXd& bvec() const { return bvec_; }
  bool dirty() const { return dirty_; }

 private:
  void refresh() const;

  int dim_;
  double gamma_;
  long update_count_ = 0;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd bvec_;

  mutable bool dirty_ = false;
  mutable Eigen::LLT<Eigen::MatrixXd> factor_;
  mutable Eigen::VectorXd theta_;
};

}  // namespace c2mab
