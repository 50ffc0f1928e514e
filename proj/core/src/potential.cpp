#include "otmap/potential.hpp"

#include <cmath>
#include <stdexcept>

namespace otmap {

double Potential::value(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd v(1);
  eval(x.transpose(), &v, nullptr);
  return v(0);
}

Eigen::VectorXd Potential::gradient(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::MatrixXd g;
  eval(x.transpose(), nullptr, &g);
  return g.row(0).transpose();
}

void IcnnPotential::eval(const Eigen::Ref<const Eigen::MatrixXd>& X,
                         Eigen::VectorXd* values,
                         Eigen::MatrixXd* grads) const {
  icnn_eval_batch(*params_, X, values, grads, ws_);
}

QuadraticPotential::QuadraticPotential(double quad, Eigen::VectorXd linear)
    : quad_(quad), linear_(std::move(linear)) {
  if (!std::isfinite(quad_) || !linear_.allFinite() || linear_.size() == 0) {
    throw std::invalid_argument(
        "QuadraticPotential: coefficients must be finite and non-empty");
  }
}

void QuadraticPotential::eval(const Eigen::Ref<const Eigen::MatrixXd>& X,
                              Eigen::VectorXd* values,
                              Eigen::MatrixXd* grads) const {
  if (X.cols() != linear_.size()) {
    throw std::invalid_argument("QuadraticPotential: dimension mismatch");
  }
  if (values != nullptr) {
    values->noalias() = X * linear_;
    *values += 0.5 * quad_ * X.rowwise().squaredNorm();
  }
  if (grads != nullptr) {
    *grads = quad_ * X;
    grads->rowwise() += linear_.transpose();
  }
}

}  // namespace otmap
