#pragma once

#include <Eigen/Core>

#include "otmap/icnn.hpp"

namespace otmap {

// A convex potential with batched value and gradient evaluation. Rows of X
// are input points; either output may be null. Implementations may keep
// mutable scratch buffers, so a Potential instance must not be shared
// between threads.
class Potential {
 public:
  virtual ~Potential() = default;

  virtual int input_dim() const = 0;
  virtual void eval(const Eigen::Ref<const Eigen::MatrixXd>& X,
                    Eigen::VectorXd* values, Eigen::MatrixXd* grads) const = 0;

  double value(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

// Network-backed potential. Holds a non-owning pointer to the parameters,
// which must outlive the view and stay fixed in shape while in use.
class IcnnPotential final : public Potential {
 public:
  explicit IcnnPotential(const IcnnParams& params) : params_(&params) {}

  int input_dim() const override { return params_->arch.input_dim; }
  void eval(const Eigen::Ref<const Eigen::MatrixXd>& X,
            Eigen::VectorXd* values, Eigen::MatrixXd* grads) const override;

 private:
  const IcnnParams* params_;
  mutable IcnnWorkspace ws_;
};

// phi(x) = quad/2 |x|^2 + <linear, x>. With quad > 0 its conjugate is known
// in closed form, which makes it a convenient exact reference potential.
class QuadraticPotential final : public Potential {
 public:
  QuadraticPotential(double quad, Eigen::VectorXd linear);

  int input_dim() const override {
    return static_cast<int>(linear_.size());
  }
  void eval(const Eigen::Ref<const Eigen::MatrixXd>& X,
            Eigen::VectorXd* values, Eigen::MatrixXd* grads) const override;

  double quad() const { return quad_; }
  const Eigen::VectorXd& linear() const { return linear_; }

 private:
  double quad_;
  Eigen::VectorXd linear_;
};

}  // namespace otmap
