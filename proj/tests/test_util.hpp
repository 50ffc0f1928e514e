#pragma once

// Shared oracles for the test suites. Everything here is deliberately
// independent of the library's numeric kernels: straight-line loops instead
// of batched linear algebra, plain std::exp instead of the library's fused
// activation, so that agreement between the two is meaningful.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "otmap/icnn.hpp"

namespace otmap::testutil {

struct PropertyFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void expect(bool ok, const std::string& message) {
  if (!ok) throw PropertyFailure(message);
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// Reference ICNN forward pass: scalar loops, no Eigen expressions, ELU via
// plain exp.
inline double reference_forward(const IcnnParams& p,
                                const Eigen::VectorXd& x) {
  const auto& arch = p.arch;
  std::vector<double> prev;
  std::vector<double> cur;
  for (int k = 0; k < arch.depth; ++k) {
    const int out = arch.layer_output_dim(k);
    cur.assign(static_cast<std::size_t>(out), 0.0);
    for (int r = 0; r < out; ++r) {
      double z = p.biases[k](r);
      for (int c = 0; c < arch.input_dim; ++c) {
        z += p.skip_weights[k](r, c) * x(c);
      }
      if (k >= 1) {
        for (int c = 0; c < arch.width; ++c) {
          z += p.nonneg_weights[k - 1](r, c) * prev[static_cast<std::size_t>(c)];
        }
      }
      cur[static_cast<std::size_t>(r)] = z;
    }
    if (k == arch.depth - 1) return cur[0];
    prev.assign(cur.size(), 0.0);
    for (std::size_t r = 0; r < cur.size(); ++r) {
      const double z = cur[r];
      prev[r] = z >= 0.0 ? z : arch.activation_alpha * (std::exp(z) - 1.0);
    }
  }
  throw std::logic_error("reference_forward: unreachable");
}

// Pointers to every parameter entry in a fixed documented order (layer by
// layer: skip row-major, nonneg row-major, bias), for finite differences.
inline std::vector<double*> param_entry_pointers(IcnnParams& p) {
  std::vector<double*> out;
  for (int k = 0; k < p.arch.depth; ++k) {
    auto& W = p.skip_weights[k];
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      for (Eigen::Index c = 0; c < W.cols(); ++c) out.push_back(&W(r, c));
    }
    if (k >= 1) {
      auto& A = p.nonneg_weights[k - 1];
      for (Eigen::Index r = 0; r < A.rows(); ++r) {
        for (Eigen::Index c = 0; c < A.cols(); ++c) out.push_back(&A(r, c));
      }
    }
    auto& b = p.biases[k];
    for (Eigen::Index r = 0; r < b.size(); ++r) out.push_back(&b(r));
  }
  return out;
}

inline std::vector<const double*> grad_entry_pointers(
    const ParamGradient& g, const IcnnArch& arch) {
  std::vector<const double*> out;
  for (int k = 0; k < arch.depth; ++k) {
    const auto& W = g.skip_weights[k];
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      for (Eigen::Index c = 0; c < W.cols(); ++c) out.push_back(&W(r, c));
    }
    if (k >= 1) {
      const auto& A = g.nonneg_weights[k - 1];
      for (Eigen::Index r = 0; r < A.rows(); ++r) {
        for (Eigen::Index c = 0; c < A.cols(); ++c) out.push_back(&A(r, c));
      }
    }
    const auto& b = g.biases[k];
    for (Eigen::Index r = 0; r < b.size(); ++r) out.push_back(&b(r));
  }
  return out;
}

// Central finite difference d f / d t at t = *slot. Restores *slot.
inline double central_diff(double* slot, double h,
                           const std::function<double()>& f) {
  const double saved = *slot;
  *slot = saved + h;
  const double up = f();
  *slot = saved - h;
  const double down = f();
  *slot = saved;
  return (up - down) / (2.0 * h);
}

// Adaptive Simpson quadrature with absolute tolerance.
namespace detail {
inline double simpson(const std::function<double(double)>& f, double a,
                      double fa, double b, double fb, double m, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double fa, double b, double fb,
                                   double m, double fm, double whole,
                                   double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, lm, flm);
  const double right = simpson(f, m, fm, b, fb, rm, frm);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol,
                              depth - 1) +
         adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol,
                              depth - 1);
}
}  // namespace detail

inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double tol) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = detail::simpson(f, a, fa, b, fb, m, fm);
  return detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol,
                                      40);
}

inline double normal_pdf(double t) {
  return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
}

// t(6) density 15 / (16 sqrt 6) * (1 + t^2/6)^(-7/2).
inline double t6_pdf(double t) {
  const double base = 1.0 + t * t / 6.0;
  return 15.0 / (16.0 * std::sqrt(6.0)) * std::pow(base, -3.5);
}

// Quadrature CDF oracle built from the symmetric density: F(z) = 1/2 +
// sign(z) * integral_0^|z| pdf. Avoids any tail truncation.
inline double quadrature_cdf(const std::function<double(double)>& pdf,
                             double z, double tol = 1e-12) {
  const double body = adaptive_simpson(pdf, 0.0, std::abs(z), tol);
  return 0.5 + (z >= 0.0 ? body : -body);
}

// Two-sided Kolmogorov-Smirnov statistic of values against U(0,1).
inline double ks_statistic_uniform(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const auto n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double hi = (static_cast<double>(i) + 1.0) / n - u[i];
    const double lo = u[i] - static_cast<double>(i) / n;
    d = std::max({d, hi, lo});
  }
  return d;
}

inline IcnnParams zero_icnn(const IcnnArch& arch) {
  IcnnParams p;
  p.arch = arch;
  for (int k = 0; k < arch.depth; ++k) {
    const int out = arch.layer_output_dim(k);
    p.skip_weights.emplace_back(Eigen::MatrixXd::Zero(out, arch.input_dim));
    if (k >= 1) {
      p.nonneg_weights.emplace_back(Eigen::MatrixXd::Zero(out, arch.width));
    }
    p.biases.emplace_back(Eigen::VectorXd::Zero(out));
  }
  return p;
}

}  // namespace otmap::testutil
