#ifndef GIBBSLAB_JOINT_HPP
#define GIBBSLAB_JOINT_HPP

#include <functional>
#include <optional>

#include "gibbslab/density.hpp"

namespace gibbslab {

enum class Coupling {
  independent,     // f_{Y|X}(y;x) = f_Y(y)
  additive_shift,  // f_{Y|X}(y;x) = f_Y(y - c x)
  gaussian_copula, // f_Y(y) * copula density at (F_X(x), F_Y(y)), correlation rho
  custom,          // caller-supplied log conditional, finite-difference partials
};

// Pair law for (X, Y): marginal of X plus the conditional of Y given X with
// evaluable partial log-derivatives. The three built-in couplings have closed
// forms; custom couplings use finite differences (step 1e-5) and must be
// opted into explicitly.
class JointLaw {
public:
  static JointLaw independent(Density1D x_marginal, Density1D y_marginal);
  static JointLaw additive_shift(Density1D x_marginal, Density1D y_marginal,
                                 double shift);
  static JointLaw gaussian_copula(Density1D x_marginal, Density1D y_marginal,
                                  double rho);
  // Expert path: log f_{Y|X}(y;x) supplied directly; partials by central
  // finite differences. allow_numerical_partials must be true.
  static JointLaw custom(Density1D x_marginal, Interval y_support,
                         std::function<double(double, double)> log_conditional,
                         bool allow_numerical_partials);

  const Density1D& x_marginal() const { return x_; }
  // Bath marginal; available for the built-in couplings only.
  const Density1D& y_marginal() const;
  Coupling coupling() const { return coupling_; }
  bool is_independent() const { return coupling_ == Coupling::independent; }
  double shift() const;
  double rho() const;

  // Support of Y given X = x.
  Interval y_support(double x) const;

  // ln f_{Y|X}(y; x); -inf outside the conditional support.
  double log_conditional(double y, double x) const;

  // P{Y <= y | X = x} for couplings with a closed-form conditional CDF
  // (independent and additive shift); nullopt otherwise.
  std::optional<double> conditional_cdf(double y, double x) const;

  // Partial log-derivatives of the conditional at (y, x).
  double d_log_conditional_dy(double y, double x) const;
  double d_log_conditional_dx(double y, double x) const;

  // Law of (s X, Y) with the physical coupling preserved: an additive shift c
  // per unit of the original variable becomes c/s per unit of the new one.
  JointLaw with_rescaled_x(double s) const;

private:
  JointLaw() = default;
  void require_copula_interior(double z1, double z2) const;

  Density1D x_ = Density1D::uniform(0.0, 1.0);
  Density1D y_ = Density1D::uniform(0.0, 1.0);
  bool has_y_marginal_ = true;
  Coupling coupling_ = Coupling::independent;
  double shift_ = 0.0;
  double rho_ = 0.0;
  Interval custom_y_support_;
  std::function<double(double, double)> custom_log_conditional_;
};

}  // namespace gibbslab

#endif
