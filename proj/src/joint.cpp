#include "gibbslab/joint.hpp"

#include <cmath>
#include <limits>

#include "gibbslab/error.hpp"
#include "gibbslab/numerics.hpp"

namespace gibbslab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFiniteDifferenceStep = 1e-5;

double standard_normal_log_pdf(double z) {
  return -0.5 * z * z - 0.91893853320467274178;  // ln sqrt(2 pi)
}

// Normal score of a probability, extended to +-inf at the endpoints so the
// copula code can classify boundary evaluations itself.
double normal_score(double u) {
  if (u <= 0.0) return -kInf;
  if (u >= 1.0) return kInf;
  return normal_quantile(u);
}
}  // namespace

JointLaw JointLaw::independent(Density1D x_marginal, Density1D y_marginal) {
  JointLaw j;
  j.x_ = std::move(x_marginal);
  j.y_ = std::move(y_marginal);
  j.coupling_ = Coupling::independent;
  return j;
}

JointLaw JointLaw::additive_shift(Density1D x_marginal, Density1D y_marginal,
                                  double shift) {
  require(std::isfinite(shift), ErrorCode::invalid_argument, "shift must be finite");
  JointLaw j;
  j.x_ = std::move(x_marginal);
  j.y_ = std::move(y_marginal);
  j.coupling_ = Coupling::additive_shift;
  j.shift_ = shift;
  return j;
}

JointLaw JointLaw::gaussian_copula(Density1D x_marginal, Density1D y_marginal,
                                   double rho) {
  require(rho > -1.0 && rho < 1.0, ErrorCode::invalid_argument,
          "copula correlation must lie in (-1, 1)");
  JointLaw j;
  j.x_ = std::move(x_marginal);
  j.y_ = std::move(y_marginal);
  j.coupling_ = Coupling::gaussian_copula;
  j.rho_ = rho;
  return j;
}

JointLaw JointLaw::custom(Density1D x_marginal, Interval y_support,
                          std::function<double(double, double)> log_conditional,
                          bool allow_numerical_partials) {
  require(allow_numerical_partials, ErrorCode::invalid_argument,
          "custom couplings use finite-difference partials and must opt in");
  require(y_support.width() > 0.0, ErrorCode::invalid_argument,
          "conditional support must be non-degenerate");
  JointLaw j;
  j.x_ = std::move(x_marginal);
  j.has_y_marginal_ = false;
  j.coupling_ = Coupling::custom;
  j.custom_y_support_ = y_support;
  j.custom_log_conditional_ = std::move(log_conditional);
  return j;
}

const Density1D& JointLaw::y_marginal() const {
  require(has_y_marginal_, ErrorCode::invalid_argument,
          "custom couplings carry no bath marginal");
  return y_;
}

double JointLaw::shift() const {
  require(coupling_ == Coupling::additive_shift, ErrorCode::invalid_argument,
          "shift is defined for additive-shift couplings only");
  return shift_;
}

double JointLaw::rho() const {
  require(coupling_ == Coupling::gaussian_copula, ErrorCode::invalid_argument,
          "rho is defined for copula couplings only");
  return rho_;
}

Interval JointLaw::y_support(double x) const {
  switch (coupling_) {
    case Coupling::independent:
    case Coupling::gaussian_copula:
      return y_.support();
    case Coupling::additive_shift:
      return Interval{y_.support().lo + shift_ * x, y_.support().hi + shift_ * x};
    case Coupling::custom:
      return custom_y_support_;
  }
  return y_.support();
}

void JointLaw::require_copula_interior(double z1, double z2) const {
  require(std::isfinite(z1) && std::isfinite(z2), ErrorCode::boundary_evaluation,
          "copula coupling is evaluated at a support endpoint where the "
          "transformed coordinate diverges");
}

double JointLaw::log_conditional(double y, double x) const {
  switch (coupling_) {
    case Coupling::independent:
      return y_.log_pdf(y);
    case Coupling::additive_shift:
      return y_.log_pdf(y - shift_ * x);
    case Coupling::gaussian_copula: {
      const double ly = y_.log_pdf(y);
      if (ly == -kInf) return -kInf;
      if (rho_ == 0.0) return ly;
      const double z1 = normal_score(x_.cdf(x));
      const double z2 = normal_score(y_.cdf(y));
      // At a support endpoint the transformed coordinate diverges and the
      // copula factor tends to zero; return the continuous extension so the
      // conditional stays a proper density. The partials still reject here.
      if (!std::isfinite(z1) || !std::isfinite(z2)) return -kInf;
      const double r2 = rho_ * rho_;
      const double log_copula =
          -0.5 * std::log(1.0 - r2) -
          (r2 * (z1 * z1 + z2 * z2) - 2.0 * rho_ * z1 * z2) / (2.0 * (1.0 - r2));
      return ly + log_copula;
    }
    case Coupling::custom:
      if (y < custom_y_support_.lo || y > custom_y_support_.hi) return -kInf;
      return custom_log_conditional_(y, x);
  }
  return -kInf;
}

std::optional<double> JointLaw::conditional_cdf(double y, double x) const {
  switch (coupling_) {
    case Coupling::independent:
      return y_.cdf(y);
    case Coupling::additive_shift:
      return y_.cdf(y - shift_ * x);
    case Coupling::gaussian_copula:
    case Coupling::custom:
      return std::nullopt;
  }
  return std::nullopt;
}

double JointLaw::d_log_conditional_dy(double y, double x) const {
  switch (coupling_) {
    case Coupling::independent:
      return y_.log_derivative(y);
    case Coupling::additive_shift:
      return y_.log_derivative(y - shift_ * x);
    case Coupling::gaussian_copula: {
      const double z1 = normal_score(x_.cdf(x));
      const double z2 = normal_score(y_.cdf(y));
      require_copula_interior(z1, z2);
      const double dz2_dy = y_.pdf(y) / std::exp(standard_normal_log_pdf(z2));
      return y_.log_derivative(y) +
             rho_ * (z1 - rho_ * z2) / (1.0 - rho_ * rho_) * dz2_dy;
    }
    case Coupling::custom: {
      const double step = kFiniteDifferenceStep;
      return (custom_log_conditional_(y + step, x) -
              custom_log_conditional_(y - step, x)) / (2.0 * step);
    }
  }
  return 0.0;
}

double JointLaw::d_log_conditional_dx(double y, double x) const {
  switch (coupling_) {
    case Coupling::independent:
      return 0.0;
    case Coupling::additive_shift:
      return -shift_ * y_.log_derivative(y - shift_ * x);
    case Coupling::gaussian_copula: {
      const double z1 = normal_score(x_.cdf(x));
      const double z2 = normal_score(y_.cdf(y));
      require_copula_interior(z1, z2);
      const double dz1_dx = x_.pdf(x) / std::exp(standard_normal_log_pdf(z1));
      return rho_ * (z2 - rho_ * z1) / (1.0 - rho_ * rho_) * dz1_dx;
    }
    case Coupling::custom: {
      const double step = kFiniteDifferenceStep;
      return (custom_log_conditional_(y, x + step) -
              custom_log_conditional_(y, x - step)) / (2.0 * step);
    }
  }
  return 0.0;
}

JointLaw JointLaw::with_rescaled_x(double s) const {
  require(s > 0.0 && std::isfinite(s), ErrorCode::invalid_argument,
          "rescaling factor must be positive and finite");
  JointLaw j = *this;
  j.x_ = x_.scaled_variable(s);
  if (coupling_ == Coupling::additive_shift) j.shift_ = shift_ / s;
  require(coupling_ != Coupling::custom, ErrorCode::invalid_argument,
          "custom couplings do not support automatic rescaling");
  return j;
}

}  // namespace gibbslab
