#ifndef GIBBSLAB_DENSITY_HPP
#define GIBBSLAB_DENSITY_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gibbslab {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

enum class Family {
  exponential,  // rate
  gamma_law,    // shape, scale
  power_law,    // coeff * x^exponent on [0, hi]
  uniform,      // flat on [lo, hi]
  shell,        // indicator of (center - width/2, center + width/2] / width
};

const char* family_name(Family family) noexcept;

// One-dimensional density on a compact support [lo, hi], lo >= 0. Either an
// analytic family or a uniform grid of log-density values. Instances are
// immutable; every operation returns a new value. The density evaluates as
// shape(x) / norm_const, where shape is the family formula (or the stored
// grid) and norm_const is the cumulative divisor recorded by normalized()
// and scaled_mass().
class Density1D {
public:
  static Density1D exponential(double rate, std::optional<Interval> support = std::nullopt);
  static Density1D gamma(double shape, double scale,
                         std::optional<Interval> support = std::nullopt);
  static Density1D power_law(double coeff, double exponent, double upper);
  static Density1D uniform(double lo, double hi);
  static Density1D shell_indicator(double center, double width);
  static Density1D from_grid(Interval support, std::vector<double> log_values);
  static Density1D from_log_function(Interval support, std::size_t points,
                                     const std::function<double(double)>& log_f);

  bool is_grid() const { return grid_; }
  Family family() const;
  Interval support() const { return support_; }
  double norm_const() const { return norm_const_; }

  double pdf(double x) const;
  double log_pdf(double x) const;  // -inf where the density vanishes

  // Integral of the density as currently scaled, over the support.
  double integrate() const;

  // Returns the same shape rescaled to unit mass; the divisor accumulates
  // into norm_const. integral_out receives the integral of the input.
  Density1D normalized(double* integral_out = nullptr) const;

  // Multiplies the density by c > 0 (deliberately un-normalizing it).
  Density1D scaled_mass(double c) const;

  // Law of s * X for s > 0.
  Density1D scaled_variable(double s) const;

  // d/dy log pdf at y strictly inside the support. Analytic families use the
  // closed form; grids use fourth-order finite differences on the log values.
  double log_derivative(double y) const;

  // E[X^order] under the density as currently scaled.
  double moment(int order) const;

  // Normalized CDF at x (independent of norm_const).
  double cdf(double x) const;

  double neg_log_norm() const;

  // KL divergence of f from g over the support of f; g may be unnormalized.
  // f must be normalized for the result to be a divergence.
  static double kl_divergence(const Density1D& f, const Density1D& g);

  // Total variation distance between two grid densities on the same grid.
  static double tv_distance(const Density1D& a, const Density1D& b);

  std::string to_json() const;
  class JsonValue to_json_value() const;
  static Density1D from_json(const std::string& text);

  // Grid accessors (throw for analytic densities).
  std::size_t grid_points() const;
  double grid_x(std::size_t i) const;
  double grid_dx() const;
  const std::vector<double>& grid_log_values() const;

  // Family parameters (throw for grids).
  double param(int index) const;

private:
  Density1D() = default;
  double log_shape(double x) const;
  double cdf_shape(double x) const;  // unnormalized shape CDF from lo

  bool grid_ = false;
  Family family_ = Family::uniform;
  double params_[2] = {0.0, 0.0};
  Interval support_;
  double norm_const_ = 1.0;
  std::vector<double> log_values_;
};

// Probability mass function on {0, ..., size-1}, stored in log space and
// normalized at construction.
class DiscretePMF {
public:
  static DiscretePMF from_values(const std::vector<double>& values);
  static DiscretePMF from_log_weights(std::vector<double> log_weights);
  static DiscretePMF poisson(double mean, std::optional<std::size_t> size = std::nullopt);
  static DiscretePMF binomial(std::int64_t n, double p);
  static DiscretePMF uniform_upto(std::int64_t n);
  static DiscretePMF point_mass(std::int64_t k, std::size_t size);
  // p(k) proportional to 1/k!, the indiscriminate-counting prior.
  static DiscretePMF inverse_factorial(std::size_t size);

  std::size_t size() const { return log_p_.size(); }
  double p(std::int64_t k) const;
  double log_p(std::int64_t k) const;  // -inf outside the support
  double sum() const;
  double mean() const;

  static double tv_distance(const DiscretePMF& a, const DiscretePMF& b);
  static double kl_divergence(const DiscretePMF& a, const DiscretePMF& b);

  std::string to_json() const;

private:
  std::vector<double> log_p_;
};

}  // namespace gibbslab

#endif
