#ifndef GIBBSLAB_NUMERICS_HPP
#define GIBBSLAB_NUMERICS_HPP

#include <cstddef>
#include <functional>
#include <vector>

namespace gibbslab {

// Log-density values at or below this floor are treated as exact zeros.
inline constexpr double kLogZero = -700.0;

struct QuadratureOptions {
  double abs_tol = 1e-10;
  int max_depth = 50;
  // Depth the interval is forced to before the error estimate may stop the
  // recursion; guards against narrow features invisible to the first panels.
  int min_depth = 4;
  // Absolute rounding noise per unit length expected in the error estimate.
  // A panel whose estimated error is below noise_rate * width has hit the
  // integrand's floating-point floor and refining it further cannot help;
  // 0 disables the floor.
  double noise_rate = 0.0;
};

// Adaptive Simpson with Richardson acceptance on [a, b]. Throws
// ErrorCode::non_integrable when the integrand evaluates non-finite.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        const QuadratureOptions& options = {});

// Trapezoid rule over values sampled on a uniform grid with spacing dx.
double trapezoid_uniform(const std::vector<double>& values, double dx);

// Golden-section maximizer of a unimodal function on [a, b].
// Returns the abscissa of the maximum within abs_tol.
double golden_section_max(const std::function<double(double)>& f, double a, double b,
                          double abs_tol);

// Bisection root of f on [a, b]; requires a sign change. rel_tol is relative
// to the bracket magnitude. Throws ErrorCode::no_solution without a bracket.
double bisect(const std::function<double(double)>& f, double a, double b, double rel_tol);

// log(sum(exp(v))) guarded against overflow; empty input yields -inf.
double log_sum_exp(const std::vector<double>& values);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;   // root-mean-square residual
  double r_squared = 0.0;
  double slope_se = 0.0;   // from the weight model, weighted fits only
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
LineFit fit_line_weighted(const std::vector<double>& x, const std::vector<double>& y,
                          const std::vector<double>& weights);

// Kolmogorov-Smirnov distance between a sample and a CDF. Sorts a copy.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

// Regularized lower incomplete gamma P(a, x) and its complement Q(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Standard normal CDF and quantile (Wichura's PPND16).
double normal_cdf(double x);
double normal_quantile(double p);

// Survival function of the chi-square law with k degrees of freedom.
double chi_square_sf(double x, double k);

}  // namespace gibbslab

#endif
