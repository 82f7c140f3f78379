#include "gibbslab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gibbslab/error.hpp"

namespace gibbslab {

namespace {

struct SimpsonPanel {
  double fa, fm, fb;
  double estimate;
};

double eval_checked(const std::function<double(double)>& f, double x) {
  const double value = f(x);
  if (!std::isfinite(value)) {
    raise(ErrorCode::non_integrable,
          "integrand evaluated non-finite at x = " + std::to_string(x));
  }
  return value;
}

SimpsonPanel make_panel(const std::function<double(double)>& f, double a, double b) {
  SimpsonPanel panel;
  panel.fa = eval_checked(f, a);
  panel.fm = eval_checked(f, 0.5 * (a + b));
  panel.fb = eval_checked(f, b);
  panel.estimate = (b - a) / 6.0 * (panel.fa + 4.0 * panel.fm + panel.fb);
  return panel;
}

double simpson_recurse(const std::function<double(double)>& f, double a, double b,
                       const SimpsonPanel& whole, double tol, int depth,
                       const QuadratureOptions& options) {
  const double m = 0.5 * (a + b);
  SimpsonPanel left;
  left.fa = whole.fa;
  left.fb = whole.fm;
  left.fm = eval_checked(f, 0.5 * (a + m));
  left.estimate = (m - a) / 6.0 * (left.fa + 4.0 * left.fm + left.fb);
  SimpsonPanel right;
  right.fa = whole.fm;
  right.fb = whole.fb;
  right.fm = eval_checked(f, 0.5 * (m + b));
  right.estimate = (b - m) / 6.0 * (right.fa + 4.0 * right.fm + right.fb);

  const double refined = left.estimate + right.estimate;
  const double error = refined - whole.estimate;
  if (depth >= options.min_depth &&
      (std::abs(error) <= 15.0 * tol ||
       std::abs(error) <= options.noise_rate * (b - a) ||
       depth >= options.max_depth)) {
    return refined + error / 15.0;
  }
  const double half_tol = 0.5 * tol;
  return simpson_recurse(f, a, m, left, half_tol, depth + 1, options) +
         simpson_recurse(f, m, b, right, half_tol, depth + 1, options);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        const QuadratureOptions& options) {
  if (a == b) return 0.0;
  require(a < b, ErrorCode::invalid_argument, "integration bounds out of order");
  const SimpsonPanel whole = make_panel(f, a, b);
  return simpson_recurse(f, a, b, whole, options.abs_tol, 0, options);
}

double trapezoid_uniform(const std::vector<double>& values, double dx) {
  if (values.size() < 2) return 0.0;
  double interior = 0.0;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) interior += values[i];
  return dx * (0.5 * (values.front() + values.back()) + interior);
}

double golden_section_max(const std::function<double(double)>& f, double a, double b,
                          double abs_tol) {
  require(a <= b, ErrorCode::invalid_argument, "search bounds out of order");
  constexpr double inv_phi = 0.6180339887498948482;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > abs_tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

double bisect(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  require(a < b, ErrorCode::invalid_argument, "bisection bounds out of order");
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    raise(ErrorCode::no_solution, "no sign change on the bisection bracket");
  }
  const double scale = std::max(std::abs(a), std::abs(b));
  for (int i = 0; i < 200 && (b - a) > rel_tol * scale; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

double log_sum_exp(const std::vector<double>& values) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : values) peak = std::max(peak, v);
  if (!std::isfinite(peak)) return peak;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - peak);
  return peak + std::log(sum);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> weights(x.size(), 1.0);
  return fit_line_weighted(x, y, weights);
}

LineFit fit_line_weighted(const std::vector<double>& x, const std::vector<double>& y,
                          const std::vector<double>& weights) {
  require(x.size() == y.size() && x.size() == weights.size() && x.size() >= 2,
          ErrorCode::invalid_argument, "line fit needs matching arrays of size >= 2");
  double wsum = 0.0, wx = 0.0, wy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    wsum += weights[i];
    wx += weights[i] * x[i];
    wy += weights[i] * y[i];
  }
  require(wsum > 0.0, ErrorCode::invalid_argument, "line fit needs positive total weight");
  const double mx = wx / wsum;
  const double my = wy / wsum;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += weights[i] * dx * dx;
    sxy += weights[i] * dx * dy;
    syy += weights[i] * dy * dy;
  }
  require(sxx > 0.0, ErrorCode::degenerate_fit, "line fit abscissae are degenerate");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    rss += weights[i] * r * r;
  }
  fit.residual = std::sqrt(rss / wsum);
  fit.r_squared = syy > 0.0 ? 1.0 - rss / syy : 1.0;
  // Standard error under the model var(y_i) = 1 / weights[i].
  fit.slope_se = std::sqrt(1.0 / sxx);
  return fit;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  require(!sample.empty(), ErrorCode::empty_sample_set, "KS statistic of an empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double value = cdf(sample[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    worst = std::max(worst, std::max(std::abs(value - lo), std::abs(value - hi)));
  }
  return worst;
}

namespace {

// Series expansion of P(a, x) for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x), x >= a + 1 (modified Lentz).
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
  require(a > 0.0 && x >= 0.0, ErrorCode::invalid_argument, "gamma_p domain");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  require(a > 0.0 && x >= 0.0, ErrorCode::invalid_argument, "gamma_q domain");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, ErrorCode::invalid_argument, "quantile domain is (0, 1)");
  // Wichura's algorithm AS 241, PPND16.
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

double chi_square_sf(double x, double k) {
  require(k > 0.0, ErrorCode::invalid_argument, "chi-square degrees of freedom");
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * k, 0.5 * x);
}

}  // namespace gibbslab
