#include "gibbslab/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "gibbslab/error.hpp"
#include "gibbslab/jsonio.hpp"
#include "gibbslab/numerics.hpp"

namespace gibbslab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative margin used to keep quadrature nodes strictly inside the support,
// so integrable endpoint singularities (log zeros, negative power exponents)
// never evaluate non-finite. The excluded mass is far below every tolerance
// the library promises.
constexpr double kEdgeMargin = 1e-12;

double default_exponential_upper(double rate) {
  // Truncate where the density reaches 1e-16 of its maximum.
  return 16.0 * std::log(10.0) / rate;
}

double default_gamma_upper(double shape, double scale) {
  const double reference =
      shape >= 1.0 ? (shape - 1.0) * scale : shape * scale;  // mode, or mean below 1
  const double log_ref = (shape - 1.0) * std::log(std::max(reference, 0.5 * scale)) -
                         std::max(reference, 0.5 * scale) / scale;
  const double target = log_ref - 16.0 * std::log(10.0);
  double upper = std::max(reference, scale) * 2.0 + 10.0 * scale;
  auto log_shape = [&](double x) { return (shape - 1.0) * std::log(x) - x / scale; };
  while (log_shape(upper) > target) upper *= 2.0;
  double lower = std::max(reference, 0.5 * scale);
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lower + upper);
    if (log_shape(mid) > target) lower = mid; else upper = mid;
  }
  return upper;
}

}  // namespace

const char* family_name(Family family) noexcept {
  switch (family) {
    case Family::exponential: return "exponential";
    case Family::gamma_law: return "gamma";
    case Family::power_law: return "power_law";
    case Family::uniform: return "uniform";
    case Family::shell: return "shell";
  }
  return "unknown";
}

Density1D Density1D::exponential(double rate, std::optional<Interval> support) {
  require(rate > 0.0, ErrorCode::invalid_argument, "exponential rate must be positive");
  Density1D d;
  d.family_ = Family::exponential;
  d.params_[0] = rate;
  d.support_ = support.value_or(Interval{0.0, default_exponential_upper(rate)});
  require(d.support_.lo >= 0.0 && d.support_.width() > 0.0, ErrorCode::invalid_argument,
          "support must satisfy 0 <= lo < hi");
  return d;
}

Density1D Density1D::gamma(double shape, double scale, std::optional<Interval> support) {
  require(shape > 0.0 && scale > 0.0, ErrorCode::invalid_argument,
          "gamma shape and scale must be positive");
  Density1D d;
  d.family_ = Family::gamma_law;
  d.params_[0] = shape;
  d.params_[1] = scale;
  d.support_ = support.value_or(Interval{0.0, default_gamma_upper(shape, scale)});
  require(d.support_.lo >= 0.0 && d.support_.width() > 0.0, ErrorCode::invalid_argument,
          "support must satisfy 0 <= lo < hi");
  return d;
}

Density1D Density1D::power_law(double coeff, double exponent, double upper) {
  require(coeff > 0.0, ErrorCode::invalid_argument, "power-law coefficient must be positive");
  require(exponent > -1.0, ErrorCode::non_integrable,
          "power-law exponent must exceed -1 for integrability");
  require(upper > 0.0, ErrorCode::invalid_argument, "power-law upper bound must be positive");
  Density1D d;
  d.family_ = Family::power_law;
  d.params_[0] = coeff;
  d.params_[1] = exponent;
  d.support_ = {0.0, upper};
  return d;
}

Density1D Density1D::uniform(double lo, double hi) {
  require(lo >= 0.0 && hi > lo, ErrorCode::invalid_argument,
          "uniform support must satisfy 0 <= lo < hi");
  Density1D d;
  d.family_ = Family::uniform;
  d.support_ = {lo, hi};
  return d;
}

Density1D Density1D::shell_indicator(double center, double width) {
  require(width > 0.0, ErrorCode::invalid_shell, "shell width must be positive");
  require(center - 0.5 * width >= 0.0, ErrorCode::invalid_shell,
          "shell must stay within the nonnegative axis");
  Density1D d;
  d.family_ = Family::shell;
  d.params_[0] = center;
  d.params_[1] = width;
  d.support_ = {center - 0.5 * width, center + 0.5 * width};
  return d;
}

Density1D Density1D::from_grid(Interval support, std::vector<double> log_values) {
  require(support.lo >= 0.0 && support.width() > 0.0, ErrorCode::invalid_argument,
          "grid support must satisfy 0 <= lo < hi");
  require(log_values.size() >= 8, ErrorCode::invalid_argument,
          "grid densities need at least 8 points");
  for (double& v : log_values) {
    require(!std::isnan(v), ErrorCode::invalid_argument, "grid log-density is NaN");
    if (v < kLogZero) v = kLogZero;
  }
  Density1D d;
  d.grid_ = true;
  d.support_ = support;
  d.log_values_ = std::move(log_values);
  return d;
}

Density1D Density1D::from_log_function(Interval support, std::size_t points,
                                       const std::function<double(double)>& log_f) {
  require(points >= 8, ErrorCode::invalid_argument, "grid densities need at least 8 points");
  std::vector<double> values(points);
  const double dx = support.width() / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = support.lo + dx * static_cast<double>(i);
    const double v = log_f(x);
    values[i] = std::isnan(v) ? kLogZero : v;
  }
  return from_grid(support, std::move(values));
}

Family Density1D::family() const {
  require(!grid_, ErrorCode::invalid_argument, "grid density has no analytic family");
  return family_;
}

double Density1D::param(int index) const {
  require(!grid_ && index >= 0 && index < 2, ErrorCode::invalid_argument,
          "family parameter index out of range");
  return params_[index];
}

double Density1D::log_shape(double x) const {
  if (grid_) {
    const double dx = grid_dx();
    const double t = (x - support_.lo) / dx;
    std::size_t i = static_cast<std::size_t>(std::max(0.0, std::floor(t)));
    if (i >= log_values_.size() - 1) i = log_values_.size() - 2;
    const double frac = std::clamp(t - static_cast<double>(i), 0.0, 1.0);
    const double va = log_values_[i];
    const double vb = log_values_[i + 1];
    if (va <= kLogZero && vb <= kLogZero) return -kInf;
    const double v = va + frac * (vb - va);
    return v <= kLogZero ? -kInf : v;
  }
  switch (family_) {
    case Family::exponential:
      return std::log(params_[0]) - params_[0] * x;
    case Family::gamma_law: {
      const double shape = params_[0];
      const double scale = params_[1];
      if (x <= 0.0) {
        if (shape > 1.0) return -kInf;
        if (shape == 1.0) return -std::log(scale);
        return kInf;
      }
      return (shape - 1.0) * std::log(x) - x / scale - std::lgamma(shape) -
             shape * std::log(scale);
    }
    case Family::power_law: {
      if (x <= 0.0) {
        if (params_[1] > 0.0) return -kInf;
        if (params_[1] == 0.0) return std::log(params_[0]);
        return kInf;
      }
      return std::log(params_[0]) + params_[1] * std::log(x);
    }
    case Family::uniform:
      return -std::log(support_.width());
    case Family::shell:
      return -std::log(params_[1]);
  }
  return -kInf;
}

double Density1D::log_pdf(double x) const {
  if (x < support_.lo || x > support_.hi) return -kInf;
  const double shape = log_shape(x);
  if (shape == -kInf) return -kInf;
  return shape - std::log(norm_const_);
}

double Density1D::pdf(double x) const {
  const double lp = log_pdf(x);
  return lp == -kInf ? 0.0 : std::exp(lp);
}

double Density1D::integrate() const {
  if (grid_) {
    std::vector<double> values(log_values_.size());
    const double log_norm = std::log(norm_const_);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double v = log_values_[i];
      values[i] = v <= kLogZero ? 0.0 : std::exp(v - log_norm);
    }
    return trapezoid_uniform(values, grid_dx());
  }
  const double margin = kEdgeMargin * support_.width();
  return adaptive_simpson([this](double x) { return pdf(x); }, support_.lo + margin,
                          support_.hi - margin);
}

Density1D Density1D::normalized(double* integral_out) const {
  const double integral = integrate();
  if (integral_out != nullptr) *integral_out = integral;
  require(std::isfinite(integral), ErrorCode::non_integrable,
          "density does not have a finite integral");
  require(integral > 1e-300, ErrorCode::zero_mass, "density integrates to zero");
  Density1D d = *this;
  d.norm_const_ = norm_const_ * integral;
  return d;
}

Density1D Density1D::scaled_mass(double c) const {
  require(c > 0.0 && std::isfinite(c), ErrorCode::invalid_argument,
          "mass scale must be positive and finite");
  Density1D d = *this;
  d.norm_const_ = norm_const_ / c;
  return d;
}

Density1D Density1D::scaled_variable(double s) const {
  require(s > 0.0 && std::isfinite(s), ErrorCode::invalid_argument,
          "variable scale must be positive and finite");
  Density1D d = *this;
  d.support_ = {support_.lo * s, support_.hi * s};
  if (grid_) {
    for (double& v : d.log_values_) {
      if (v > kLogZero) v -= std::log(s);
      if (v < kLogZero) v = kLogZero;
    }
    return d;
  }
  switch (family_) {
    case Family::exponential:
      d.params_[0] = params_[0] / s;
      break;
    case Family::gamma_law:
      d.params_[1] = params_[1] * s;
      break;
    case Family::power_law:
      d.params_[0] = params_[0] * std::pow(s, -params_[1] - 1.0);
      break;
    case Family::uniform:
      break;
    case Family::shell:
      d.params_[0] = params_[0] * s;
      d.params_[1] = params_[1] * s;
      break;
  }
  return d;
}

double Density1D::log_derivative(double y) const {
  require(y > support_.lo && y < support_.hi, ErrorCode::out_of_support,
          "log-density derivative needs a point strictly inside the support");
  if (!grid_) {
    switch (family_) {
      case Family::exponential: return -params_[0];
      case Family::gamma_law: return (params_[0] - 1.0) / y - 1.0 / params_[1];
      case Family::power_law: return params_[1] / y;
      case Family::uniform: return 0.0;
      case Family::shell: return 0.0;
    }
  }
  // Differentiate the degree-4 interpolant through the five nodes around y,
  // evaluated at y itself; fourth-order accurate everywhere on the grid.
  const std::size_t m = log_values_.size();
  const double dx = grid_dx();
  const double t = (y - support_.lo) / dx;
  std::size_t i = static_cast<std::size_t>(std::max(0.0, std::floor(t)));
  if (i >= m - 1) i = m - 2;
  const std::size_t w = std::min(i >= 2 ? i - 2 : 0, m - 5);
  double node_x[5];
  double node_v[5];
  for (int k = 0; k < 5; ++k) {
    node_x[k] = grid_x(w + static_cast<std::size_t>(k));
    node_v[k] = log_values_[w + static_cast<std::size_t>(k)];
    require(node_v[k] > kLogZero, ErrorCode::zero_density,
            "log-density derivative stencil crosses a zero-density node");
  }
  double derivative = 0.0;
  for (int k = 0; k < 5; ++k) {
    double denom = 1.0;
    for (int l = 0; l < 5; ++l) {
      if (l != k) denom *= node_x[k] - node_x[l];
    }
    double basis_derivative = 0.0;
    for (int j = 0; j < 5; ++j) {
      if (j == k) continue;
      double prod = 1.0;
      for (int l = 0; l < 5; ++l) {
        if (l != k && l != j) prod *= y - node_x[l];
      }
      basis_derivative += prod;
    }
    derivative += node_v[k] * basis_derivative / denom;
  }
  return derivative;
}

double Density1D::moment(int order) const {
  require(order >= 0, ErrorCode::invalid_argument, "moment order must be nonnegative");
  if (grid_) {
    std::vector<double> values(log_values_.size());
    const double log_norm = std::log(norm_const_);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double v = log_values_[i];
      const double density = v <= kLogZero ? 0.0 : std::exp(v - log_norm);
      values[i] = density * std::pow(grid_x(i), order);
    }
    return trapezoid_uniform(values, grid_dx());
  }
  const double margin = kEdgeMargin * support_.width();
  return adaptive_simpson(
      [this, order](double x) { return pdf(x) * std::pow(x, order); },
      support_.lo + margin, support_.hi - margin);
}

double Density1D::cdf_shape(double x) const {
  switch (family_) {
    case Family::exponential: {
      const double rate = params_[0];
      return std::exp(-rate * support_.lo) - std::exp(-rate * x);
    }
    case Family::gamma_law:
      return gamma_p(params_[0], x / params_[1]) -
             gamma_p(params_[0], support_.lo / params_[1]);
    case Family::power_law: {
      const double g1 = params_[1] + 1.0;
      return (std::pow(x, g1) - std::pow(support_.lo, g1)) / g1;
    }
    case Family::uniform:
    case Family::shell:
      return x - support_.lo;
  }
  return 0.0;
}

double Density1D::cdf(double x) const {
  if (x <= support_.lo) return 0.0;
  if (x >= support_.hi) return 1.0;
  if (grid_) {
    const double log_norm = std::log(norm_const_);
    auto value_at = [&](std::size_t i) {
      const double v = log_values_[i];
      return v <= kLogZero ? 0.0 : std::exp(v - log_norm);
    };
    const double dx = grid_dx();
    const double t = (x - support_.lo) / dx;
    const std::size_t full = static_cast<std::size_t>(std::floor(t));
    double acc = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < log_values_.size(); ++i) {
      const double panel = 0.5 * dx * (value_at(i) + value_at(i + 1));
      total += panel;
      if (i < full) acc += panel;
    }
    const double frac = t - static_cast<double>(full);
    const double va = value_at(full);
    const double vb = value_at(std::min(full + 1, log_values_.size() - 1));
    acc += 0.5 * dx * frac * (va + (va + frac * (vb - va)));
    require(total > 0.0, ErrorCode::zero_mass, "grid density has zero mass");
    return std::clamp(acc / total, 0.0, 1.0);
  }
  const double total = cdf_shape(support_.hi);
  require(total > 0.0, ErrorCode::zero_mass, "density has zero mass");
  return std::clamp(cdf_shape(x) / total, 0.0, 1.0);
}

double Density1D::neg_log_norm() const {
  const double integral = integrate();
  require(integral > 0.0 && std::isfinite(integral), ErrorCode::non_integrable,
          "negative log normalizer needs a finite positive integral");
  return -std::log(integral);
}

double Density1D::kl_divergence(const Density1D& f, const Density1D& g) {
  // Densities with unbounded tails arrive truncated where the tail mass is
  // negligible, so two supports rarely coincide exactly. Integrate over the
  // intersection and reject only when f carries real mass outside it.
  const Interval common{std::max(f.support_.lo, g.support_.lo),
                        std::min(f.support_.hi, g.support_.hi)};
  if (common.width() <= 0.0) {
    raise(ErrorCode::support_mismatch, "densities live on disjoint supports");
  }
  const double mass_outside = f.cdf(common.lo) + (1.0 - f.cdf(common.hi));
  if (mass_outside > 1e-9) {
    raise(ErrorCode::support_mismatch,
          "f carries mass outside the support of g");
  }
  const double g_margin =
      std::max(kEdgeMargin * g.support_.width(),
               g.is_grid() ? 1.5 * g.grid_dx() : 0.0);
  auto term = [&](double x, bool boundary_exempt) {
    const double fx = f.pdf(x);
    if (fx <= 0.0) return 0.0;
    const double lg = g.log_pdf(x);
    if (lg == -kInf) {
      const bool near_edge = x < g.support_.lo + g_margin || x > g.support_.hi - g_margin;
      if (boundary_exempt && near_edge) return 0.0;
      raise(ErrorCode::support_mismatch, "f carries mass where g vanishes");
    }
    return fx * (std::log(fx) - lg);
  };
  if (f.is_grid()) {
    std::vector<double> values(f.grid_points());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double x = f.grid_x(i);
      if (x < common.lo || x > common.hi) {
        values[i] = 0.0;
        continue;
      }
      const bool edge = i == 0 || i + 1 == values.size() ||
                        x < common.lo + g_margin || x > common.hi - g_margin;
      values[i] = term(x, edge);
    }
    return trapezoid_uniform(values, f.grid_dx());
  }
  const double margin = std::max(kEdgeMargin * common.width(), g_margin);
  return adaptive_simpson([&](double x) { return term(x, false); },
                          common.lo + margin, common.hi - margin);
}

double Density1D::tv_distance(const Density1D& a, const Density1D& b) {
  require(a.is_grid() && b.is_grid(), ErrorCode::invalid_argument,
          "total variation distance is defined on grid densities");
  require(a.grid_points() == b.grid_points() &&
              std::abs(a.support_.lo - b.support_.lo) <= 1e-12 * (1.0 + a.support_.width()) &&
              std::abs(a.support_.hi - b.support_.hi) <= 1e-12 * (1.0 + a.support_.width()),
          ErrorCode::support_mismatch, "total variation needs a common grid");
  std::vector<double> values(a.grid_points());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::abs(a.pdf(a.grid_x(i)) - b.pdf(b.grid_x(i)));
  }
  return 0.5 * trapezoid_uniform(values, a.grid_dx());
}

std::size_t Density1D::grid_points() const {
  require(grid_, ErrorCode::invalid_argument, "not a grid density");
  return log_values_.size();
}

double Density1D::grid_x(std::size_t i) const {
  require(grid_, ErrorCode::invalid_argument, "not a grid density");
  return support_.lo + grid_dx() * static_cast<double>(i);
}

double Density1D::grid_dx() const {
  require(grid_, ErrorCode::invalid_argument, "not a grid density");
  return support_.width() / static_cast<double>(log_values_.size() - 1);
}

const std::vector<double>& Density1D::grid_log_values() const {
  require(grid_, ErrorCode::invalid_argument, "not a grid density");
  return log_values_;
}

std::string Density1D::to_json() const { return to_json_value().dump(); }

JsonValue Density1D::to_json_value() const {
  JsonValue root = JsonValue::object();
  if (grid_) {
    JsonValue grid = JsonValue::object();
    grid.set("points", static_cast<std::int64_t>(log_values_.size()));
    root.set("grid", std::move(grid));
    JsonValue values = JsonValue::array();
    for (double v : log_values_) values.push_back(JsonValue::real(v));
    root.set("values", std::move(values));
  } else {
    root.set("family", family_name(family_));
    JsonValue params = JsonValue::object();
    switch (family_) {
      case Family::exponential:
        params.set("rate", params_[0]);
        break;
      case Family::gamma_law:
        params.set("shape", params_[0]);
        params.set("scale", params_[1]);
        break;
      case Family::power_law:
        params.set("coeff", params_[0]);
        params.set("exponent", params_[1]);
        break;
      case Family::uniform:
        break;
      case Family::shell:
        params.set("center", params_[0]);
        params.set("width", params_[1]);
        break;
    }
    root.set("params", std::move(params));
  }
  JsonValue support = JsonValue::array();
  support.push_back(JsonValue::real(support_.lo));
  support.push_back(JsonValue::real(support_.hi));
  root.set("support", std::move(support));
  root.set("norm_const", norm_const_);
  return root;
}

Density1D Density1D::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    raise(ErrorCode::config_error, std::string("invalid density JSON: ") + e.what());
  }
  try {
    const auto support_list = j.at("support");
    Interval support{support_list.at(0).get<double>(), support_list.at(1).get<double>()};
    Density1D d;
    if (j.contains("grid")) {
      std::vector<double> values = j.at("values").get<std::vector<double>>();
      d = from_grid(support, std::move(values));
    } else {
      const std::string family = j.at("family").get<std::string>();
      const auto& params = j.at("params");
      if (family == "exponential") {
        d = exponential(params.at("rate").get<double>(), support);
      } else if (family == "gamma") {
        d = gamma(params.at("shape").get<double>(), params.at("scale").get<double>(), support);
      } else if (family == "power_law") {
        d = power_law(params.at("coeff").get<double>(), params.at("exponent").get<double>(),
                      support.hi);
      } else if (family == "uniform") {
        d = uniform(support.lo, support.hi);
      } else if (family == "shell") {
        d = shell_indicator(params.at("center").get<double>(),
                            params.at("width").get<double>());
      } else {
        raise(ErrorCode::config_error, "unknown density family: " + family);
      }
    }
    if (j.contains("norm_const")) d.norm_const_ = j.at("norm_const").get<double>();
    require(d.norm_const_ > 0.0 && std::isfinite(d.norm_const_), ErrorCode::config_error,
            "norm_const must be positive and finite");
    return d;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    raise(ErrorCode::config_error, std::string("malformed density JSON: ") + e.what());
  }
}

DiscretePMF DiscretePMF::from_log_weights(std::vector<double> log_weights) {
  require(!log_weights.empty(), ErrorCode::invalid_argument, "empty pmf");
  const double norm = log_sum_exp(log_weights);
  require(std::isfinite(norm), ErrorCode::zero_mass, "pmf weights sum to zero");
  for (double& v : log_weights) v -= norm;
  DiscretePMF pmf;
  pmf.log_p_ = std::move(log_weights);
  return pmf;
}

DiscretePMF DiscretePMF::from_values(const std::vector<double>& values) {
  std::vector<double> logs(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(values[i] >= 0.0, ErrorCode::invalid_argument, "pmf values must be nonnegative");
    logs[i] = values[i] > 0.0 ? std::log(values[i]) : -kInf;
  }
  return from_log_weights(std::move(logs));
}

DiscretePMF DiscretePMF::poisson(double mean, std::optional<std::size_t> size) {
  require(mean >= 0.0, ErrorCode::invalid_argument, "Poisson mean must be nonnegative");
  if (mean == 0.0) return point_mass(0, size.value_or(1));
  const std::size_t n =
      size.value_or(static_cast<std::size_t>(std::ceil(mean + 12.0 * std::sqrt(mean + 1.0) + 30.0)));
  std::vector<double> logs(n);
  const double log_mean = std::log(mean);
  for (std::size_t k = 0; k < n; ++k) {
    logs[k] = -mean + static_cast<double>(k) * log_mean -
              std::lgamma(static_cast<double>(k) + 1.0);
  }
  return from_log_weights(std::move(logs));
}

DiscretePMF DiscretePMF::binomial(std::int64_t n, double p) {
  require(n >= 0, ErrorCode::invalid_argument, "binomial count must be nonnegative");
  require(p >= 0.0 && p <= 1.0, ErrorCode::invalid_argument, "binomial p must be in [0, 1]");
  std::vector<double> logs(static_cast<std::size_t>(n) + 1);
  for (std::int64_t k = 0; k <= n; ++k) {
    double v;
    if ((p == 0.0 && k > 0) || (p == 1.0 && k < n)) {
      v = -kInf;
    } else {
      const double log_choose = std::lgamma(static_cast<double>(n) + 1.0) -
                                std::lgamma(static_cast<double>(k) + 1.0) -
                                std::lgamma(static_cast<double>(n - k) + 1.0);
      const double lp = p > 0.0 ? static_cast<double>(k) * std::log(p) : 0.0;
      const double lq = p < 1.0 ? static_cast<double>(n - k) * std::log(1.0 - p) : 0.0;
      v = log_choose + lp + lq;
    }
    logs[static_cast<std::size_t>(k)] = v;
  }
  return from_log_weights(std::move(logs));
}

DiscretePMF DiscretePMF::uniform_upto(std::int64_t n) {
  require(n >= 0, ErrorCode::invalid_argument, "upper bound must be nonnegative");
  std::vector<double> logs(static_cast<std::size_t>(n) + 1, 0.0);
  return from_log_weights(std::move(logs));
}

DiscretePMF DiscretePMF::point_mass(std::int64_t k, std::size_t size) {
  require(k >= 0 && static_cast<std::size_t>(k) < size, ErrorCode::invalid_argument,
          "point mass outside the support");
  std::vector<double> logs(size, -kInf);
  logs[static_cast<std::size_t>(k)] = 0.0;
  DiscretePMF pmf;
  pmf.log_p_ = std::move(logs);
  return pmf;
}

DiscretePMF DiscretePMF::inverse_factorial(std::size_t size) {
  require(size >= 1, ErrorCode::invalid_argument, "empty pmf");
  std::vector<double> logs(size);
  for (std::size_t k = 0; k < size; ++k) {
    logs[k] = -std::lgamma(static_cast<double>(k) + 1.0);
  }
  return from_log_weights(std::move(logs));
}

double DiscretePMF::log_p(std::int64_t k) const {
  if (k < 0 || static_cast<std::size_t>(k) >= log_p_.size()) return -kInf;
  return log_p_[static_cast<std::size_t>(k)];
}

double DiscretePMF::p(std::int64_t k) const {
  const double lp = log_p(k);
  return lp == -kInf ? 0.0 : std::exp(lp);
}

double DiscretePMF::sum() const {
  double total = 0.0;
  for (double lp : log_p_) total += lp == -kInf ? 0.0 : std::exp(lp);
  return total;
}

double DiscretePMF::mean() const {
  double total = 0.0;
  for (std::size_t k = 0; k < log_p_.size(); ++k) {
    total += static_cast<double>(k) * p(static_cast<std::int64_t>(k));
  }
  return total;
}

double DiscretePMF::tv_distance(const DiscretePMF& a, const DiscretePMF& b) {
  const std::size_t n = std::max(a.size(), b.size());
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    total += std::abs(a.p(static_cast<std::int64_t>(k)) - b.p(static_cast<std::int64_t>(k)));
  }
  return 0.5 * total;
}

double DiscretePMF::kl_divergence(const DiscretePMF& a, const DiscretePMF& b) {
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double pa = a.p(static_cast<std::int64_t>(k));
    if (pa <= 0.0) continue;
    const double lb = b.log_p(static_cast<std::int64_t>(k));
    if (lb == -kInf) {
      raise(ErrorCode::support_mismatch, "pmf KL: first law carries mass where second vanishes");
    }
    total += pa * (a.log_p(static_cast<std::int64_t>(k)) - lb);
  }
  return total;
}

std::string DiscretePMF::to_json() const {
  JsonValue root = JsonValue::object();
  JsonValue values = JsonValue::array();
  for (std::size_t k = 0; k < log_p_.size(); ++k) {
    values.push_back(JsonValue::real(p(static_cast<std::int64_t>(k))));
  }
  root.set("kind", "pmf");
  root.set("values", std::move(values));
  return root.dump();
}

}  // namespace gibbslab
