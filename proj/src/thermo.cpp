#include "gibbslab/thermo.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "gibbslab/error.hpp"
#include "gibbslab/jsonio.hpp"
#include "gibbslab/numerics.hpp"

namespace gibbslab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sampled second differences over the interior of (0, e_max]; a concave
// density never exceeds zero here beyond rounding noise.
void check_concavity(const std::function<double(double)>& s, double e_max) {
  const double step = e_max / 512.0;
  for (int k = 1; k < 255; ++k) {
    const double e = e_max * static_cast<double>(k) / 256.0;
    const double second = s(e - step) - 2.0 * s(e) + s(e + step);
    require(second <= 1e-8, ErrorCode::invalid_argument,
            "entropy density is not concave");
  }
}

// Stationary energy E* solving dS/dE = beta, located by bisection in ln E so
// the tolerance is relative to the root across the whole bracket.
double stationary_energy(const ExtensiveEntropy& S, double beta) {
  const double volume = S.volume();
  const double lo = 1e-12 * volume;
  const double hi = S.e_max() * volume;
  const double slope_lo = S.dS_dE(lo) - beta;
  const double slope_hi = S.dS_dE(hi) - beta;
  require(slope_lo > 0.0 && slope_hi < 0.0, ErrorCode::no_stationary_point,
          "no stationary energy: beta lies outside the entropy's slope range");
  const double t = bisect(
      [&S, beta](double u) { return S.dS_dE(std::exp(u)) - beta; }, std::log(lo),
      std::log(hi), 1e-12);
  return std::exp(t);
}

}  // namespace

ExtensiveEntropy::ExtensiveEntropy(std::function<double(double)> s,
                                   std::function<double(double)> s_prime,
                                   double volume, double e_max, double shift)
    : s_(std::move(s)),
      s_prime_(std::move(s_prime)),
      volume_(volume),
      e_max_(e_max),
      shift_(shift) {}

ExtensiveEntropy ExtensiveEntropy::ideal_gas(double c, double volume, double e_max) {
  require(c > 0.0 && std::isfinite(c), ErrorCode::invalid_argument,
          "entropy coefficient must be positive");
  require(volume > 0.0 && std::isfinite(volume), ErrorCode::invalid_argument,
          "volume must be positive");
  require(e_max > 0.0 && std::isfinite(e_max), ErrorCode::invalid_argument,
          "energy-density range must be positive");
  return ExtensiveEntropy(
      [c](double e) { return e <= 0.0 ? -kInf : c * std::log(e); },
      [c](double e) { return c / e; }, volume, e_max, 0.0);
}

ExtensiveEntropy ExtensiveEntropy::poissonian(double volume, double e_max) {
  require(volume > 0.0 && std::isfinite(volume), ErrorCode::invalid_argument,
          "volume must be positive");
  require(e_max > 0.0 && std::isfinite(e_max), ErrorCode::invalid_argument,
          "energy-density range must be positive");
  return ExtensiveEntropy(
      [](double e) { return e <= 0.0 ? 0.0 : e - e * std::log(e); },
      [](double e) { return -std::log(e); }, volume, e_max, 0.0);
}

ExtensiveEntropy ExtensiveEntropy::custom(std::function<double(double)> s,
                                          std::function<double(double)> s_prime,
                                          double volume, double e_max) {
  require(static_cast<bool>(s) && static_cast<bool>(s_prime),
          ErrorCode::invalid_argument, "entropy density and derivative required");
  require(volume > 0.0 && std::isfinite(volume), ErrorCode::invalid_argument,
          "volume must be positive");
  require(e_max > 0.0 && std::isfinite(e_max), ErrorCode::invalid_argument,
          "energy-density range must be positive");
  check_concavity(s, e_max);
  return ExtensiveEntropy(std::move(s), std::move(s_prime), volume, e_max, 0.0);
}

ExtensiveEntropy ExtensiveEntropy::shifted(double constant) const {
  require(std::isfinite(constant), ErrorCode::invalid_argument,
          "entropy shift must be finite");
  ExtensiveEntropy out = *this;
  out.shift_ += constant;
  return out;
}

double ExtensiveEntropy::S(double x) const {
  return volume_ * s_(x / volume_) + shift_;
}

double ExtensiveEntropy::dS_dE(double x) const { return s_prime_(x / volume_); }

double free_energy_exact(const ExtensiveEntropy& S, double beta,
                         std::optional<double> h) {
  require(beta > 0.0 && std::isfinite(beta), ErrorCode::invalid_argument,
          "beta must be positive");
  double upper = 0.0;
  if (h.has_value()) {
    upper = *h;
    require(upper > 0.0 && std::isfinite(upper), ErrorCode::invalid_argument,
            "integration limit must be positive and finite");
  } else {
    upper = 10.0 * stationary_energy(S, beta);
  }
  const auto exponent = [&S, beta](double x) { return S.S(x) - beta * x; };
  // The exponent is concave, so golden-section search finds its maximum; the
  // shift by that maximum keeps the integrand within [0, 1].
  const double x_star =
      golden_section_max(exponent, 0.0, upper, 1e-12 * S.volume());
  const double peak = exponent(x_star);
  require(std::isfinite(peak), ErrorCode::non_integrable,
          "integrand maximum is not finite");
  // Quadrature is restricted to where the shifted integrand is nonzero in
  // double precision (exp underflows below about -745), and the error
  // estimate gets a rounding floor: the exponent is a difference of
  // S-magnitude terms, so each evaluation carries noise of order
  // epsilon * (|peak| + beta * x), which refinement cannot reduce.
  constexpr double kUnderflow = -746.0;
  const auto shifted_exponent = [&exponent, peak](double x) {
    return exponent(x) - peak;
  };
  double lo_edge = 0.0;
  if (shifted_exponent(0.0) < kUnderflow) {
    lo_edge = bisect(
        [&shifted_exponent](double x) { return shifted_exponent(x) - kUnderflow; },
        0.0, x_star, 1e-9);
  }
  double hi_edge = upper;
  if (x_star < upper && shifted_exponent(upper) < kUnderflow) {
    hi_edge = bisect(
        [&shifted_exponent](double x) { return shifted_exponent(x) - kUnderflow; },
        x_star, upper, 1e-9);
  }
  QuadratureOptions quadrature;
  quadrature.noise_rate = 32.0 * std::numeric_limits<double>::epsilon() *
                          (std::abs(peak) + beta * hi_edge + 1.0);
  const double shifted_integral = adaptive_simpson(
      [&shifted_exponent](double x) {
        const double g = shifted_exponent(x);
        return g == -kInf ? 0.0 : std::exp(g);
      },
      lo_edge, hi_edge, quadrature);
  require(std::isfinite(shifted_integral) && shifted_integral > 0.0,
          ErrorCode::non_integrable, "partition integral is not finite");
  return -(peak + std::log(shifted_integral)) / beta;
}

double free_energy_legendre(const ExtensiveEntropy& S, double beta) {
  require(beta > 0.0 && std::isfinite(beta), ErrorCode::invalid_argument,
          "beta must be positive");
  const double e_star = stationary_energy(S, beta);
  return e_star - S.S(e_star) / beta;
}

std::string FreeEnergyReport::to_json() const {
  JsonValue root = JsonValue::object();
  root.set("beta", beta);
  root.set("volume", volume);
  root.set("exact", exact);
  root.set("legendre", legendre);
  root.set("gap", gap);
  root.set("gap_per_volume", gap_per_volume);
  return root.dump();
}

FreeEnergyReport free_energy_report(const ExtensiveEntropy& S, double beta,
                                    std::optional<double> h) {
  FreeEnergyReport report;
  report.beta = beta;
  report.volume = S.volume();
  report.exact = free_energy_exact(S, beta, h);
  report.legendre = free_energy_legendre(S, beta);
  report.gap = std::abs(report.exact - report.legendre);
  report.gap_per_volume = report.gap / S.volume();
  return report;
}

std::vector<FreeEnergyReport> free_energy_sweep(
    const std::function<ExtensiveEntropy(double)>& family,
    const std::vector<double>& volumes, double beta) {
  require(static_cast<bool>(family), ErrorCode::invalid_argument,
          "entropy family required");
  require(!volumes.empty(), ErrorCode::invalid_argument,
          "at least one volume required");
  std::vector<FreeEnergyReport> reports;
  reports.reserve(volumes.size());
  for (double volume : volumes) {
    reports.push_back(free_energy_report(family(volume), beta));
  }
  return reports;
}

std::string free_energy_sweep_csv(
    const std::function<ExtensiveEntropy(double)>& family,
    const std::vector<double>& volumes, double beta) {
  CsvWriter csv({"V", "F_exact", "F_legendre", "gap", "gap_per_V"});
  for (const FreeEnergyReport& r : free_energy_sweep(family, volumes, beta)) {
    csv.add_row({r.volume, r.exact, r.legendre, r.gap, r.gap_per_volume});
  }
  return csv.dump();
}

std::string FluctuationReport::to_json() const {
  JsonValue root = JsonValue::object();
  root.set("mean", mean);
  root.set("variance", variance);
  root.set("beta_mean", beta_mean);
  root.set("beta_variance", beta_variance);
  root.set("density_at_origin", density_at_origin);
  root.set("lhs", lhs);
  root.set("rhs", rhs);
  root.set("second_moment_product", second_moment_product);
  return root.dump();
}

FluctuationReport fluctuation_bounds(const Density1D& f) {
  const Interval support = f.support();
  // The boundary value is checked before anything else: a density that
  // diverges at its lower edge has no usable f(0) regardless of how well it
  // is normalized.
  const double f0 = f.pdf(support.lo);
  require(std::isfinite(f0), ErrorCode::undefined_at_zero,
          "density diverges at its lower support edge");
  const double total = f.integrate();
  require(std::isfinite(total) && std::abs(total - 1.0) <= 1e-6,
          ErrorCode::invalid_argument,
          "fluctuation bounds need a normalized density");
  // The derivation drops a boundary term at the upper edge, so the density
  // must have decayed to numerical zero there.
  require(f.pdf(support.hi) * support.width() <= 1e-8, ErrorCode::invalid_argument,
          "density must decay to zero at its upper support edge");

  const double margin = 1e-12 * support.width();
  const double lo = support.lo + margin;
  const double hi = support.hi - margin;
  const double mass =
      adaptive_simpson([&f](double y) { return f.pdf(y); }, lo, hi);
  const double beta_integral = adaptive_simpson(
      [&f](double y) { return f.pdf(y) * f.log_derivative(y); }, lo, hi);
  const double beta_mean = beta_integral / mass;
  // Centered second pass: free of cancellation, so a constant beta(y) yields
  // an exact zero variance.
  const double centered = adaptive_simpson(
      [&f, beta_mean](double y) {
        const double d = f.log_derivative(y) - beta_mean;
        return f.pdf(y) * d * d;
      },
      lo, hi);
  const double beta_variance = centered / mass;

  FluctuationReport report;
  report.mean = f.moment(1);
  report.variance = f.moment(2) - report.mean * report.mean;
  report.beta_mean = beta_mean;
  report.beta_variance = beta_variance;
  report.density_at_origin = f0;
  report.lhs = report.variance * beta_variance;
  report.rhs = (1.0 - f0 * report.mean) * (1.0 - f0 * report.mean);
  report.second_moment_product =
      f.moment(2) * (beta_variance + beta_mean * beta_mean);
  require(report.lhs >= report.rhs - 1e-9, ErrorCode::internal,
          "variance product fell below its lower bound");
  require(report.second_moment_product >= 1.0 - 1e-9, ErrorCode::internal,
          "second-moment product fell below one");
  return report;
}

std::string KlBoundReport::to_json() const {
  JsonValue root = JsonValue::object();
  root.set("lhs", lhs);
  root.set("rhs", rhs);
  root.set("slack", slack);
  root.set("kl_normalized", kl_normalized);
  return root.dump();
}

KlBoundReport kl_lower_bound_check(const Density1D& f, const Density1D& g_tilde) {
  const double f_mass = f.integrate();
  require(std::isfinite(f_mass) && std::abs(f_mass - 1.0) <= 1e-6,
          ErrorCode::invalid_argument,
          "reference density must be normalized; only the comparison density "
          "may carry an arbitrary mass");
  KlBoundReport report;
  report.lhs = Density1D::kl_divergence(f, g_tilde);
  const double g_mass = g_tilde.integrate();
  require(std::isfinite(g_mass) && g_mass > 0.0, ErrorCode::non_integrable,
          "comparison density must have finite positive mass");
  report.rhs = -std::log(g_mass);
  report.slack = report.lhs - report.rhs;
  report.kl_normalized = Density1D::kl_divergence(f, g_tilde.normalized());
  require(report.slack >= -1e-9, ErrorCode::internal,
          "relative-entropy lower bound violated");
  require(std::abs(report.slack - report.kl_normalized) <= 1e-8,
          ErrorCode::internal, "slack-divergence identity violated");
  return report;
}

}  // namespace gibbslab
