#include "gibbslab/limitlaw.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "gibbslab/error.hpp"
#include "gibbslab/jsonio.hpp"
#include "gibbslab/numerics.hpp"

namespace gibbslab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kKlMachineFloor = 1e-300;
}  // namespace

double tilt_exponent(const JointLaw& joint, double h) {
  const Interval ys = joint.y_support(0.0);
  require(h > ys.lo && h < ys.hi, ErrorCode::boundary_evaluation,
          "tilt exponent needs the level strictly inside the bath support");
  const double dy = joint.d_log_conditional_dy(h, 0.0);
  if (joint.is_independent()) return dy;
  const double dx = joint.d_log_conditional_dx(h, 0.0);
  return dy - dx;
}

double partition_function(const Density1D& f_x, double tilt, double h) {
  require(h > 0.0 && std::isfinite(h), ErrorCode::invalid_argument,
          "upper limit must be positive and finite");
  require(std::isfinite(tilt), ErrorCode::invalid_argument, "tilt must be finite");
  const Interval xs = f_x.support();
  const double lo = std::max(0.0, xs.lo);
  const double hi = std::min(h, xs.hi);
  if (hi <= lo) return 0.0;
  // Factor out the integrand's maximum so steep tilts cannot underflow the
  // whole integral.
  const int scan = 4096;
  double top = -kInf;
  for (int i = 0; i <= scan; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / scan;
    const double v = f_x.log_pdf(x) - tilt * x;
    top = std::max(top, v);
  }
  if (top == -kInf) return 0.0;
  const double margin = 1e-12 * (hi - lo);
  const double shifted = adaptive_simpson(
      [&](double x) {
        const double v = f_x.log_pdf(x) - tilt * x - top;
        return v <= kLogZero ? 0.0 : std::exp(v);
      },
      lo + margin, hi - margin);
  return std::exp(top) * shifted;
}

ConditionalLaw asymptotic_conditional(const Density1D& f_x, const JointLaw& joint,
                                      double h, std::size_t points) {
  require(h > 0.0 && std::isfinite(h), ErrorCode::invalid_argument,
          "conditioning level must be positive and finite");
  require(points >= 8, ErrorCode::invalid_argument, "grid needs at least 8 points");
  const double tilt = tilt_exponent(joint, h);
  const double dx = h / static_cast<double>(points - 1);
  std::vector<double> logs(points, -kInf);
  double top = -kInf;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = static_cast<double>(i) * dx;
    const double lx = f_x.log_pdf(x);
    if (lx == -kInf) continue;
    logs[i] = lx - tilt * x;
    top = std::max(top, logs[i]);
  }
  require(top > -kInf, ErrorCode::zero_marginal,
          "the tilted density vanishes identically on [0, h]");
  for (double& v : logs) {
    v = v == -kInf ? kLogZero : std::max(v - top, kLogZero);
  }
  ConditionalLaw law;
  law.density = Density1D::from_grid(Interval{0.0, h}, std::move(logs)).normalized();
  law.h = h;
  law.delta = 0.0;
  return law;
}

JointLaw SmallSystemSequence::member(std::int64_t n) const {
  require(n >= 1, ErrorCode::invalid_argument, "system index must be positive");
  if (member_override) return member_override(n);
  return base.with_rescaled_x(1.0 / static_cast<double>(n));
}

std::string ConvergenceReport::to_csv() const {
  CsvWriter csv({"n", "kl"});
  for (const auto& row : rows) {
    csv.add_row({static_cast<double>(row.n), row.kl});
  }
  return csv.dump();
}

std::string ConvergenceReport::summary_json() const {
  JsonValue root = JsonValue::object();
  root.set("slope", slope);
  root.set("intercept", intercept);
  root.set("residual", residual);
  return root.dump();
}

std::size_t convergence_grid_points(double h, std::int64_t n,
                                    const ConvergenceOptions& options) {
  const double refined = options.points_per_unit_n * h * static_cast<double>(n);
  const std::size_t wanted =
      std::max(options.floor_points, static_cast<std::size_t>(std::ceil(refined)));
  return std::min(wanted, options.max_points);
}

ConvergenceReport convergence_study(const SmallSystemSequence& seq, double h,
                                    const ConvergenceOptions& options) {
  require(seq.n_values.size() >= 4, ErrorCode::invalid_argument,
          "convergence study needs at least 4 system sizes");
  std::vector<std::int64_t> ns = seq.n_values;
  std::sort(ns.begin(), ns.end());
  require(ns.front() >= 1, ErrorCode::invalid_argument, "system sizes must be >= 1");
  require(static_cast<double>(ns.back()) >= 100.0 * static_cast<double>(ns.front()),
          ErrorCode::invalid_argument,
          "convergence study needs sizes spanning at least two decades");

  // The subsystem must shrink: E[X_n] <= C / n for a fixed C, taken here as
  // 100x the smallest member's scaled mean.
  const double mean_scale_cap =
      100.0 * seq.member(ns.front()).x_marginal().moment(1) *
      static_cast<double>(ns.front());

  std::vector<ConvergenceRow> rows(ns.size());
  auto compute_row = [&](std::size_t idx) {
    const std::int64_t n = ns[idx];
    const JointLaw member = seq.member(n);
    require(member.x_marginal().moment(1) * static_cast<double>(n) <=
                mean_scale_cap,
            ErrorCode::invalid_argument,
            "subsystem mean does not shrink like 1/n along the sequence");
    const std::size_t points = convergence_grid_points(h, n, options);
    const ConditionalLaw exact = exact_conditional_continuous(member, h, points);
    const ConditionalLaw asym =
        asymptotic_conditional(member.x_marginal(), member, h, points);
    double kl = Density1D::kl_divergence(exact.density, asym.density);
    ConvergenceRow row;
    row.n = n;
    row.floored = kl < kKlMachineFloor;
    row.kl = row.floored ? kKlMachineFloor : kl;
    rows[idx] = row;
  };

  const std::size_t workers =
      std::max<std::size_t>(1, static_cast<std::size_t>(options.workers));
  if (workers == 1 || ns.size() == 1) {
    for (std::size_t i = 0; i < ns.size(); ++i) compute_row(i);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(ns.size());
    std::atomic<std::size_t> next{0};
    const std::size_t used = std::min(workers, ns.size());
    for (std::size_t w = 0; w < used; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t idx = next.fetch_add(1);
          if (idx >= ns.size()) return;
          try {
            compute_row(idx);
          } catch (...) {
            failures[idx] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& failure : failures) {
      if (failure) std::rethrow_exception(failure);
    }
  }

  std::vector<double> log_n, log_kl;
  for (const auto& row : rows) {
    log_n.push_back(std::log(static_cast<double>(row.n)));
    log_kl.push_back(std::log(row.kl));
  }
  const LineFit fit = fit_line(log_n, log_kl);

  ConvergenceReport report;
  report.rows = std::move(rows);
  report.slope = fit.slope;
  report.intercept = fit.intercept;
  report.residual = fit.residual;
  report.tilt = tilt_exponent(seq.member(ns.back()), h);
  return report;
}

CounterexampleFamily construct_counterexample(double gamma, std::int64_t n) {
  require(n >= 1, ErrorCode::invalid_argument, "system index must be positive");
  require(gamma > -1.0, ErrorCode::no_solution,
          "no (c1, beta) satisfies both constraints unless the exponent exceeds -1");
  CounterexampleFamily family;
  family.gamma = gamma;
  family.n = n;
  // The two constraints Gamma(g+1) c1 / b^{g+1} = 1 and
  // Gamma(g+2) c1 / b^{g+2} = 1 divide to b = g + 1.
  family.beta = gamma + 1.0;
  family.c1 = std::pow(gamma + 1.0, gamma + 1.0) / std::tgamma(gamma + 1.0);
  // Generous explicit truncation (tail mass < e^-60) so densities built for
  // different exponents share comparable supports in divergence computations.
  const double upper_n = 60.0 / static_cast<double>(n);
  family.density =
      Density1D::gamma(gamma + 1.0, 1.0 / (static_cast<double>(n) * family.beta),
                       Interval{0.0, upper_n});

  // Verify both constraints by quadrature, independently of the algebra.
  const double upper = 60.0 / family.beta;
  const double margin = 1e-12 * upper;
  const auto omega_weighted = [&](double x) {
    return family.c1 * std::pow(x, gamma) * std::exp(-family.beta * x);
  };
  // The head [0, margin] is integrated in closed form (exp factor ~ 1 there)
  // so exponents in (-1, 0) keep their singular mass.
  const double omega_head =
      family.c1 * std::pow(margin, gamma + 1.0) / (gamma + 1.0);
  const double mean_head =
      family.c1 * std::pow(margin, gamma + 2.0) / (gamma + 2.0);
  family.omega_constraint =
      omega_head + adaptive_simpson(omega_weighted, margin, upper);
  family.mean_constraint =
      mean_head +
      adaptive_simpson([&](double x) { return x * omega_weighted(x); }, margin, upper);
  family.mean = family.density.moment(1);
  return family;
}

}  // namespace gibbslab
