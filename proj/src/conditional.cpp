#include "gibbslab/conditional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gibbslab/error.hpp"
#include "gibbslab/jsonio.hpp"
#include "gibbslab/numerics.hpp"

namespace gibbslab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Builds a normalized grid density from raw log weights by shifting out the
// maximum first, so absolute log levels (which can sit thousands of nats
// below zero for large baths) never underflow.
Density1D normalized_grid_from_logs(Interval support, std::vector<double> logs,
                                    ErrorCode empty_code, const char* empty_message) {
  double top = -kInf;
  for (double v : logs) top = std::max(top, v);
  require(top > -kInf, empty_code, empty_message);
  for (double& v : logs) {
    v = v == -kInf ? kLogZero : std::max(v - top, kLogZero);
  }
  Density1D raw = Density1D::from_grid(support, std::move(logs));
  double integral = 0.0;
  Density1D out = raw.normalized(&integral);
  require(integral > 0.0 && std::isfinite(integral), empty_code, empty_message);
  return out;
}
}  // namespace

std::string ConditionalLaw::to_json() const {
  JsonValue root = JsonValue::object();
  root.set("h", h);
  root.set("delta", delta);
  const JsonValue body = density.to_json_value();
  for (const auto& [key, value] : body.object_entries()) {
    root.set(key, value);
  }
  return root.dump();
}

ConditionalLaw exact_conditional_continuous(const JointLaw& joint, double h,
                                            std::size_t points) {
  require(h > 0.0 && std::isfinite(h), ErrorCode::invalid_argument,
          "conditioning level must be positive and finite");
  require(points >= 8, ErrorCode::invalid_argument, "grid needs at least 8 points");
  const Interval xs = joint.x_marginal().support();
  // The level set {X + Y = h} must intersect the joint support. The bath
  // support can move with x (shift couplings), so probe both ends.
  const double reachable = xs.hi + std::max(joint.y_support(0.0).hi,
                                            joint.y_support(xs.hi).hi);
  require(h <= reachable, ErrorCode::out_of_support,
          "conditioning level exceeds the reachable total");

  const Interval support{0.0, h};
  const double dx = h / static_cast<double>(points - 1);
  std::vector<double> logs(points, -kInf);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = static_cast<double>(i) * dx;
    const double lx = joint.x_marginal().log_pdf(x);
    if (lx == -kInf) continue;
    const double ly = joint.log_conditional(h - x, x);
    if (ly == -kInf) continue;
    logs[i] = lx + ly;
  }
  ConditionalLaw law;
  law.density = normalized_grid_from_logs(
      support, std::move(logs), ErrorCode::zero_marginal,
      "the conditioning event carries no density at this level");
  law.h = h;
  law.delta = 0.0;
  return law;
}

DiscreteConditionalLaw exact_conditional_discrete(
    const DiscretePMF& p_k,
    const std::function<double(std::int64_t, std::int64_t)>& log_pmf_l,
    std::int64_t m) {
  require(m >= 0, ErrorCode::invalid_argument, "total count must be nonnegative");
  std::vector<double> logs(static_cast<std::size_t>(m) + 1, -kInf);
  bool any = false;
  for (std::int64_t k = 0; k <= m; ++k) {
    const double lk = p_k.log_p(k);
    if (lk == -kInf) continue;
    const double ll = log_pmf_l(m - k, k);
    if (ll == -kInf || std::isnan(ll)) continue;
    logs[static_cast<std::size_t>(k)] = lk + ll;
    any = true;
  }
  require(any, ErrorCode::zero_event, "the conditioning event has zero probability");
  DiscreteConditionalLaw law;
  law.pmf = DiscretePMF::from_log_weights(std::move(logs));
  law.total = m;
  return law;
}

ConditionalLaw shell_conditional(const JointLaw& joint, double h, double delta,
                                 std::size_t points) {
  require(h > 0.0 && std::isfinite(h), ErrorCode::invalid_argument,
          "conditioning level must be positive and finite");
  require(delta > 0.0 && std::isfinite(delta), ErrorCode::invalid_argument,
          "shell width must be positive");
  require(points >= 8, ErrorCode::invalid_argument, "grid needs at least 8 points");

  const Interval xs = joint.x_marginal().support();
  const double hi = std::min(xs.hi, h + 0.5 * delta);
  require(hi > 0.0, ErrorCode::empty_shell, "shell excludes the whole subsystem range");
  const Interval support{0.0, hi};
  const double dx = support.width() / static_cast<double>(points - 1);

  std::vector<double> logs(points, -kInf);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = static_cast<double>(i) * dx;
    const double lx = joint.x_marginal().log_pdf(x);
    if (lx == -kInf) continue;
    const double y_lo = h - x - 0.5 * delta;
    const double y_hi = h - x + 0.5 * delta;
    double window_mass;
    if (const auto cdf = joint.conditional_cdf(y_hi, x)) {
      window_mass = *cdf - *joint.conditional_cdf(y_lo, x);
    } else {
      const Interval ys = joint.y_support(x);
      const double a = std::max(y_lo, ys.lo);
      const double b = std::min(y_hi, ys.hi);
      if (b <= a) {
        window_mass = 0.0;
      } else {
        const double margin = 1e-12 * ys.width();
        window_mass = adaptive_simpson(
            [&](double y) {
              const double l = joint.log_conditional(y, x);
              return l == -kInf ? 0.0 : std::exp(l);
            },
            a + margin, b - margin);
      }
    }
    if (window_mass > 0.0) logs[i] = lx + std::log(window_mass);
  }
  ConditionalLaw law;
  law.density = normalized_grid_from_logs(support, std::move(logs),
                                          ErrorCode::empty_shell,
                                          "the energy shell carries no probability");
  law.h = h;
  law.delta = delta;
  return law;
}

}  // namespace gibbslab
