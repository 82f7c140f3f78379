#include "gibbslab/counting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gibbslab/error.hpp"
#include "gibbslab/jsonio.hpp"
#include "gibbslab/numerics.hpp"
#include "gibbslab/rng.hpp"

namespace gibbslab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double poisson_log_pmf(double mean, std::int64_t l) {
  if (l < 0) return -kInf;
  if (mean <= 0.0) return l == 0 ? 0.0 : -kInf;
  return -mean + static_cast<double>(l) * std::log(mean) -
         std::lgamma(static_cast<double>(l) + 1.0);
}

double binomial_log_pmf(std::int64_t n, double q, std::int64_t l) {
  if (l < 0 || l > n) return -kInf;
  if (q <= 0.0) return l == 0 ? 0.0 : -kInf;
  if (q >= 1.0) return l == n ? 0.0 : -kInf;
  const double dn = static_cast<double>(n), dl = static_cast<double>(l);
  return std::lgamma(dn + 1.0) - std::lgamma(dl + 1.0) - std::lgamma(dn - dl + 1.0) +
         dl * std::log(q) + (dn - dl) * std::log1p(-q);
}

// Tilt from three consecutive log-pmf values around m: minus the central
// one-lattice-step log-slope, one-sided when a neighbor has no mass.
double slope_tilt(double lp_prev, double lp_here, double lp_next, bool* one_sided) {
  require(lp_here > -kInf, ErrorCode::boundary_evaluation,
          "the conditioning total carries no bath probability");
  const bool has_prev = lp_prev > -kInf;
  const bool has_next = lp_next > -kInf;
  if (one_sided != nullptr) *one_sided = !(has_prev && has_next);
  if (has_prev && has_next) return -0.5 * (lp_next - lp_prev);
  if (has_next) return -(lp_next - lp_here);
  if (has_prev) return -(lp_here - lp_prev);
  raise(ErrorCode::zero_mass,
        "the bath pmf is isolated at the conditioning total; no slope exists");
}
}  // namespace

CountingPair CountingPair::poisson_family(DiscretePMF prior, double rate) {
  require(rate > 0.0 && std::isfinite(rate), ErrorCode::invalid_argument,
          "bath rate must be positive");
  CountingPair pair;
  pair.prior_ = std::move(prior);
  pair.family_ = BathFamily::poisson;
  pair.rate_ = rate;
  return pair;
}

CountingPair CountingPair::bernoulli_family(DiscretePMF prior, double q) {
  require(q > 0.0 && q < 1.0, ErrorCode::invalid_argument,
          "success probability must lie in (0, 1)");
  CountingPair pair;
  pair.prior_ = std::move(prior);
  pair.family_ = BathFamily::bernoulli_sum;
  pair.rate_ = q;
  return pair;
}

CountingPair CountingPair::custom(
    DiscretePMF prior,
    std::function<double(std::int64_t, std::int64_t, std::int64_t)> log_conditional,
    std::function<std::int64_t(std::int64_t)> support_max, bool independent) {
  require(static_cast<bool>(log_conditional), ErrorCode::invalid_argument,
          "custom pairs need a conditional log-pmf");
  CountingPair pair;
  pair.prior_ = std::move(prior);
  pair.family_ = BathFamily::custom;
  pair.independent_ = independent;
  pair.log_conditional_ = std::move(log_conditional);
  pair.support_max_ = std::move(support_max);
  return pair;
}

DiscretePMF CountingPair::bath_pmf(std::int64_t n, std::size_t min_size) const {
  require(n >= 1, ErrorCode::invalid_argument, "bath index must be positive");
  switch (family_) {
    case BathFamily::poisson: {
      const double mean = static_cast<double>(n) * rate_;
      const std::size_t base =
          static_cast<std::size_t>(std::ceil(mean + 12.0 * std::sqrt(mean + 1.0) + 30.0));
      return DiscretePMF::poisson(mean, std::max(min_size, base));
    }
    case BathFamily::bernoulli_sum:
      return DiscretePMF::binomial(n, rate_);
    case BathFamily::custom:
      raise(ErrorCode::invalid_argument,
            "custom pairs have no closed-form bath marginal");
  }
  raise(ErrorCode::internal, "unreachable bath family");
}

double CountingPair::bath_mean(std::int64_t n) const {
  require(family_ != BathFamily::custom, ErrorCode::invalid_argument,
          "custom pairs have no closed-form bath mean");
  return static_cast<double>(n) * rate_;
}

double CountingPair::log_bath(std::int64_t l, std::int64_t k, std::int64_t n) const {
  switch (family_) {
    case BathFamily::poisson:
      return poisson_log_pmf(static_cast<double>(n) * rate_, l);
    case BathFamily::bernoulli_sum:
      return binomial_log_pmf(n, rate_, l);
    case BathFamily::custom:
      return log_conditional_(l, k, n);
  }
  return -kInf;
}

std::int64_t CountingPair::bath_support_max(std::int64_t n) const {
  switch (family_) {
    case BathFamily::poisson:
      return -1;
    case BathFamily::bernoulli_sum:
      return n;
    case BathFamily::custom:
      return support_max_ ? support_max_(n) : -1;
  }
  return -1;
}

void CountingPair::check_bath_scaling(const std::vector<std::int64_t>& n_values,
                                      double lo, double hi) const {
  for (std::int64_t n : n_values) {
    const double per_unit = bath_mean(n) / static_cast<double>(n);
    require(per_unit >= lo && per_unit <= hi, ErrorCode::invalid_argument,
            "bath mean per unit index left the required band");
  }
}

double pmf_tilt_at(const DiscretePMF& bath, std::int64_t m, bool* one_sided) {
  require(m >= 0, ErrorCode::invalid_argument, "conditioning total must be >= 0");
  const double lp_prev = m > 0 ? bath.log_p(m - 1) : -kInf;
  return slope_tilt(lp_prev, bath.log_p(m), bath.log_p(m + 1), one_sided);
}

double discrete_tilt_exponent(const CountingPair& pair, double h, std::int64_t n,
                              bool* one_sided) {
  require(h > 0.0 && std::isfinite(h), ErrorCode::invalid_argument,
          "level must be positive and finite");
  require(n >= 1, ErrorCode::invalid_argument, "index must be positive");
  const std::int64_t m = std::llround(static_cast<double>(n) * h);
  require(m >= 0, ErrorCode::invalid_argument, "scaled total must be >= 0");

  const double lp_prev = m > 0 ? pair.log_bath(m - 1, 0, n) : -kInf;
  bool y_one_sided = false;
  double tilt = slope_tilt(lp_prev, pair.log_bath(m, 0, n),
                           pair.log_bath(m + 1, 0, n), &y_one_sided);
  bool x_one_sided = false;
  if (!pair.is_independent()) {
    // The small count sits at its own support edge (k = 0), so the x-partial
    // is always a one-sided forward difference.
    const double lp0 = pair.log_bath(m, 0, n);
    const double lp1 = pair.log_bath(m, 1, n);
    require(lp0 > -kInf && lp1 > -kInf, ErrorCode::boundary_evaluation,
            "the conditional pmf vanishes next to the evaluation point");
    tilt += lp1 - lp0;
    x_one_sided = true;
  }
  if (one_sided != nullptr) *one_sided = y_one_sided || x_one_sided;
  return tilt;
}

double tilted_normalizer(const DiscretePMF& prior, double mu, std::int64_t m) {
  require(m >= 0, ErrorCode::invalid_argument, "total must be >= 0");
  require(std::isfinite(mu), ErrorCode::invalid_argument, "tilt must be finite");
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(m) + 1);
  for (std::int64_t k = 0; k <= m; ++k) {
    const double lp = prior.log_p(k);
    if (lp > -kInf) logs.push_back(lp + mu * static_cast<double>(k));
  }
  if (logs.empty()) return 0.0;
  return std::exp(log_sum_exp(logs));
}

DiscretePMF tilted_pmf(const DiscretePMF& prior, double mu, std::int64_t m) {
  require(m >= 0, ErrorCode::invalid_argument, "total must be >= 0");
  require(std::isfinite(mu), ErrorCode::invalid_argument, "tilt must be finite");
  std::vector<double> logs(static_cast<std::size_t>(m) + 1, -kInf);
  bool any = false;
  for (std::int64_t k = 0; k <= m; ++k) {
    const double lp = prior.log_p(k);
    if (lp == -kInf) continue;
    logs[static_cast<std::size_t>(k)] = lp + mu * static_cast<double>(k);
    any = true;
  }
  require(any, ErrorCode::zero_mass, "the tilted pmf has no mass on 0..m");
  return DiscretePMF::from_log_weights(std::move(logs));
}

RegionPair RegionPair::infinitesimal(double volume_b, double volume_d,
                                     std::int64_t total_count) {
  require(volume_d > 0.0 && std::isfinite(volume_d), ErrorCode::invalid_argument,
          "full-region volume must be positive");
  require(volume_b > 0.0 && volume_b <= 0.05 * volume_d, ErrorCode::invalid_argument,
          "window volume must be positive and at most 5% of the region");
  require(total_count >= 0, ErrorCode::invalid_argument,
          "particle count must be >= 0");
  return RegionPair{volume_b, volume_d, total_count};
}

RegionPair RegionPair::demo(double volume_b, double volume_d,
                            std::int64_t total_count) {
  require(volume_d > 0.0 && std::isfinite(volume_d), ErrorCode::invalid_argument,
          "full-region volume must be positive");
  require(volume_b > 0.0 && volume_b <= volume_d, ErrorCode::invalid_argument,
          "window volume must be positive and fit inside the region");
  require(total_count >= 0, ErrorCode::invalid_argument,
          "particle count must be >= 0");
  return RegionPair{volume_b, volume_d, total_count};
}

DiscretePMF spatial_poisson_counts(const RegionPair& regions, std::int64_t samples,
                                   std::uint64_t seed) {
  require(samples >= 1, ErrorCode::invalid_argument, "need at least one placement");
  const std::int64_t n = regions.total_count;
  // Each placement drops all particles independently and uniformly, so the
  // window count is an exact Binomial(N, ratio) draw; sample it by CDF
  // inversion over the tabulated pmf.
  const DiscretePMF law = DiscretePMF::binomial(n, regions.ratio());
  std::vector<double> cdf(static_cast<std::size_t>(n) + 1);
  double acc = 0.0;
  for (std::int64_t k = 0; k <= n; ++k) {
    acc += law.p(k);
    cdf[static_cast<std::size_t>(k)] = acc;
  }
  cdf.back() = 1.0;

  std::vector<double> counts(static_cast<std::size_t>(n) + 1, 0.0);
  Philox rng(seed);
  for (std::int64_t s = 0; s < samples; ++s) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::size_t k = static_cast<std::size_t>(it - cdf.begin());
    counts[std::min(k, counts.size() - 1)] += 1.0;
  }
  return DiscretePMF::from_values(counts);
}

GibbsParadoxReport gibbs_paradox_demo(const RegionPair& regions) {
  const std::int64_t n = regions.total_count;
  require(n >= 1, ErrorCode::invalid_argument, "need at least one particle");
  const double r = regions.ratio();
  require(r < 1.0, ErrorCode::invalid_argument,
          "the window must be strictly smaller than the region");

  GibbsParadoxReport report;
  report.regions = regions;
  // Indistinguishable counting: inverse-factorial prior for the window count,
  // tilted by the bath's edge log-slope at the full total.
  const DiscretePMF bath = DiscretePMF::binomial(n, 1.0 - r);
  report.tilt = pmf_tilt_at(bath, n);
  report.law_indistinct =
      tilted_pmf(DiscretePMF::inverse_factorial(static_cast<std::size_t>(n) + 1),
                 report.tilt, n);
  // Labeled particles: occupancy law from direct configuration counting.
  report.law_distinct = DiscretePMF::binomial(n, r);
  report.kl = DiscretePMF::kl_divergence(report.law_indistinct, report.law_distinct);
  return report;
}

std::string GibbsParadoxReport::to_json(std::uint64_t seed) const {
  JsonValue root = JsonValue::object();
  JsonValue law_i = JsonValue::array();
  for (std::int64_t k = 0; k < static_cast<std::int64_t>(law_indistinct.size()); ++k) {
    law_i.push_back(JsonValue::real(law_indistinct.p(k)));
  }
  JsonValue law_ii = JsonValue::array();
  for (std::int64_t k = 0; k < static_cast<std::int64_t>(law_distinct.size()); ++k) {
    law_ii.push_back(JsonValue::real(law_distinct.p(k)));
  }
  root.set("law_i", std::move(law_i));
  root.set("law_ii", std::move(law_ii));
  root.set("kl", kl);
  JsonValue params = JsonValue::object();
  params.set("volume_b", regions.volume_b);
  params.set("volume_d", regions.volume_d);
  params.set("ratio", regions.ratio());
  params.set("total", regions.total_count);
  params.set("tilt", tilt);
  root.set("parameters", std::move(params));
  root.set("seed", static_cast<std::int64_t>(seed));
  return root.dump();
}

ColonyModel ColonyModel::make(std::array<double, 2> birth, std::array<double, 2> death,
                              std::array<double, 2> migration,
                              std::array<std::int64_t, 2> initial) {
  for (int i = 0; i < 2; ++i) {
    require(birth[i] > 0.0 && std::isfinite(birth[i]), ErrorCode::invalid_argument,
            "inflow rates must be positive");
    require(death[i] > 0.0 && std::isfinite(death[i]), ErrorCode::invalid_argument,
            "death rates must be positive");
    require(migration[i] >= 0.0 && std::isfinite(migration[i]),
            ErrorCode::invalid_argument, "migration rates must be >= 0");
    require(initial[i] >= 0, ErrorCode::invalid_argument,
            "initial populations must be >= 0");
  }
  ColonyModel model{birth, death, migration, initial};
  const auto means = model.equilibrium_means();
  require(means[0] <= 0.05 * means[1], ErrorCode::invalid_argument,
          "the first colony must be small: equilibrium mean at most 5% of the second");
  return model;
}

std::array<double, 2> ColonyModel::equilibrium_means() const {
  // Fixed point of the flow equations: inflow plus immigration balances
  // death plus emigration in each colony.
  const double d1 = death[0] + migration[0];
  const double d2 = death[1] + migration[1];
  const double det = d1 * d2 - migration[0] * migration[1];
  require(det > 0.0 && std::isfinite(det), ErrorCode::invalid_argument,
          "the flow equations have no stable fixed point");
  return {(birth[0] * d2 + birth[1] * migration[1]) / det,
          (birth[1] * d1 + birth[0] * migration[0]) / det};
}

ColonyReport colony_simulation(const ColonyModel& model, double t_max,
                               std::uint64_t seed,
                               std::optional<std::int64_t> target_total,
                               int replicas) {
  require(t_max > 0.0 && std::isfinite(t_max), ErrorCode::invalid_argument,
          "simulation horizon must be positive");
  require(replicas >= 1, ErrorCode::invalid_argument, "need at least one replica");
  for (int i = 0; i < 2; ++i) {
    require(model.birth[i] >= 0.0 && model.death[i] >= 0.0 &&
                model.migration[i] >= 0.0 && model.initial[i] >= 0,
            ErrorCode::invalid_argument, "rates and populations must be >= 0");
  }

  std::int64_t target = 0;
  if (target_total.has_value()) {
    require(*target_total >= 0, ErrorCode::invalid_argument,
            "target total must be >= 0");
    target = *target_total;
  } else {
    const auto means = model.equilibrium_means();
    target = std::llround(means[0] + means[1]);
  }

  const double burn_in = 0.1 * t_max;
  std::vector<double> conditional_weight(static_cast<std::size_t>(target) + 1, 0.0);
  std::vector<double> marginal_weight(1, 0.0);
  std::int64_t events = 0;
  bool absorbed = false;

  Philox master(seed);
  for (int replica = 0; replica < replicas; ++replica) {
    Philox rng = master.split(static_cast<std::uint64_t>(replica));
    std::int64_t n1 = model.initial[0];
    std::int64_t n2 = model.initial[1];
    double t = 0.0;
    while (t < t_max) {
      const double rates[6] = {
          model.birth[0],
          model.birth[1],
          model.death[0] * static_cast<double>(n1),
          model.death[1] * static_cast<double>(n2),
          model.migration[0] * static_cast<double>(n1),
          model.migration[1] * static_cast<double>(n2),
      };
      double total_rate = 0.0;
      for (double r : rates) total_rate += r;

      const double dwell_end =
          total_rate > 0.0 ? std::min(t + rng.exponential(total_rate), t_max) : t_max;
      const double credited = std::min(dwell_end, t_max) - std::max(t, burn_in);
      if (credited > 0.0) {
        if (static_cast<std::size_t>(n1) >= marginal_weight.size()) {
          marginal_weight.resize(static_cast<std::size_t>(n1) + 1, 0.0);
        }
        marginal_weight[static_cast<std::size_t>(n1)] += credited;
        if (n1 + n2 == target) {
          conditional_weight[static_cast<std::size_t>(n1)] += credited;
        }
      }
      if (total_rate <= 0.0) {
        absorbed = true;
        break;
      }
      t = dwell_end;
      if (t >= t_max) break;

      double pick = rng.uniform() * total_rate;
      int event = -1;
      for (int e = 0; e < 6; ++e) {
        if (rates[e] <= 0.0) continue;
        if (pick < rates[e]) {
          event = e;
          break;
        }
        pick -= rates[e];
      }
      if (event < 0) {
        // Rounding pushed pick past the last positive rate; take that one.
        for (int e = 5; e >= 0; --e) {
          if (rates[e] > 0.0) {
            event = e;
            break;
          }
        }
      }
      switch (event) {
        case 0: ++n1; break;
        case 1: ++n2; break;
        case 2: --n1; break;
        case 3: --n2; break;
        case 4: --n1; ++n2; break;
        case 5: ++n1; --n2; break;
      }
      ++events;
    }
  }

  ColonyReport report;
  report.target_total = target;
  report.events = events;
  report.total_time = std::max(0.0, t_max - burn_in) * replicas;
  double conditional_total = 0.0;
  for (double w : conditional_weight) conditional_total += w;
  report.conditional_time = conditional_total;
  report.marginal = DiscretePMF::from_values(marginal_weight);
  report.extinct = absorbed || conditional_total <= 0.0;
  if (conditional_total > 0.0) {
    report.conditional = DiscretePMF::from_values(conditional_weight);
  }

  // Theoretical comparison: tilted truncated prior built from the stationary
  // product-form means, when the fixed point exists.
  try {
    const auto means = model.equilibrium_means();
    const std::size_t prior_size = static_cast<std::size_t>(target) + 1;
    const DiscretePMF prior = DiscretePMF::poisson(means[0], prior_size);
    const DiscretePMF bath =
        DiscretePMF::poisson(means[1], static_cast<std::size_t>(target) + 2);
    report.tilt = pmf_tilt_at(bath, target);
    report.predicted = tilted_pmf(prior, report.tilt, target);
    if (conditional_total > 0.0) {
      report.tv_conditional_vs_predicted =
          DiscretePMF::tv_distance(report.conditional, report.predicted);
    }
  } catch (const Error&) {
    // No stable fixed point: the report carries simulation data only.
  }
  return report;
}

std::string pmf_to_csv(const DiscretePMF& pmf) {
  CsvWriter csv({"k", "p"});
  for (std::int64_t k = 0; k < static_cast<std::int64_t>(pmf.size()); ++k) {
    csv.add_row({static_cast<double>(k), pmf.p(k)});
  }
  return csv.dump();
}

}  // namespace gibbslab
