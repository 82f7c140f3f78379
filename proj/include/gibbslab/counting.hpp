#ifndef GIBBSLAB_COUNTING_HPP
#define GIBBSLAB_COUNTING_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gibbslab/density.hpp"

namespace gibbslab {

// Pair of counts (K, L_n): a fixed prior for the small count K plus an
// n-indexed bath family. The built-in families are independent of K; a
// custom conditional hook covers correlated pairs.
class CountingPair {
public:
  enum class BathFamily { poisson, bernoulli_sum, custom };

  // L_n ~ Poisson(n * rate): sum of n i.i.d. Poisson(rate) counts.
  static CountingPair poisson_family(DiscretePMF prior, double rate);
  // L_n ~ Binomial(n, q): sum of n i.i.d. Bernoulli(q) counts.
  static CountingPair bernoulli_family(DiscretePMF prior, double q);
  // Correlated pair: ln p_{L_n|K}(l; k). support_max(n) bounds the bath
  // support (negative for unbounded).
  static CountingPair custom(
      DiscretePMF prior,
      std::function<double(std::int64_t, std::int64_t, std::int64_t)> log_conditional,
      std::function<std::int64_t(std::int64_t)> support_max, bool independent);

  const DiscretePMF& prior() const { return prior_; }
  BathFamily family() const { return family_; }
  bool is_independent() const { return independent_; }
  double rate() const { return rate_; }

  // Law of L_n for the independent families. Unbounded families are sized to
  // cover at least min_size entries; bounded supports keep their natural size
  // (log_p is -inf beyond it).
  DiscretePMF bath_pmf(std::int64_t n, std::size_t min_size) const;
  double bath_mean(std::int64_t n) const;  // E[L_n]
  // ln p_{L_n|K}(l; k); for independent families this ignores k.
  double log_bath(std::int64_t l, std::int64_t k, std::int64_t n) const;
  // Largest l carrying mass, or -1 if unbounded.
  std::int64_t bath_support_max(std::int64_t n) const;

  // Raises if E[L_n]/n leaves [lo, hi] on any listed n (scaling contract).
  void check_bath_scaling(const std::vector<std::int64_t>& n_values, double lo,
                          double hi) const;

private:
  CountingPair() = default;

  DiscretePMF prior_ = DiscretePMF::point_mass(0, 1);
  BathFamily family_ = BathFamily::poisson;
  bool independent_ = true;
  double rate_ = 0.0;
  std::function<double(std::int64_t, std::int64_t, std::int64_t)> log_conditional_;
  std::function<std::int64_t(std::int64_t)> support_max_;
};

// Tilt exponent of a bath pmf at total m: minus the one-lattice-step central
// log-slope, one-sided at a support edge (sets *one_sided when provided).
double pmf_tilt_at(const DiscretePMF& bath, std::int64_t m,
                   bool* one_sided = nullptr);

// Tilt exponent of the Thm-3-style scaled pair at level h with index n:
// (1/n)[d/dx - d/dy] of the scaled log conditional at (y=h, x=0), which for
// an independent bath is the discrete log-slope tilt at m = round(n h).
double discrete_tilt_exponent(const CountingPair& pair, double h, std::int64_t n,
                              bool* one_sided = nullptr);

// Sum over k = 0..m of prior(k) e^{mu k}, stabilized in log space.
double tilted_normalizer(const DiscretePMF& prior, double mu, std::int64_t m);

// Normalized tilted pmf prior(k) e^{mu k} on 0..m.
DiscretePMF tilted_pmf(const DiscretePMF& prior, double mu, std::int64_t m);

// A small observation window inside a larger region, with the total particle
// count placed uniformly in the larger region.
struct RegionPair {
  double volume_b = 0.0;  // window volume
  double volume_d = 0.0;  // full-region volume
  std::int64_t total_count = 0;

  // Enforces the small-window regime volume_b <= 0.05 * volume_d.
  static RegionPair infinitesimal(double volume_b, double volume_d,
                                  std::int64_t total_count);
  // Only requires 0 < volume_b <= volume_d (for didactic comparisons).
  static RegionPair demo(double volume_b, double volume_d,
                         std::int64_t total_count);

  double ratio() const { return volume_b / volume_d; }
};

// Empirical pmf of the window count over `samples` independent uniform
// placements of all particles.
DiscretePMF spatial_poisson_counts(const RegionPair& regions, std::int64_t samples,
                                   std::uint64_t seed);

// Side-by-side window-count laws for a fixed total: tilted inverse-factorial
// prior (indistinguishable counting) vs binomial occupancy (labeled
// particles), with their divergence.
struct GibbsParadoxReport {
  DiscretePMF law_indistinct = DiscretePMF::point_mass(0, 1);
  DiscretePMF law_distinct = DiscretePMF::point_mass(0, 1);
  double kl = 0.0;
  double tilt = 0.0;
  RegionPair regions;

  std::string to_json(std::uint64_t seed = 0) const;
};

GibbsParadoxReport gibbs_paradox_demo(const RegionPair& regions);

// Two colonies with constant inflow, per-capita death, and per-capita
// migration between them.
struct ColonyModel {
  std::array<double, 2> birth = {0.0, 0.0};      // constant inflow rates
  std::array<double, 2> death = {0.0, 0.0};      // per-capita death rates
  std::array<double, 2> migration = {0.0, 0.0};  // [0]: 1->2, [1]: 2->1, per capita
  std::array<std::int64_t, 2> initial = {0, 0};

  // Validates rates and the small/large regime: first colony's equilibrium
  // mean at most 5% of the second's.
  static ColonyModel make(std::array<double, 2> birth, std::array<double, 2> death,
                          std::array<double, 2> migration,
                          std::array<std::int64_t, 2> initial);

  // Deterministic fixed point: inflow balanced with outflow per colony.
  std::array<double, 2> equilibrium_means() const;
};

struct ColonyReport {
  DiscretePMF conditional = DiscretePMF::point_mass(0, 1);  // K | total = target
  DiscretePMF marginal = DiscretePMF::point_mass(0, 1);     // K unconditioned
  DiscretePMF predicted = DiscretePMF::point_mass(0, 1);    // tilted-pmf form
  std::int64_t target_total = 0;
  double tilt = 0.0;
  double tv_conditional_vs_predicted = 1.0;
  double conditional_time = 0.0;  // post-burn-in sojourn at the target total
  double total_time = 0.0;        // post-burn-in time accumulated
  std::int64_t events = 0;
  bool extinct = false;  // absorbed, or target total never visited
};

// Exact-jump simulation; sojourn-time-weighted laws collected after a fixed
// 10% burn-in. Replicas use split streams and merge deterministically.
ColonyReport colony_simulation(const ColonyModel& model, double t_max,
                               std::uint64_t seed,
                               std::optional<std::int64_t> target_total = {},
                               int replicas = 1);

// CSV with columns (k, p).
std::string pmf_to_csv(const DiscretePMF& pmf);

}  // namespace gibbslab

#endif
