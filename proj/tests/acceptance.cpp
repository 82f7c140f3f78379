// End-to-end acceptance checks. Each criterion prints exactly one PASS/FAIL
// line; the process exit code is the number of failed criteria. Tolerances
// are pinned here on purpose — they are the contract, not tuning knobs.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <numeric>
#include <regex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gibbslab/conditional.hpp"
#include "gibbslab/counting.hpp"
#include "gibbslab/density.hpp"
#include "gibbslab/exchange.hpp"
#include "gibbslab/joint.hpp"
#include "gibbslab/limitlaw.hpp"
#include "gibbslab/phasespace.hpp"
#include "gibbslab/rng.hpp"
#include "gibbslab/runner.hpp"
#include "gibbslab/thermo.hpp"

using namespace gibbslab;
namespace fs = std::filesystem;

namespace {

int failures = 0;
using Result = std::pair<bool, std::string>;

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

void criterion(int index, const std::string& label,
               const std::function<Result()>& body) {
  bool ok = false;
  std::string detail;
  try {
    std::tie(ok, detail) = body();
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("unexpected exception: ") + e.what();
  }
  std::printf("%s criterion %d: %s [%s]\n", ok ? "PASS" : "FAIL", index,
              label.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

Line ols(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  Line fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Exact Gamma(2,1) + Gamma(3,1) conditional against the scaled-beta closed
// form on the full node grid.
Result exact_conditional_matches_beta() {
  const JointLaw joint = JointLaw::independent(Density1D::gamma(2.0, 1.0),
                                               Density1D::gamma(3.0, 1.0));
  const ConditionalLaw law = exact_conditional_continuous(joint, 1.0);
  const std::size_t points = kDefaultConditionalGridPoints;
  double worst = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double x =
        static_cast<double>(i) / static_cast<double>(points - 1);
    const double expected = 12.0 * x * (1.0 - x) * (1.0 - x);
    worst = std::max(worst, std::abs(law.density.pdf(x) - expected));
  }
  return {worst < 1e-6, "max pointwise error " + fmt(worst) + " vs 1e-6"};
}

// The asymptotic conditional's log-ratio to the prior is linear with slope
// equal to minus the bath log-slope at the total.
Result asymptotic_ratio_is_exponential_tilt() {
  const double h = 2.0;
  const Density1D f_x = Density1D::exponential(1.0);
  const Density1D f_y = Density1D::gamma(5.0, 1.0);
  const JointLaw joint = JointLaw::independent(f_x, f_y);

  const double psi = tilt_exponent(joint, h);
  const double psi_analytic = (5.0 - 1.0) / h - 1.0;
  const ConditionalLaw law = asymptotic_conditional(f_x, joint, h);

  const Interval sup = law.density.support();
  const std::size_t points = kDefaultConditionalGridPoints;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = sup.lo + (static_cast<double>(i) + 0.5) * sup.width() /
                                  static_cast<double>(points);
    const double num = law.density.pdf(x);
    const double den = f_x.pdf(x);
    if (num <= 0.0 || den <= 0.0) continue;
    xs.push_back(x);
    ys.push_back(std::log(num / den));
  }
  const Line fit = ols(xs, ys);

  const bool linear = fit.r_squared > 1.0 - 1e-10;
  const bool slope_ok = std::abs(-fit.slope - psi) <= 1e-6;
  const bool psi_ok = std::abs(psi - psi_analytic) <= 1e-6;
  return {linear && slope_ok && psi_ok,
          "R^2 " + fmt(fit.r_squared) + ", slope " + fmt(fit.slope) +
              ", tilt " + fmt(psi) + " vs analytic " + fmt(psi_analytic)};
}

// KL of exact-vs-asymptotic decays strictly, faster than n^(-2/3), as the
// subsystem shrinks against a fixed bath.
Result kl_decay_beats_two_thirds() {
  const auto start = std::chrono::steady_clock::now();
  const SmallSystemSequence seq{
      JointLaw::independent(Density1D::exponential(1.0),
                            Density1D::gamma(5.0, 1.0)),
      {10, 30, 100, 300, 1000},
      {}};
  const ConvergenceReport report = convergence_study(seq, 4.0);

  bool decreasing = true;
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& row : report.rows) {
    if (row.floored) continue;
    if (row.kl >= prev) decreasing = false;
    prev = row.kl;
  }
  const double elapsed = seconds_since(start);
  const bool slope_ok = report.slope <= -2.0 / 3.0 + 0.2;
  const bool fast_enough = elapsed < 120.0;
  return {decreasing && slope_ok && fast_enough,
          "slope " + fmt(report.slope) + " vs -0.4667, strictly decreasing " +
              (decreasing ? "yes" : "no") + ", " + fmt(elapsed) + " s"};
}

// Direct in-shell sampling of a small harmonic subsystem reproduces the
// canonical law with the inverse temperature measured from the bath's
// density of states; agreement improves with bath size.
Result shell_sampling_matches_canonical() {
  const double h = 100.0;
  const double delta = 0.1;
  const std::int64_t count = 100000;

  const SeparableHamiltonian H = SeparableHamiltonian::harmonic(2, 200);
  const ShellSampleSet samples = sample_energy_shell(
      H, h, delta, count, 2, {}, ShellSamplerKind::direct);
  const DensityOfStates dos =
      density_of_states(H.bath_powers(), Interval{0.25 * h, 1.75 * h}, 801);
  const double psi = dos.beta_at(h);
  const double ks = ks_to_canonical(samples, psi);

  std::vector<double> sweep_ks;
  const std::vector<int> bath_sizes = {20, 50, 200};
  for (std::size_t i = 0; i < bath_sizes.size(); ++i) {
    const SeparableHamiltonian Hi =
        SeparableHamiltonian::harmonic(2, bath_sizes[i]);
    const ShellSampleSet si = sample_energy_shell(
        Hi, h, delta, count, 3 + i, {}, ShellSamplerKind::direct);
    const DensityOfStates di = density_of_states(
        Hi.bath_powers(), Interval{0.25 * h, 1.75 * h}, 801);
    sweep_ks.push_back(ks_to_canonical(si, di.beta_at(h)));
  }
  // Two-sigma statistical slack for a KS statistic at this sample count.
  const double slack = 0.52 / std::sqrt(static_cast<double>(count));
  bool monotone = true;
  for (std::size_t i = 1; i < sweep_ks.size(); ++i)
    if (sweep_ks[i] > sweep_ks[i - 1] + slack) monotone = false;

  return {ks < 0.02 && monotone,
          "KS " + fmt(ks) + " vs 0.02; sweep " + fmt(sweep_ks[0]) + " -> " +
              fmt(sweep_ks[1]) + " -> " + fmt(sweep_ks[2]) +
              (monotone ? " decreasing" : " NOT decreasing")};
}

// The exponentially tilted prior reproduces the exact discrete conditional,
// and the inverse-factorial prior tilts to a truncated Poisson law.
Result tilted_pmf_tracks_exact_conditional() {
  const DiscretePMF prior = DiscretePMF::poisson(2.0);
  const std::int64_t n = 1000;
  const double bath_mean = 3.0 * static_cast<double>(n);
  const std::int64_t m = std::llround(2.0 + bath_mean);
  const DiscretePMF bath =
      DiscretePMF::poisson(bath_mean, static_cast<std::size_t>(m) + 2);

  const double mu = pmf_tilt_at(bath, m);
  const DiscreteConditionalLaw exact = exact_conditional_discrete(
      prior, [&bath](std::int64_t l, std::int64_t) { return bath.log_p(l); },
      m);
  const DiscretePMF tilted = tilted_pmf(prior, mu, m);
  const double tv = DiscretePMF::tv_distance(exact.pmf, tilted);

  const double lambda = 3.0;
  const DiscretePMF factorial_tilted =
      tilted_pmf(DiscretePMF::inverse_factorial(21), std::log(lambda), 20);
  const DiscretePMF poisson_ref = DiscretePMF::poisson(lambda, 21);
  double gap = 0.0;
  for (std::int64_t k = 0; k <= 20; ++k)
    gap = std::max(gap, std::abs(factorial_tilted.p(k) - poisson_ref.p(k)));

  return {tv < 1e-2 && gap <= 1e-12,
          "TV " + fmt(tv) + " vs 1e-2; factorial-vs-Poisson gap " + fmt(gap)};
}

// At one particle the two counting conventions coincide; at four the labeled
// law equals the exhaustive enumeration over all 16 configurations.
Result counting_conventions_and_enumeration() {
  const GibbsParadoxReport single =
      gibbs_paradox_demo(RegionPair::demo(0.5, 1.0, 1));
  const bool single_ok = std::abs(single.kl) <= 1e-12;

  const GibbsParadoxReport quad =
      gibbs_paradox_demo(RegionPair::demo(0.5, 1.0, 4));
  std::vector<double> enumerated(5, 0.0);
  for (int mask = 0; mask < 16; ++mask) {
    int k = 0;
    for (int bit = 0; bit < 4; ++bit)
      if (mask & (1 << bit)) ++k;
    enumerated[static_cast<std::size_t>(k)] += 1.0 / 16.0;
  }
  double gap = 0.0;
  for (std::int64_t k = 0; k <= 4; ++k)
    gap = std::max(gap, std::abs(quad.law_distinct.p(k) -
                                 enumerated[static_cast<std::size_t>(k)]));

  return {single_ok && gap <= 1e-12,
          "single-particle KL " + fmt(single.kl) + "; enumeration gap " +
              fmt(gap)};
}

// The Legendre transform of an equipartition entropy approaches the exact
// free energy at rate gap/V -> 0.
Result legendre_gap_shrinks_per_volume() {
  const auto family = [](double volume) {
    return ExtensiveEntropy::ideal_gas(1.5, volume);
  };
  const std::vector<FreeEnergyReport> reports =
      free_energy_sweep(family, {100.0, 1000.0, 10000.0}, 1.0);

  bool decreasing = true;
  for (std::size_t i = 1; i < reports.size(); ++i)
    if (reports[i].gap_per_volume >= reports[i - 1].gap_per_volume)
      decreasing = false;
  const double at_thousand = reports[1].gap_per_volume;

  return {decreasing && at_thousand < 0.01,
          "gap/V " + fmt(reports[0].gap_per_volume) + " -> " +
              fmt(reports[1].gap_per_volume) + " -> " +
              fmt(reports[2].gap_per_volume) + "; at V=1e3: " +
              fmt(at_thousand) + " vs 0.01"};
}

// The variance inequality is tight for the exponential law and holds across
// a 3x3 gamma grid.
Result fluctuation_bounds_hold() {
  const FluctuationReport expo = fluctuation_bounds(Density1D::exponential(1.0));
  const bool tight = std::abs(expo.lhs) <= 1e-12 && std::abs(expo.rhs) <= 1e-12;
  const bool second = std::abs(expo.second_moment_product - 2.0) <= 1e-9;

  double min_slack = std::numeric_limits<double>::infinity();
  for (double shape : {2.0, 3.0, 5.0})
    for (double scale : {0.5, 1.0, 2.0}) {
      const FluctuationReport r = fluctuation_bounds(Density1D::gamma(shape, scale));
      min_slack = std::min(min_slack, r.lhs - r.rhs);
    }

  return {tight && second && min_slack >= -1e-9,
          "exponential lhs " + fmt(expo.lhs) + ", rhs " + fmt(expo.rhs) +
              ", E[Y^2]E[beta^2] " + fmt(expo.second_moment_product) +
              "; grid min slack " + fmt(min_slack)};
}

// Fifty randomized density pairs satisfy the unnormalized relative-entropy
// lower bound, with equality when the reference is a rescaling of the law.
Result randomized_kl_lower_bound() {
  Philox rng(777u);
  double min_slack = std::numeric_limits<double>::infinity();
  double max_identity_gap = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto draw = [&rng](bool unnormalized) {
      const int family = static_cast<int>(rng.uniform() * 4.0);
      Density1D d = Density1D::uniform(0.0, 10.0);
      switch (family) {
        case 0:
          d = Density1D::exponential(rng.uniform(0.3, 3.0), Interval{0.0, 10.0});
          break;
        case 1:
          d = Density1D::gamma(rng.uniform(1.0, 5.0), rng.uniform(0.3, 3.0),
                               Interval{0.0, 10.0});
          break;
        case 2:
          d = Density1D::power_law(1.0, rng.uniform(0.0, 3.0), 10.0);
          break;
        default:
          break;
      }
      if (unnormalized) return d.scaled_mass(std::exp(rng.uniform(-2.0, 2.0)));
      return d.normalized();
    };
    const Density1D f = draw(false);
    const Density1D g = draw(true);
    const KlBoundReport report = kl_lower_bound_check(f, g);
    min_slack = std::min(min_slack, report.slack);
    max_identity_gap = std::max(
        max_identity_gap, std::abs(report.slack - report.kl_normalized));
  }

  const Density1D f_eq = Density1D::exponential(1.0, Interval{0.0, 20.0});
  const KlBoundReport equality =
      kl_lower_bound_check(f_eq, f_eq.scaled_mass(2.0));

  return {min_slack >= -1e-9 && max_identity_gap <= 1e-8 &&
              std::abs(equality.slack) <= 1e-8,
          "min slack " + fmt(min_slack) + "; |slack - KL| max " +
              fmt(max_identity_gap) + "; equality slack " +
              fmt(equality.slack)};
}

// Conserved-total and open-with-selection kinetic exchange runs agree city by
// city, and disjoint same-size cities in one run share a slope.
Result exchange_modes_agree() {
  const auto start = std::chrono::steady_clock::now();
  const std::int64_t agents = 10000;
  const double total = 10000.0;
  const std::int64_t steps = 1112000000;
  const double delta = 0.01 * total;

  std::vector<std::vector<std::int64_t>> cities;
  cities.push_back({0});
  std::vector<std::int64_t> mid, far;
  for (std::int64_t i = 100; i < 150; ++i) mid.push_back(i);
  for (std::int64_t i = 500; i < 550; ++i) far.push_back(i);
  cities.push_back(mid);
  cities.push_back(far);

  const ExchangeEconomy econ_a(agents, total, cities, ExchangeMode::conserved);
  const ExchangeEconomy econ_b(agents, total, cities, ExchangeMode::open, delta);
  auto future_a = std::async(std::launch::async,
                             [&] { return run_exchange(econ_a, steps, 2024); });
  auto future_b = std::async(std::launch::async,
                             [&] { return run_exchange(econ_b, steps, 2025); });
  const ExchangeRunResult a = future_a.get();
  const ExchangeRunResult b = future_b.get();

  bool modes_agree = true;
  double worst_tv = 0.0, worst_z = 0.0;
  for (std::size_t i = 0; i < cities.size(); ++i) {
    const AbComparison cmp = compare_ab(a.histograms[i], b.histograms[i]);
    const double z = std::abs(cmp.beta_a - cmp.beta_b) / cmp.se;
    worst_tv = std::max(worst_tv, cmp.tv);
    worst_z = std::max(worst_z, z);
    if (cmp.tv >= 0.02 || z >= 3.0) modes_agree = false;
  }

  const SubsystemHistogram& h1 = a.histograms[1];
  const SubsystemHistogram& h2 = a.histograms[2];
  const double joint_se =
      std::sqrt(h1.beta_se * h1.beta_se + h2.beta_se * h2.beta_se);
  const double city_gap = std::abs(h1.beta_hat - h2.beta_hat);
  const bool cities_agree = city_gap <= 2.0 * joint_se;

  const double elapsed = seconds_since(start);
  const bool enough = a.snapshots_accepted >= 100000;
  return {modes_agree && cities_agree && enough && elapsed < 300.0,
          "worst TV " + fmt(worst_tv) + " vs 0.02; worst z " + fmt(worst_z) +
              " vs 3; city slope gap " + fmt(city_gap) + " vs 2se " +
              fmt(2.0 * joint_se) + "; " +
              std::to_string(a.snapshots_accepted) + " snapshots, " +
              fmt(elapsed) + " s"};
}

// The two-parameter indeterminacy family solves both moment constraints yet
// yields genuinely different laws as the window shrinks first.
Result indeterminacy_family_constraints() {
  double worst_constraint = 0.0;
  double worst_mean = 0.0;
  for (double gamma : {0.0, 1.0}) {
    for (std::int64_t n : {std::int64_t{1}, std::int64_t{7}, std::int64_t{1000}}) {
      const CounterexampleFamily fam = construct_counterexample(gamma, n);
      worst_constraint =
          std::max(worst_constraint, std::abs(fam.omega_constraint - 1.0));
      worst_constraint =
          std::max(worst_constraint, std::abs(fam.mean_constraint - 1.0));
      worst_mean = std::max(
          worst_mean, std::abs(fam.mean - 1.0 / static_cast<double>(n)));
    }
  }
  const CounterexampleFamily flat = construct_counterexample(0.0, 1);
  const CounterexampleFamily linear = construct_counterexample(1.0, 1);
  const double kl = Density1D::kl_divergence(flat.density, linear.density);

  return {worst_constraint <= 1e-8 && worst_mean <= 1e-8 && kl > 0.1,
          "constraint error " + fmt(worst_constraint) + "; mean error " +
              fmt(worst_mean) + "; member KL " + fmt(kl) + " vs 0.1"};
}

// Re-running an experiment with the same seed in single-worker mode yields
// byte-identical outputs.
Result reruns_are_byte_identical() {
  const std::string config =
      R"({"experiment": "kl-bound", "pairs": 10, "seed": 5})";
  const fs::path da = "acceptance_out/det_a";
  const fs::path db = "acceptance_out/det_b";
  fs::remove_all(da);
  fs::remove_all(db);

  const RunOutcome a = run_experiment_config(config, da.string());
  const RunOutcome b = run_experiment_config(config, db.string());
  if (a.exit_code != kRunPass || b.exit_code != kRunPass)
    return {false, "runs exited " + std::to_string(a.exit_code) + " and " +
                       std::to_string(b.exit_code)};

  const std::regex duration("\n  \"duration_seconds\": [^\n]*");
  const std::string ma = std::regex_replace(a.manifest_json, duration, "");
  const std::string mb = std::regex_replace(b.manifest_json, duration, "");
  if (ma != mb) return {false, "manifests differ beyond duration"};

  int compared = 0;
  for (const auto& entry : fs::directory_iterator(da)) {
    const std::string name = entry.path().filename().string();
    if (name == "run_manifest.json") continue;
    if (slurp(da / name) != slurp(db / name))
      return {false, "output file " + name + " differs between reruns"};
    ++compared;
  }
  return {compared > 0,
          std::to_string(compared) + " output files byte-identical"};
}

}  // namespace

int main() {
  criterion(1, "exact conditional matches the scaled-beta closed form",
            exact_conditional_matches_beta);
  criterion(2, "asymptotic conditional is an exponential tilt of the prior",
            asymptotic_ratio_is_exponential_tilt);
  criterion(3, "divergence from the limit law decays faster than n^(-2/3)",
            kl_decay_beats_two_thirds);
  criterion(4, "energy-shell sampling reproduces the canonical subsystem law",
            shell_sampling_matches_canonical);
  criterion(5, "tilted counting prior tracks the exact discrete conditional",
            tilted_pmf_tracks_exact_conditional);
  criterion(6, "counting conventions coincide where they must",
            counting_conventions_and_enumeration);
  criterion(7, "Legendre free energy converges per volume",
            legendre_gap_shrinks_per_volume);
  criterion(8, "temperature-fluctuation variance bounds hold and are tight",
            fluctuation_bounds_hold);
  criterion(9, "relative-entropy lower bound holds on randomized pairs",
            randomized_kl_lower_bound);
  criterion(10, "conserved and open exchange ensembles are equivalent",
            exchange_modes_agree);
  criterion(11, "indeterminacy family meets its constraints yet differs",
            indeterminacy_family_constraints);
  criterion(12, "same-seed reruns are byte-identical",
            reruns_are_byte_identical);

  if (failures == 0)
    std::printf("acceptance: all 12 criteria passed\n");
  else
    std::printf("acceptance: %d criteria FAILED\n", failures);
  return failures;
}
