#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gibbslab/error.hpp"
#include "gibbslab/numerics.hpp"
#include "gibbslab/phasespace.hpp"

using namespace gibbslab;

namespace {
constexpr double kPi = 3.14159265358979323846;

ShellObservable angle_observable() {
  return {"angle",
          [](const std::vector<double>& q) { return std::atan2(q[1], q[0]); }};
}
}  // namespace

TEST_CASE("separable energies") {
  SUBCASE("additivity is structural and parts are nonnegative") {
    const auto H = SeparableHamiltonian::harmonic(2, 20);
    const std::vector<double> q = {3.0, -4.0};
    const std::vector<double> bath(20, 0.5);
    CHECK(H.subsystem_energy(q) == 12.5);
    CHECK(H.bath_energy(bath) == doctest::Approx(20 * 0.125).epsilon(1e-14));
    CHECK(H.total_energy(q, bath) == H.subsystem_energy(q) + H.bath_energy(bath));
    CHECK(H.subsystem_energy({0.0, 0.0}) == 0.0);
  }

  SUBCASE("quartic and mixed terms") {
    const auto H = SeparableHamiltonian::quartic(1, 10);
    CHECK(H.subsystem_energy({2.0}) == doctest::Approx(4.0).epsilon(1e-14));
    const auto M = SeparableHamiltonian::mixed(
        {CoordinatePower::harmonic},
        std::vector<CoordinatePower>(10, CoordinatePower::quartic));
    CHECK(M.subsystem_energy({2.0}) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(M.subsystem_alpha() == doctest::Approx(0.5));
    CHECK(M.bath_alpha() == doctest::Approx(2.5));
  }

  SUBCASE("volume exponents and the bath tilt") {
    const auto H = SeparableHamiltonian::harmonic(2, 200);
    CHECK(H.subsystem_alpha() == doctest::Approx(1.0));
    CHECK(H.bath_alpha() == doctest::Approx(100.0));
    CHECK(H.tilt_prediction(100.0) == doctest::Approx(0.99).epsilon(1e-14));
    const auto Q = SeparableHamiltonian::quartic(1, 40);
    CHECK(Q.tilt_prediction(20.0) == doctest::Approx((10.0 - 1.0) / 20.0).epsilon(1e-14));
  }

  SUBCASE("a dominated bath is required") {
    CHECK_NOTHROW(SeparableHamiltonian::harmonic(2, 20));
    for (auto bad : {std::pair<int, int>{2, 19}, {2, 0}, {0, 20}}) {
      try {
        SeparableHamiltonian::harmonic(bad.first, bad.second);
        FAIL("expected an error");
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::invalid_shell);
      }
    }
  }
}

TEST_CASE("direct shell sampling of harmonic systems") {
  const auto H = SeparableHamiltonian::harmonic(2, 200);
  const auto set = sample_energy_shell(H, 100.0, 0.1, 100000, 11u);

  SUBCASE("bookkeeping") {
    CHECK(set.count() == 100000);
    CHECK(set.sampler_tag() == "direct-sphere");
    CHECK(set.acceptance_rate() == 1.0);
    CHECK(set.h() == 100.0);
    CHECK(set.n1() == 2);
    CHECK(set.n2() == 200);
    CHECK(set.subsystem_alpha() == doctest::Approx(1.0));
  }

  SUBCASE("every sample lies in the shell") {
    for (std::size_t i = 0; i < set.total_values().size(); ++i) {
      const double t = set.total_values()[i];
      CHECK(t > 100.0 - 0.05);
      CHECK(t <= 100.0 + 0.05);
      CHECK(set.u1_values()[i] >= 0.0);
      CHECK(set.u1_values()[i] <= t);
    }
  }

  SUBCASE("subsystem energy follows the sphere marginal") {
    // For n1 = 2 the scaled subsystem energy has density
    // (m-1)(1-u/h)^(m-2)/h with m = (n1+n2)/2.
    const double m = 0.5 * (2 + 200);
    const double ks = ks_statistic(set.u1_values(), [m](double u) {
      return 1.0 - std::pow(1.0 - u / 100.0, m - 1.0);
    });
    CHECK(ks < 0.02);
    CHECK(ks < 0.006);  // measured 0.00265 at this seed
  }

  SUBCASE("subsystem energy approaches the canonical form") {
    const double psi = H.tilt_prediction(100.0);
    const double ks = ks_to_canonical(set, psi);
    CHECK(ks < 0.02);  // 3x the asymptotic KS noise 1.36/sqrt(1e5) allows 0.013
    CHECK(ks < 0.009);  // measured 0.00702
  }

  SUBCASE("empirical cdf anchors") {
    CHECK(empirical_subsystem_cdf(set, 100.0 + 0.05) == 1.0);
    CHECK(empirical_subsystem_cdf(set, 0.0) == 0.0);
    const double psi = H.tilt_prediction(100.0);
    const double emp = empirical_subsystem_cdf(set, 1.0);
    CHECK(std::abs(emp - (1.0 - std::exp(-psi))) < 0.01);  // measured 0.0041
  }

  SUBCASE("same seed reproduces, different seed does not") {
    const auto again = sample_energy_shell(H, 100.0, 0.1, 200, 11u);
    const auto other = sample_energy_shell(H, 100.0, 0.1, 200, 12u);
    const auto first = sample_energy_shell(H, 100.0, 0.1, 200, 11u);
    CHECK(again.u1_values() == first.u1_values());
    CHECK(again.u1_values() != other.u1_values());
  }
}

TEST_CASE("bath growth drives the subsystem law to the canonical form") {
  // Growing n2 at fixed h must shrink the KS distance; this is the
  // order-of-limits direction (bath first, then the shell width).
  std::vector<double> ks;
  for (int n2 : {20, 50, 200}) {
    const auto H = SeparableHamiltonian::harmonic(2, n2);
    const auto set = sample_energy_shell(H, 100.0, 0.1, 100000,
                                         101u + static_cast<std::uint64_t>(n2));
    ks.push_back(ks_to_canonical(set, H.tilt_prediction(100.0)));
  }
  // Measured: 0.0628, 0.0233, 0.0068. Two-sigma KS noise at 1e5 samples is
  // about 0.009, far below the observed decrements.
  CHECK(ks[0] > ks[1]);
  CHECK(ks[1] > ks[2]);
  CHECK(ks[2] < 0.02);
  CHECK(ks[0] > 0.04);
}

TEST_CASE("shrinking the shell width moves the law by less than noise") {
  const auto H = SeparableHamiltonian::harmonic(2, 50);
  const auto wide = sample_energy_shell(H, 100.0, 1.0, 20000, 7u);
  const auto thin = sample_energy_shell(H, 100.0, 0.05, 20000, 8u);
  double worst = 0.0;
  for (double x = 0.0; x <= 30.0; x += 0.25) {
    worst = std::max(worst, std::abs(empirical_subsystem_cdf(wide, x) -
                                     empirical_subsystem_cdf(thin, x)));
  }
  // 1% two-sample critical value 1.63 sqrt(2/n) = 0.0163; measured 0.0136.
  CHECK(worst < 1.63 * std::sqrt(2.0 / 20000.0));
}

TEST_CASE("conditional expectations") {
  SUBCASE("constant observable is exact") {
    const auto H = SeparableHamiltonian::harmonic(2, 20);
    std::vector<ShellObservable> obs;
    obs.push_back({"one", [](const std::vector<double>&) { return 1.0; }});
    const auto set = sample_energy_shell(H, 10.0, 0.1, 500, 3u, obs);
    const auto one = conditional_expectation(set, "one");
    CHECK(one.mean == 1.0);
    CHECK(one.se == 0.0);
  }

  SUBCASE("subsystem energy matches the canonical quadrature prediction") {
    const auto H = SeparableHamiltonian::harmonic(2, 2000);
    const auto set = sample_energy_shell(H, 100.0, 0.1, 10000, 21u);
    const double psi = H.tilt_prediction(100.0);
    const auto u1 = conditional_expectation(set, "u1");
    const double pred = canonical_subsystem_mean(H, 100.05, psi);
    CHECK(std::abs(u1.mean - pred) < 3.0 * u1.se);  // measured z = 0.71
    CHECK(pred == doctest::Approx(1.0 / psi).epsilon(1e-3));
  }

  SUBCASE("moderate bath still matches within three standard errors") {
    const auto H = SeparableHamiltonian::harmonic(2, 200);
    const auto set = sample_energy_shell(H, 100.0, 0.1, 2000, 22u);
    const auto u1 = conditional_expectation(set, "u1");
    const double pred = canonical_subsystem_mean(H, 100.05, H.tilt_prediction(100.0));
    CHECK(std::abs(u1.mean - pred) < 3.0 * u1.se);  // measured z = 1.97
  }

  SUBCASE("equipartition: a squared coordinate carries half the pair energy") {
    const auto H = SeparableHamiltonian::harmonic(2, 2000);
    std::vector<ShellObservable> obs;
    obs.push_back({"q1sq", [](const std::vector<double>& q) { return q[0] * q[0]; }});
    const auto set = sample_energy_shell(H, 100.0, 0.1, 10000, 21u, obs);
    const auto q1 = conditional_expectation(set, "q1sq");
    const auto u1 = conditional_expectation(set, "u1");
    // q1^2/2 + q2^2/2 = U1 and the coordinates are exchangeable, so
    // E[q1^2] = E[U1].
    const double se = std::sqrt(q1.se * q1.se + u1.se * u1.se);
    CHECK(std::abs(q1.mean - u1.mean) < 3.0 * se);  // measured z = 0.42
  }

  SUBCASE("unknown observables and empty sets are rejected") {
    const auto H = SeparableHamiltonian::harmonic(2, 20);
    const auto set = sample_energy_shell(H, 10.0, 0.1, 50, 3u);
    CHECK_THROWS_AS(conditional_expectation(set, "missing"), Error);
    const auto empty = sample_energy_shell(H, 10.0, 0.1, 0, 3u);
    try {
      conditional_expectation(empty, "u1");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::empty_sample_set);
    }
    CHECK_THROWS_AS(empirical_subsystem_cdf(empty, 1.0), Error);
  }
}

TEST_CASE("rejection sampling from the bounding box") {
  SUBCASE("feasible low-dimensional shell") {
    const auto H = SeparableHamiltonian::harmonic(1, 10);
    const auto rej =
        sample_energy_shell(H, 20.0, 4.0, 1500, 31u, {}, ShellSamplerKind::rejection);
    CHECK(rej.sampler_tag() == "rejection");
    CHECK(rej.count() == 1500);
    CHECK(rej.acceptance_rate() > 1e-5);  // measured 6.3e-4
    CHECK(rej.acceptance_rate() < 1e-2);
    for (double t : rej.total_values()) {
      CHECK(t > 18.0);
      CHECK(t <= 22.0);
    }
    // The rejection law agrees with the direct sampler.
    const auto dir = sample_energy_shell(H, 20.0, 4.0, 20000, 32u);
    double worst = 0.0;
    for (double x = 0.0; x <= 22.0; x += 0.2) {
      worst = std::max(worst, std::abs(empirical_subsystem_cdf(rej, x) -
                                       empirical_subsystem_cdf(dir, x)));
    }
    CHECK(worst < 1.63 * std::sqrt(1.0 / 1500.0 + 1.0 / 20000.0));  // 0.0235 meas.
  }

  SUBCASE("a hopeless thin shell in high dimension stalls") {
    const auto H = SeparableHamiltonian::quartic(1, 40);
    try {
      sample_energy_shell(H, 20.0, 0.1, 10, 41u, {}, ShellSamplerKind::rejection);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::rejection_stall);
    }
  }
}

TEST_CASE("direct sampling of the quartic family") {
  // Same shell that stalls under rejection: the exact sampler covers it.
  const auto H = SeparableHamiltonian::quartic(1, 40);
  const auto set = sample_energy_shell(H, 20.0, 0.1, 5000, 42u);
  CHECK(set.sampler_tag() == "direct-shell");
  CHECK(set.acceptance_rate() == 1.0);
  for (std::size_t i = 0; i < set.total_values().size(); ++i) {
    const double t = set.total_values()[i];
    CHECK(t > 19.95);
    CHECK(t <= 20.05);
    CHECK(set.u1_values()[i] <= t);
  }
  const double ks = ks_to_canonical(set, H.tilt_prediction(20.0));
  CHECK(ks < 0.03);  // measured 0.0177
}

TEST_CASE("accepted points are uniform within thin energy bands") {
  const auto H = SeparableHamiltonian::harmonic(2, 20);
  std::vector<ShellObservable> obs;
  obs.push_back(angle_observable());
  const auto set = sample_energy_shell(H, 100.0, 0.1, 100000, 51u, obs);
  for (auto band : {std::pair<double, double>{0.0, 10.0}, {10.0, 30.0}, {30.0, 70.0}}) {
    const double p =
        uniformity_pvalue(set, "angle", -kPi, kPi, band.first, band.second, 12);
    CHECK(p > 0.01);  // measured 0.62, 0.86, 0.75
  }
}

TEST_CASE("density of states") {
  SUBCASE("harmonic family follows the exact power law") {
    const std::vector<CoordinatePower> coords(10, CoordinatePower::harmonic);
    const auto dos = density_of_states(coords, Interval{1.0, 10.0}, 101);
    // f(z) proportional to z^4 means beta(z) = 4/z.
    CHECK(dos.beta_at(2.0) == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(dos.beta_at(5.0) == doctest::Approx(0.8).epsilon(1e-4));
    for (std::size_t i = 0; i < dos.density.grid_points(); i += 10) {
      const double z = dos.density.grid_x(i);
      const double logf = dos.density.grid_log_values()[i];
      CHECK(logf == doctest::Approx(4.0 * std::log(z)).epsilon(1e-12));
    }
  }

  SUBCASE("single oscillator: flat density, zero slope") {
    const std::vector<CoordinatePower> coords(2, CoordinatePower::harmonic);
    const auto dos = density_of_states(coords, Interval{1.0, 10.0}, 101);
    CHECK(dos.beta_at(3.0) == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("monte carlo estimate of the quartic 1-d law") {
    const std::vector<CoordinatePower> coords(1, CoordinatePower::quartic);
    const auto dos = density_of_states_mc(coords, Interval{0.5, 4.0}, 8, 200000, 61u);
    // f(z) proportional to z^(-3/4): the compensated log-ratio is flat.
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < dos.density.grid_points(); ++i) {
      const double r =
          dos.density.grid_log_values()[i] + 0.75 * std::log(dos.density.grid_x(i));
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    CHECK(hi - lo < 0.05);  // measured 0.016
  }

  SUBCASE("monte carlo agrees with the harmonic power law within 2%") {
    const std::vector<CoordinatePower> coords(4, CoordinatePower::harmonic);
    const auto dos = density_of_states_mc(coords, Interval{1.0, 4.0}, 8, 400000, 62u);
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < dos.density.grid_points(); ++i) {
      const double r =
          dos.density.grid_log_values()[i] - std::log(dos.density.grid_x(i));
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    CHECK(hi - lo < 0.02);  // measured 0.015
  }

  SUBCASE("insufficient budget is reported") {
    const std::vector<CoordinatePower> coords(4, CoordinatePower::harmonic);
    try {
      density_of_states_mc(coords, Interval{1.0, 4.0}, 8, 500, 63u);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::mc_budget_exceeded);
    }
  }

  SUBCASE("grids must start above zero") {
    const std::vector<CoordinatePower> coords(2, CoordinatePower::harmonic);
    CHECK_THROWS_AS(density_of_states(coords, Interval{0.0, 4.0}, 101), Error);
  }
}

TEST_CASE("canonical prediction helpers") {
  const auto H = SeparableHamiltonian::harmonic(2, 200);  // alpha1 = 1

  SUBCASE("zero tilt reduces to the volume law") {
    CHECK(canonical_subsystem_cdf(H, 10.0, 0.0, 5.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(canonical_subsystem_mean(H, 10.0, 0.0) == doctest::Approx(5.0).epsilon(1e-12));
  }

  SUBCASE("positive tilt gives the truncated exponential") {
    const double psi = 0.99;
    const double expected = (1.0 - std::exp(-psi * 1.0)) / (1.0 - std::exp(-psi * 100.0));
    CHECK(canonical_subsystem_cdf(H, 100.0, psi, 1.0) ==
          doctest::Approx(expected).epsilon(1e-10));
  }

  SUBCASE("negative tilt falls back to quadrature") {
    const double psi = -0.3;
    const double expected = (std::exp(0.3 * 1.0) - 1.0) / (std::exp(0.3 * 2.0) - 1.0);
    CHECK(canonical_subsystem_cdf(H, 2.0, psi, 1.0) ==
          doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("shell sample exports") {
  const auto H = SeparableHamiltonian::harmonic(2, 20);
  std::vector<ShellObservable> obs;
  obs.push_back({"q1sq", [](const std::vector<double>& q) { return q[0] * q[0]; }});
  const auto set = sample_energy_shell(H, 10.0, 0.2, 25, 5u, obs);

  SUBCASE("csv stream") {
    const std::string csv = set.to_csv();
    std::istringstream in(csv);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    REQUIRE(lines.size() == 26);
    CHECK(lines[0] == "u1,q1sq");
  }

  SUBCASE("summary json") {
    const auto parsed = nlohmann::json::parse(set.summary_json(0.012, 0.91, 0.9));
    CHECK(parsed["h"].get<double>() == 10.0);
    CHECK(parsed["delta"].get<double>() == 0.2);
    CHECK(parsed["n1"].get<int>() == 2);
    CHECK(parsed["n2"].get<int>() == 20);
    CHECK(parsed["ks"].get<double>() == doctest::Approx(0.012));
    CHECK(parsed["psi_measured"].get<double>() == doctest::Approx(0.91));
    CHECK(parsed["psi_predicted"].get<double>() == doctest::Approx(0.9));
  }

  SUBCASE("reserved and duplicate observable names are rejected") {
    std::vector<ShellObservable> bad;
    bad.push_back({"u1", [](const std::vector<double>&) { return 0.0; }});
    CHECK_THROWS_AS(sample_energy_shell(H, 10.0, 0.2, 5, 5u, bad), Error);
    std::vector<ShellObservable> twice;
    twice.push_back({"a", [](const std::vector<double>&) { return 0.0; }});
    twice.push_back({"a", [](const std::vector<double>&) { return 1.0; }});
    CHECK_THROWS_AS(sample_energy_shell(H, 10.0, 0.2, 5, 5u, twice), Error);
  }
}
