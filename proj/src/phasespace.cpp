#include "gibbslab/phasespace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gibbslab/error.hpp"
#include "gibbslab/jsonio.hpp"
#include "gibbslab/numerics.hpp"
#include "gibbslab/rng.hpp"

namespace gibbslab {

namespace {

double power_of(CoordinatePower p) {
  return p == CoordinatePower::harmonic ? 2.0 : 4.0;
}

double coordinate_energy(CoordinatePower p, double x) {
  const double x2 = x * x;
  return p == CoordinatePower::harmonic ? 0.5 * x2 : 0.25 * x2 * x2;
}

double energy_sum(const std::vector<CoordinatePower>& powers,
                  const std::vector<double>& x) {
  require(x.size() == powers.size(), ErrorCode::invalid_argument,
          "coordinate vector size does not match the dimension");
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += coordinate_energy(powers[i], x[i]);
  return total;
}

double alpha_sum(const std::vector<CoordinatePower>& powers) {
  double alpha = 0.0;
  for (CoordinatePower p : powers) alpha += 1.0 / power_of(p);
  return alpha;
}

// Truncated canonical CDF with volume exponent alpha: the normalized integral
// of u^(alpha-1) e^(-psi u) over [0, a] relative to [0, u_max].
double canonical_cdf_raw(double alpha, double u_max, double psi, double a) {
  if (a <= 0.0) return 0.0;
  if (a >= u_max) return 1.0;
  if (std::abs(psi) * u_max < 1e-12) return std::pow(a / u_max, alpha);
  if (psi > 0.0) return gamma_p(alpha, psi * a) / gamma_p(alpha, psi * u_max);
  // Negative exponent: integrate after the smoothing substitution w = u^alpha.
  const auto part = [alpha, psi](double upper) {
    return adaptive_simpson(
        [alpha, psi](double w) {
          return std::exp(-psi * std::pow(w, 1.0 / alpha));
        },
        0.0, std::pow(upper, alpha));
  };
  return part(a) / part(u_max);
}

}  // namespace

SeparableHamiltonian::SeparableHamiltonian(std::vector<CoordinatePower> subsystem,
                                           std::vector<CoordinatePower> bath)
    : subsystem_(std::move(subsystem)), bath_(std::move(bath)) {
  require(!subsystem_.empty(), ErrorCode::invalid_shell,
          "the subsystem needs at least one coordinate");
  require(bath_.size() >= 10 * subsystem_.size(), ErrorCode::invalid_shell,
          "the bath must dominate: n1 <= n2 / 10");
}

SeparableHamiltonian SeparableHamiltonian::harmonic(int n1, int n2) {
  require(n1 >= 0 && n2 >= 0, ErrorCode::invalid_shell, "dimensions must be >= 0");
  return SeparableHamiltonian(
      std::vector<CoordinatePower>(static_cast<std::size_t>(n1),
                                   CoordinatePower::harmonic),
      std::vector<CoordinatePower>(static_cast<std::size_t>(n2),
                                   CoordinatePower::harmonic));
}

SeparableHamiltonian SeparableHamiltonian::quartic(int n1, int n2) {
  require(n1 >= 0 && n2 >= 0, ErrorCode::invalid_shell, "dimensions must be >= 0");
  return SeparableHamiltonian(
      std::vector<CoordinatePower>(static_cast<std::size_t>(n1),
                                   CoordinatePower::quartic),
      std::vector<CoordinatePower>(static_cast<std::size_t>(n2),
                                   CoordinatePower::quartic));
}

SeparableHamiltonian SeparableHamiltonian::mixed(
    std::vector<CoordinatePower> subsystem, std::vector<CoordinatePower> bath) {
  return SeparableHamiltonian(std::move(subsystem), std::move(bath));
}

bool SeparableHamiltonian::all_harmonic() const {
  const auto is_h = [](CoordinatePower p) { return p == CoordinatePower::harmonic; };
  return std::all_of(subsystem_.begin(), subsystem_.end(), is_h) &&
         std::all_of(bath_.begin(), bath_.end(), is_h);
}

double SeparableHamiltonian::subsystem_energy(const std::vector<double>& q) const {
  return energy_sum(subsystem_, q);
}

double SeparableHamiltonian::bath_energy(const std::vector<double>& bath_coords) const {
  return energy_sum(bath_, bath_coords);
}

double SeparableHamiltonian::total_energy(
    const std::vector<double>& q, const std::vector<double>& bath_coords) const {
  return subsystem_energy(q) + bath_energy(bath_coords);
}

double SeparableHamiltonian::subsystem_alpha() const { return alpha_sum(subsystem_); }

double SeparableHamiltonian::bath_alpha() const { return alpha_sum(bath_); }

double SeparableHamiltonian::tilt_prediction(double h) const {
  require(h > 0.0 && std::isfinite(h), ErrorCode::invalid_argument,
          "shell level must be positive");
  return (bath_alpha() - 1.0) / h;
}

const std::vector<double>& ShellSampleSet::observable_values(
    const std::string& name) const {
  if (name == "u1") return u1_;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return values_[i];
  }
  raise(ErrorCode::invalid_argument, "no observable named '" + name + "' was recorded");
}

std::string ShellSampleSet::to_csv() const {
  std::vector<std::string> columns;
  columns.push_back("u1");
  for (const std::string& n : names_) columns.push_back(n);
  CsvWriter csv(columns);
  for (std::size_t i = 0; i < u1_.size(); ++i) {
    std::vector<double> row;
    row.push_back(u1_[i]);
    for (const auto& column : values_) row.push_back(column[i]);
    csv.add_row(row);
  }
  return csv.dump();
}

std::string ShellSampleSet::summary_json(double ks, double psi_measured,
                                         double psi_predicted) const {
  JsonValue root = JsonValue::object();
  root.set("h", h_);
  root.set("delta", delta_);
  root.set("n1", n1_);
  root.set("n2", n2_);
  root.set("ks", ks);
  root.set("psi_measured", psi_measured);
  root.set("psi_predicted", psi_predicted);
  return root.dump();
}

ShellSampleSet sample_energy_shell(const SeparableHamiltonian& H, double h,
                                   double delta, std::int64_t count,
                                   std::uint64_t seed,
                                   std::vector<ShellObservable> observables,
                                   ShellSamplerKind sampler) {
  require(h > 0.0 && std::isfinite(h), ErrorCode::invalid_argument,
          "shell level must be positive");
  require(delta > 0.0 && std::isfinite(delta), ErrorCode::invalid_argument,
          "shell width must be positive");
  require(count >= 0, ErrorCode::invalid_argument, "sample count must be >= 0");
  for (std::size_t i = 0; i < observables.size(); ++i) {
    require(observables[i].name != "u1", ErrorCode::invalid_argument,
            "'u1' is reserved for the subsystem energy");
    require(static_cast<bool>(observables[i].fn), ErrorCode::invalid_argument,
            "observable functions must be callable");
    for (std::size_t j = 0; j < i; ++j) {
      require(observables[j].name != observables[i].name, ErrorCode::invalid_argument,
              "duplicate observable name");
    }
  }

  const double t2 = h + 0.5 * delta;
  const double t1 = std::max(0.0, h - 0.5 * delta);
  const std::size_t d = static_cast<std::size_t>(H.n1() + H.n2());
  const std::size_t n1 = static_cast<std::size_t>(H.n1());
  std::vector<CoordinatePower> powers = H.subsystem_powers();
  powers.insert(powers.end(), H.bath_powers().begin(), H.bath_powers().end());
  const double alpha0 = H.subsystem_alpha() + H.bath_alpha();

  ShellSampleSet set;
  set.h_ = h;
  set.delta_ = delta;
  set.n1_ = H.n1();
  set.n2_ = H.n2();
  set.alpha1_ = H.subsystem_alpha();
  for (const auto& obs : observables) set.names_.push_back(obs.name);
  set.values_.resize(observables.size());
  set.u1_.reserve(static_cast<std::size_t>(count));
  set.total_.reserve(static_cast<std::size_t>(count));

  Philox rng(seed);
  std::vector<double> q(n1);

  const bool use_rejection = sampler == ShellSamplerKind::rejection;
  if (!use_rejection) {
    set.tag_ = H.all_harmonic() ? "direct-sphere" : "direct-shell";
    set.acceptance_ = 1.0;
    const bool spherical = H.all_harmonic();
    std::vector<double> draws(d);
    const double t1a = std::pow(t1, alpha0);
    const double t2a = std::pow(t2, alpha0);
    for (std::int64_t s = 0; s < count; ++s) {
      // Radial law: the in-shell volume below t grows as t^alpha0.
      const double u = rng.uniform_pos();
      double total = std::pow(t1a * (1.0 - u) + u * t2a, 1.0 / alpha0);
      total = std::min(total, t2);
      double sub_share = 0.0;
      if (spherical) {
        // Isotropic vector scaled onto the energy sphere of radius sqrt(2 total).
        double norm2 = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          draws[i] = rng.normal();
          norm2 += draws[i] * draws[i];
        }
        const double scale = std::sqrt(2.0 * total / norm2);
        double sub2 = 0.0;
        for (std::size_t i = 0; i < n1; ++i) {
          q[i] = draws[i] * scale;
          sub2 += draws[i] * draws[i];
        }
        sub_share = sub2 / norm2;
      } else {
        // Energy shares follow the volume-element weights u^(1/p - 1); the
        // gamma decomposition gives them exactly.
        double g_total = 0.0, g_sub = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          draws[i] = rng.gamma_variate(1.0 / power_of(powers[i]));
          g_total += draws[i];
          if (i < n1) g_sub += draws[i];
        }
        for (std::size_t i = 0; i < n1; ++i) {
          const double p = power_of(powers[i]);
          const double share = total * draws[i] / g_total;
          const double magnitude = std::pow(p * share, 1.0 / p);
          q[i] = rng.uniform() < 0.5 ? -magnitude : magnitude;
        }
        sub_share = g_sub / g_total;
      }
      set.u1_.push_back(total * sub_share);
      set.total_.push_back(total);
      for (std::size_t k = 0; k < observables.size(); ++k) {
        set.values_[k].push_back(observables[k].fn(q));
      }
    }
    return set;
  }

  set.tag_ = "rejection";
  std::vector<double> half_width(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double p = power_of(powers[i]);
    half_width[i] = std::pow(p * t2, 1.0 / p);
  }
  std::vector<double> x(d);
  std::int64_t proposals = 0;
  std::int64_t accepted = 0;
  while (accepted < count) {
    ++proposals;
    double u1 = 0.0, u2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = rng.uniform(-half_width[i], half_width[i]);
      const double e = coordinate_energy(powers[i], x[i]);
      if (i < n1) {
        u1 += e;
      } else {
        u2 += e;
      }
    }
    const double total = u1 + u2;
    if (total > t1 && total <= t2) {
      ++accepted;
      set.u1_.push_back(u1);
      set.total_.push_back(total);
      std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n1), q.begin());
      for (std::size_t k = 0; k < observables.size(); ++k) {
        set.values_[k].push_back(observables[k].fn(q));
      }
    } else if (proposals >= 1000000 &&
               static_cast<double>(accepted) < 1e-6 * static_cast<double>(proposals)) {
      raise(ErrorCode::rejection_stall,
            "box-rejection acceptance rate fell below 1e-6; widen the shell "
            "(larger delta) or use the direct sampler");
    }
  }
  set.acceptance_ = proposals > 0
                        ? static_cast<double>(accepted) / static_cast<double>(proposals)
                        : 1.0;
  return set;
}

double empirical_subsystem_cdf(const ShellSampleSet& samples, double a) {
  require(samples.count() > 0, ErrorCode::empty_sample_set,
          "the sample set is empty");
  const auto& u1 = samples.u1_values();
  std::int64_t hits = 0;
  for (double v : u1) {
    if (v <= a) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(u1.size());
}

MeanWithError conditional_expectation(const ShellSampleSet& samples,
                                      const std::string& name) {
  require(samples.count() > 0, ErrorCode::empty_sample_set,
          "the sample set is empty");
  const std::vector<double>& values = samples.observable_values(name);
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  MeanWithError out;
  out.mean = mean;
  out.se = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
  return out;
}

double canonical_subsystem_cdf(const SeparableHamiltonian& H, double u_max,
                               double psi, double a) {
  require(u_max > 0.0 && std::isfinite(u_max), ErrorCode::invalid_argument,
          "truncation level must be positive");
  return canonical_cdf_raw(H.subsystem_alpha(), u_max, psi, a);
}

double canonical_subsystem_mean(const SeparableHamiltonian& H, double u_max,
                                double psi) {
  require(u_max > 0.0 && std::isfinite(u_max), ErrorCode::invalid_argument,
          "truncation level must be positive");
  const double alpha = H.subsystem_alpha();
  if (std::abs(psi) * u_max < 1e-12) return u_max * alpha / (alpha + 1.0);
  if (psi > 0.0) {
    return (alpha / psi) * gamma_p(alpha + 1.0, psi * u_max) /
           gamma_p(alpha, psi * u_max);
  }
  const double w_max = std::pow(u_max, alpha);
  const double num = adaptive_simpson(
      [alpha, psi](double w) {
        const double u = std::pow(w, 1.0 / alpha);
        return u * std::exp(-psi * u);
      },
      0.0, w_max);
  const double den = adaptive_simpson(
      [alpha, psi](double w) { return std::exp(-psi * std::pow(w, 1.0 / alpha)); },
      0.0, w_max);
  return num / den;
}

double ks_to_canonical(const ShellSampleSet& samples, double psi) {
  require(samples.count() > 0, ErrorCode::empty_sample_set,
          "the sample set is empty");
  const double u_max = samples.h() + 0.5 * samples.delta();
  const double alpha = samples.subsystem_alpha();
  return ks_statistic(samples.u1_values(), [alpha, u_max, psi](double a) {
    return canonical_cdf_raw(alpha, u_max, psi, a);
  });
}

double uniformity_pvalue(const ShellSampleSet& samples, const std::string& name,
                         double value_lo, double value_hi, double band_lo,
                         double band_hi, int bins) {
  require(bins >= 2, ErrorCode::invalid_argument, "need at least two bins");
  require(value_hi > value_lo, ErrorCode::invalid_argument,
          "value range must be increasing");
  const std::vector<double>& values = samples.observable_values(name);
  const std::vector<double>& u1 = samples.u1_values();
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  double in_band = 0.0;
  const double width = (value_hi - value_lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (u1[i] <= band_lo || u1[i] > band_hi) continue;
    require(values[i] >= value_lo && values[i] <= value_hi, ErrorCode::invalid_argument,
            "observable value outside the stated range");
    const auto idx = std::min<std::size_t>(
        static_cast<std::size_t>((values[i] - value_lo) / width),
        static_cast<std::size_t>(bins - 1));
    counts[idx] += 1.0;
    in_band += 1.0;
  }
  require(in_band >= 5.0 * static_cast<double>(bins), ErrorCode::empty_sample_set,
          "too few samples in the requested band for a chi-square test");
  const double expected = in_band / static_cast<double>(bins);
  double stat = 0.0;
  for (double c : counts) stat += (c - expected) * (c - expected) / expected;
  return chi_square_sf(stat, static_cast<double>(bins - 1));
}

DensityOfStates density_of_states(const std::vector<CoordinatePower>& coords,
                                  Interval range, std::size_t points) {
  require(!coords.empty(), ErrorCode::invalid_argument, "need at least one coordinate");
  require(range.lo > 0.0 && range.hi > range.lo, ErrorCode::invalid_argument,
          "energy grid must satisfy 0 < lo < hi");
  const double alpha = alpha_sum(coords);
  DensityOfStates out;
  out.density = Density1D::from_log_function(
      range, points, [alpha](double z) { return (alpha - 1.0) * std::log(z); });
  return out;
}

DensityOfStates density_of_states_mc(const std::vector<CoordinatePower>& coords,
                                     Interval range, std::size_t bins,
                                     std::int64_t samples, std::uint64_t seed) {
  require(!coords.empty(), ErrorCode::invalid_argument, "need at least one coordinate");
  require(range.lo > 0.0 && range.hi > range.lo, ErrorCode::invalid_argument,
          "energy grid must satisfy 0 < lo < hi");
  require(bins >= 8, ErrorCode::invalid_argument, "need at least 8 bins");
  require(samples >= 1, ErrorCode::invalid_argument, "need at least one draw");

  const std::size_t d = coords.size();
  std::vector<double> half_width(d);
  double log_box = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double p = power_of(coords[i]);
    half_width[i] = std::pow(p * range.hi, 1.0 / p);
    log_box += std::log(2.0 * half_width[i]);
  }

  const double width = range.width() / static_cast<double>(bins);
  std::vector<double> counts(bins, 0.0);
  Philox rng(seed);
  for (std::int64_t s = 0; s < samples; ++s) {
    double z = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      z += coordinate_energy(coords[i], rng.uniform(-half_width[i], half_width[i]));
    }
    if (z <= range.lo || z > range.hi) continue;
    const auto idx =
        std::min(bins - 1, static_cast<std::size_t>((z - range.lo) / width));
    counts[idx] += 1.0;
  }
  for (double c : counts) {
    require(c >= 25.0, ErrorCode::mc_budget_exceeded,
            "a grid cell collected fewer than 25 hits; increase the sample "
            "budget or coarsen the grid");
  }

  std::vector<double> log_f(bins);
  const double log_scale =
      log_box - std::log(static_cast<double>(samples)) - std::log(width);
  for (std::size_t b = 0; b < bins; ++b) log_f[b] = std::log(counts[b]) + log_scale;
  DensityOfStates out;
  out.density = Density1D::from_grid(
      Interval{range.lo + 0.5 * width, range.hi - 0.5 * width}, std::move(log_f));
  return out;
}

}  // namespace gibbslab
