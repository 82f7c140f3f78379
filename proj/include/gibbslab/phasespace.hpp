#ifndef GIBBSLAB_PHASESPACE_HPP
#define GIBBSLAB_PHASESPACE_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gibbslab/density.hpp"

namespace gibbslab {

// Per-coordinate energy term: |x|^p / p with p = 2 (harmonic) or 4 (quartic).
enum class CoordinatePower { harmonic, quartic };

// Additively separable energy U_t(q, Q) = U_1(q) + U_2(Q) with a small
// subsystem (n1 coordinates) and a large bath (n2 coordinates). The
// small-subsystem regime n1 <= n2 / 10 is enforced at construction.
class SeparableHamiltonian {
public:
  static SeparableHamiltonian harmonic(int n1, int n2);
  static SeparableHamiltonian quartic(int n1, int n2);
  static SeparableHamiltonian mixed(std::vector<CoordinatePower> subsystem,
                                    std::vector<CoordinatePower> bath);

  int n1() const { return static_cast<int>(subsystem_.size()); }
  int n2() const { return static_cast<int>(bath_.size()); }
  const std::vector<CoordinatePower>& subsystem_powers() const { return subsystem_; }
  const std::vector<CoordinatePower>& bath_powers() const { return bath_; }
  bool all_harmonic() const;

  double subsystem_energy(const std::vector<double>& q) const;
  double bath_energy(const std::vector<double>& bath_coords) const;
  // U_1 + U_2, additive by construction.
  double total_energy(const std::vector<double>& q,
                      const std::vector<double>& bath_coords) const;

  // Volume exponents: the phase-space volume of {U <= z} grows as z^alpha
  // with alpha the sum of 1/p over the coordinates.
  double subsystem_alpha() const;
  double bath_alpha() const;

  // Bath-determined exponent of the limiting subsystem law at shell level h:
  // d ln f_{U_2}/dz evaluated at h for the exact power-law volume.
  double tilt_prediction(double h) const;

private:
  SeparableHamiltonian(std::vector<CoordinatePower> subsystem,
                       std::vector<CoordinatePower> bath);

  std::vector<CoordinatePower> subsystem_;
  std::vector<CoordinatePower> bath_;
};

enum class ShellSamplerKind {
  automatic_choice,  // exact in-shell sampler for the family
  direct,            // force the exact sampler
  rejection,         // uniform proposals from a bounding box
};

// Named scalar function of the subsystem coordinates, recorded per sample.
struct ShellObservable {
  std::string name;
  std::function<double(const std::vector<double>&)> fn;
};

struct MeanWithError {
  double mean = 0.0;
  double se = 0.0;
};

// Samples of the subsystem energy (and requested observables) drawn uniformly
// with respect to Lebesgue measure restricted to the energy shell
// (h - delta/2, h + delta/2].
class ShellSampleSet {
public:
  double h() const { return h_; }
  double delta() const { return delta_; }
  int n1() const { return n1_; }
  int n2() const { return n2_; }
  std::int64_t count() const { return static_cast<std::int64_t>(u1_.size()); }
  const std::string& sampler_tag() const { return tag_; }
  double acceptance_rate() const { return acceptance_; }
  // Volume exponent of the subsystem (sum of 1/p over its coordinates).
  double subsystem_alpha() const { return alpha1_; }

  const std::vector<double>& u1_values() const { return u1_; }
  const std::vector<double>& total_values() const { return total_; }

  const std::vector<std::string>& observable_names() const { return names_; }
  // Values of one observable; "u1" is always available.
  const std::vector<double>& observable_values(const std::string& name) const;

  // Columns: u1, then one column per observable.
  std::string to_csv() const;
  // {h, delta, n1, n2, ks, psi_measured, psi_predicted}
  std::string summary_json(double ks, double psi_measured,
                           double psi_predicted) const;

private:
  friend ShellSampleSet sample_energy_shell(const SeparableHamiltonian&, double,
                                            double, std::int64_t, std::uint64_t,
                                            std::vector<ShellObservable>,
                                            ShellSamplerKind);
  ShellSampleSet() = default;

  double h_ = 0.0;
  double delta_ = 0.0;
  int n1_ = 0;
  int n2_ = 0;
  double alpha1_ = 0.0;
  std::string tag_;
  double acceptance_ = 1.0;
  std::vector<double> u1_;
  std::vector<double> total_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> values_;
};

// Draws `count` points on the shell. The exact sampler decomposes the total
// energy over coordinates (isotropic vectors for all-harmonic systems, their
// power-family generalization otherwise) and is available for every built-in
// family; the rejection sampler proposes uniformly from the bounding box of
// {U_t <= h + delta/2} and raises RejectionStall when the acceptance rate
// drops below 1e-6 after at least 1e6 proposals.
ShellSampleSet sample_energy_shell(const SeparableHamiltonian& H, double h,
                                   double delta, std::int64_t count,
                                   std::uint64_t seed,
                                   std::vector<ShellObservable> observables = {},
                                   ShellSamplerKind sampler =
                                       ShellSamplerKind::automatic_choice);

// Fraction of samples with U_1 <= a.
double empirical_subsystem_cdf(const ShellSampleSet& samples, double a);

// Sample mean and standard error of a recorded observable ("u1" included).
MeanWithError conditional_expectation(const ShellSampleSet& samples,
                                      const std::string& name);

// Canonical predictions for the subsystem energy law with exponent psi,
// truncated to [0, u_max]: density proportional to u^{alpha1 - 1} e^{-psi u}.
double canonical_subsystem_cdf(const SeparableHamiltonian& H, double u_max,
                               double psi, double a);
double canonical_subsystem_mean(const SeparableHamiltonian& H, double u_max,
                                double psi);

// Kolmogorov-Smirnov distance between the sampled U_1 values and the
// canonical form truncated at h + delta/2.
double ks_to_canonical(const ShellSampleSet& samples, double psi);

// Pearson chi-square p-value for uniformity of an observable's values over
// [value_lo, value_hi], restricted to samples with U_1 in (band_lo, band_hi],
// using equal-width bins.
double uniformity_pvalue(const ShellSampleSet& samples, const std::string& name,
                         double value_lo, double value_hi, double band_lo,
                         double band_hi, int bins);

// Phase-space volume density f(z) dz = vol{z < U(x) <= z + dz} tabulated on a
// grid; beta(z) = d ln f / dz comes from the grid's log-derivative.
struct DensityOfStates {
  Density1D density = Density1D::uniform(0.0, 1.0);
  double beta_at(double z) const { return density.log_derivative(z); }
};

// Exact form: power-separable coordinates give f(z) proportional to
// z^(alpha - 1) with alpha the sum of 1/p.
DensityOfStates density_of_states(const std::vector<CoordinatePower>& coords,
                                  Interval range, std::size_t points);

// Monte Carlo estimate from uniform draws in the bounding box of
// {U <= range.hi}; raises MonteCarloBudgetExceeded when any bin collects
// fewer than 25 hits.
DensityOfStates density_of_states_mc(const std::vector<CoordinatePower>& coords,
                                     Interval range, std::size_t bins,
                                     std::int64_t samples, std::uint64_t seed);

}  // namespace gibbslab

#endif
