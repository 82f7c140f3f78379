#ifndef GIBBSLAB_THERMO_HPP
#define GIBBSLAB_THERMO_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gibbslab/density.hpp"

namespace gibbslab {

// Extensive entropy S(x) = V * s(x/V) (+ an optional additive constant),
// built from an intensive entropy density s(e) on e in (0, e_max]. s must be
// concave; the built-in forms are strictly concave and custom forms are
// admitted only after a sampled second-difference check (<= 1e-8).
class ExtensiveEntropy {
public:
  // s(e) = c * ln e with c > 0 (equipartition-style entropy).
  static ExtensiveEntropy ideal_gas(double c, double volume, double e_max = 1e6);
  // s(e) = e - e * ln e (Poisson-style entropy; maximal at e = 1).
  static ExtensiveEntropy poissonian(double volume, double e_max = 1e6);
  // Arbitrary concave entropy density with its derivative. s(0) must
  // evaluate to a finite value or -infinity (never NaN).
  static ExtensiveEntropy custom(std::function<double(double)> s,
                                 std::function<double(double)> s_prime,
                                 double volume, double e_max);

  // The same entropy with `constant` added to S (not to the density s).
  ExtensiveEntropy shifted(double constant) const;

  double volume() const { return volume_; }
  double e_max() const { return e_max_; }
  double shift() const { return shift_; }

  double s(double e) const { return s_(e); }
  double s_prime(double e) const { return s_prime_(e); }
  // S(x) = V * s(x/V) + shift.
  double S(double x) const;
  // dS/dE evaluated at x, i.e. s'(x/V).
  double dS_dE(double x) const;

private:
  ExtensiveEntropy(std::function<double(double)> s,
                   std::function<double(double)> s_prime, double volume,
                   double e_max, double shift);

  std::function<double(double)> s_;
  std::function<double(double)> s_prime_;
  double volume_ = 1.0;
  double e_max_ = 1.0;
  double shift_ = 0.0;
};

// Free energy from the full partition integral: -beta^{-1} ln Z with
// Z = int_0^h exp(S(x) - beta x) dx. The integrand's maximum is factored out
// before quadrature (found by golden-section search to 1e-12 * V), so the
// computation never under- or overflows. Omitting h integrates to ten times
// the stationary energy, which makes the truncation error negligible next to
// the maximum-term gap.
double free_energy_exact(const ExtensiveEntropy& S, double beta,
                         std::optional<double> h = std::nullopt);

// Free energy from the maximum term alone: E* - beta^{-1} S(E*) at the
// stationary point dS/dE = beta, located by bisection in ln E over
// [1e-12 * V, e_max * V] to relative tolerance 1e-12. Raises
// NoStationaryPoint when beta lies outside the range of s'.
double free_energy_legendre(const ExtensiveEntropy& S, double beta);

// Both free energies side by side with their gap; the gap per volume shrinks
// like (ln V) / V along increasing volumes.
struct FreeEnergyReport {
  double beta = 0.0;
  double volume = 0.0;
  double exact = 0.0;
  double legendre = 0.0;
  double gap = 0.0;             // |exact - legendre|
  double gap_per_volume = 0.0;  // gap / volume
  std::string to_json() const;
};

FreeEnergyReport free_energy_report(const ExtensiveEntropy& S, double beta,
                                    std::optional<double> h = std::nullopt);

// One report per volume, using family(V) as the entropy at volume V.
std::vector<FreeEnergyReport> free_energy_sweep(
    const std::function<ExtensiveEntropy(double)>& family,
    const std::vector<double>& volumes, double beta);

// CSV with columns V, F_exact, F_legendre, gap, gap_per_V.
std::string free_energy_sweep_csv(
    const std::function<ExtensiveEntropy(double)>& family,
    const std::vector<double>& volumes, double beta);

// Variance inequality for a fluctuating inverse temperature beta(y) =
// d ln f/dy of a normalized density f on [0, y_max]:
//   var[Y] * var[beta(Y)] >= (1 - f(0) E[Y])^2     and
//   E[Y^2] * E[beta(Y)^2] >= 1.
// All integrals run over the support shrunk by a relative edge margin of
// 1e-12, which regularizes boundary-divergent beta moments (e.g. a Gamma
// shape-2 density); the bounds themselves are asserted internally.
struct FluctuationReport {
  double mean = 0.0;               // E[Y]
  double variance = 0.0;           // var[Y]
  double beta_mean = 0.0;          // E[beta(Y)]
  double beta_variance = 0.0;      // var[beta(Y)]
  double density_at_origin = 0.0;  // f at the lower support edge
  double lhs = 0.0;                // var[Y] * var[beta(Y)]
  double rhs = 0.0;                // (1 - f(0) E[Y])^2
  double second_moment_product = 0.0;  // E[Y^2] * E[beta(Y)^2]
  std::string to_json() const;
};

// Raises UndefinedAtZero when f diverges at its lower support edge (e.g.
// Gamma with shape < 1): the boundary term in the bound requires a finite
// value, so such densities are rejected rather than regularized.
FluctuationReport fluctuation_bounds(const Density1D& f);

// Lower bound for relative entropy against an unnormalized density g~:
//   int f ln(f / g~) >= -ln int g~,
// with equality exactly when f is g~ normalized; the slack equals the
// KL divergence between f and g~ normalized (checked internally to 1e-8).
struct KlBoundReport {
  double lhs = 0.0;            // int f ln(f / g~)
  double rhs = 0.0;            // -ln int g~
  double slack = 0.0;          // lhs - rhs, always >= 0
  double kl_normalized = 0.0;  // KL(f || g~ / int g~)
  std::string to_json() const;
};

KlBoundReport kl_lower_bound_check(const Density1D& f, const Density1D& g_tilde);

}  // namespace gibbslab

#endif
