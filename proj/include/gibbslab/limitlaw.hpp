#ifndef GIBBSLAB_LIMITLAW_HPP
#define GIBBSLAB_LIMITLAW_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gibbslab/conditional.hpp"
#include "gibbslab/density.hpp"
#include "gibbslab/joint.hpp"

namespace gibbslab {

// Tilting exponent of the small system's asymptotic conditional law:
// [d/dy - d/dx] ln f_{Y|X}(y; x) at (y = h, x = 0). For an independent bath
// this is the bath's log-density slope at h, independent of the system size.
double tilt_exponent(const JointLaw& joint, double h);

// Z = integral over [0, h] of f_X(x) e^{-tilt * x}.
double partition_function(const Density1D& f_x, double tilt, double h);

// The canonical form Z^{-1} f_X(x) e^{-tilt x} on [0, h], materialized and
// normalized on a grid.
ConditionalLaw asymptotic_conditional(const Density1D& f_x, const JointLaw& joint,
                                      double h,
                                      std::size_t points = kDefaultConditionalGridPoints);

// A family of shrinking subsystems against a fixed bath: by default the n-th
// member rescales X to X/n; a custom per-n constructor can replace that rule.
struct SmallSystemSequence {
  JointLaw base;
  std::vector<std::int64_t> n_values;
  std::function<JointLaw(std::int64_t)> member_override;

  JointLaw member(std::int64_t n) const;
};

struct ConvergenceRow {
  std::int64_t n = 0;
  double kl = 0.0;
  bool floored = false;  // true if KL hit the machine floor and was replaced
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;  // sorted by n
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  double tilt = 0.0;  // tilt exponent of the last (largest-n) member

  std::string to_csv() const;
  std::string summary_json() const;
};

struct ConvergenceOptions {
  // Grid resolution per n: points = max(floor_points, ceil(points_per_unit_n
  // * h * n)), capped. The conditional mass concentrates at scale 1/n, so the
  // grid must refine with n to resolve it.
  std::size_t floor_points = kDefaultConditionalGridPoints;
  double points_per_unit_n = 64.0;
  std::size_t max_points = 1u << 20;
  int workers = 1;
};

std::size_t convergence_grid_points(double h, std::int64_t n,
                                    const ConvergenceOptions& options);

// KL(exact conditional || asymptotic form) across the sequence, with a
// least-squares fit of ln KL against ln n.
ConvergenceReport convergence_study(const SmallSystemSequence& seq, double h,
                                    const ConvergenceOptions& options = {});

// The indeterminacy family f(x) = n Omega(n x) e^{-n beta x} with
// Omega(x) = c1 x^gamma: both constraints below pin (c1, beta) given gamma.
struct CounterexampleFamily {
  double gamma = 0.0;
  double beta = 0.0;   // = gamma + 1
  double c1 = 0.0;     // = (gamma+1)^(gamma+1) / Gamma(gamma+1)
  std::int64_t n = 1;
  Density1D density = Density1D::uniform(0.0, 1.0);  // the law of X^(n)
  double omega_constraint = 0.0;   // integral of Omega e^{-beta x}, should be 1
  double mean_constraint = 0.0;    // integral of x Omega e^{-beta x}, should be 1
  double mean = 0.0;               // E[X^(n)], should be 1/n
};

CounterexampleFamily construct_counterexample(double gamma, std::int64_t n);

}  // namespace gibbslab

#endif
