#ifndef GIBBSLAB_CONDITIONAL_HPP
#define GIBBSLAB_CONDITIONAL_HPP

#include <cstdint>
#include <functional>
#include <string>

#include "gibbslab/density.hpp"
#include "gibbslab/joint.hpp"

namespace gibbslab {

// Law of X given X + Y = h (delta = 0) or given X + Y in the width-delta
// window around h. Continuous results are materialized on a uniform grid.
struct ConditionalLaw {
  Density1D density = Density1D::uniform(0.0, 1.0);
  double h = 0.0;
  double delta = 0.0;

  std::string to_json() const;
};

struct DiscreteConditionalLaw {
  DiscretePMF pmf = DiscretePMF::point_mass(0, 1);
  std::int64_t total = 0;
};

inline constexpr std::size_t kDefaultConditionalGridPoints = 2048;

// Exact conditional of X given X + Y = h: f_X(x) f_{Y|X}(h-x; x) normalized
// on [0, h], evaluated on a grid of `points` nodes.
ConditionalLaw exact_conditional_continuous(
    const JointLaw& joint, double h,
    std::size_t points = kDefaultConditionalGridPoints);

// Exact conditional of K given K + L = m for log_pmf_l(l, k) = ln p_{L|K}(l; k).
DiscreteConditionalLaw exact_conditional_discrete(
    const DiscretePMF& p_k,
    const std::function<double(std::int64_t, std::int64_t)>& log_pmf_l,
    std::int64_t m);

// Conditional of X given X + Y in (h - delta/2, h + delta/2], via an inner
// quadrature over the window at each grid node.
ConditionalLaw shell_conditional(const JointLaw& joint, double h, double delta,
                                 std::size_t points = kDefaultConditionalGridPoints);

}  // namespace gibbslab

#endif
