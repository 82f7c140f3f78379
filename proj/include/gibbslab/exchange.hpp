#ifndef GIBBSLAB_EXCHANGE_HPP
#define GIBBSLAB_EXCHANGE_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace gibbslab {

// Pairwise-exchange economy: N agents hold non-negative amounts; an
// elementary step picks a uniformly random pair and splits their combined
// holding uniformly.  "conserved" keeps the grand total fixed forever;
// "open" adds an external bounded injection/withdrawal channel and records
// snapshots conditionally on the instantaneous total landing in a window
// around the target.
enum class ExchangeMode { conserved, open };

struct ExchangeOptions {
  // Chance per elementary step of an external injection/withdrawal event
  // (open mode only).
  double perturb_prob = 0.1;
  // Half-range of the injected amount; negative selects the default
  // 0.01 * total / n_agents.
  double perturb_scale = -1.0;
  // Strength of the drift that pulls the total back toward the anchor,
  // as a fraction of perturb_scale per event.  Zero disables it.
  double restoring = 0.2;
  // Total the restoring drift pulls toward; negative selects the target
  // total itself.
  double anchor = -1.0;
  // Elementary steps between snapshots; negative selects n_agents.
  std::int64_t stride = -1;
  // Histogram resolution for city holdings.
  std::int64_t bins = 64;
  // Upper edge of the histogram range; values beyond it land in the last
  // bin.  Negative selects bin_span * city_size * total / n_agents per
  // city; a positive value applies to every city.
  double bin_upper = -1.0;
  double bin_span = 14.0;
  // Optional permutation of agent labels applied to every drawn index.
  // Running a relabeled economy on relabeled cities reproduces the original
  // statistics exactly; empty means identity.
  std::vector<std::int64_t> relabeling{};
};

class ExchangeEconomy {
public:
  // cities: index sets of the tracked small subsystems; each must have at
  // most n_agents / 100 members.  delta is the full selection-window width
  // for the open mode (snapshots recorded only when the total lies in
  // (total - delta/2, total + delta/2]); it must be zero in conserved mode.
  ExchangeEconomy(std::int64_t n_agents, double total,
                  std::vector<std::vector<std::int64_t>> cities,
                  ExchangeMode mode = ExchangeMode::conserved,
                  double delta = 0.0, ExchangeOptions options = ExchangeOptions{});

  std::int64_t n_agents() const { return n_agents_; }
  double total() const { return total_; }
  const std::vector<std::vector<std::int64_t>>& cities() const { return cities_; }
  ExchangeMode mode() const { return mode_; }
  double delta() const { return delta_; }
  const ExchangeOptions& options() const { return options_; }

  // Resolved values of the defaultable knobs.
  double perturb_scale() const;
  double anchor() const;
  std::int64_t stride() const;
  double bin_upper_for(std::size_t city_index) const;

private:
  std::int64_t n_agents_;
  double total_;
  std::vector<std::vector<std::int64_t>> cities_;
  ExchangeMode mode_;
  double delta_;
  ExchangeOptions options_;
};

// Binned empirical density of one city's total holding, with an exponential
// slope fitted to the log bin densities (weighted least squares over bins
// holding at least five samples).
struct SubsystemHistogram {
  std::string mode;  // "a" (unconditional) or "b" (selected on the total)
  double total;      // the economy's target total
  std::int64_t city_size = 0;
  std::int64_t samples = 0;
  double bin_upper = 0.0;
  std::vector<std::int64_t> counts;
  std::vector<double> masses;  // counts / samples; sums to one
  double beta_hat = 0.0;
  double beta_se = 0.0;

  double bin_width() const;
  // Columns: bin_left, bin_right, mass.
  std::string to_csv() const;
};

struct ExchangeRunResult {
  // One histogram per city, in the economy's city order.  In open mode these
  // hold only the snapshots that passed the selection window.
  std::vector<SubsystemHistogram> histograms;
  // Open mode only: unconditional histograms over all snapshot instants,
  // for ratio diagnostics against the selected ones.  Empty in conserved
  // mode.
  std::vector<SubsystemHistogram> marginal_histograms;
  double final_total = 0.0;
  std::int64_t snapshots_attempted = 0;
  std::int64_t snapshots_accepted = 0;
};

// Simulates `steps` elementary exchanges, discards the first 10% as burn-in,
// and snapshots the city holdings every stride steps after that.  Requires
// n_agents >= 1000.  Raises insufficient_accepted_snapshots when no snapshot
// is recorded, or in open mode when fewer than 1000 pass selection.
ExchangeRunResult run_exchange(const ExchangeEconomy& economy,
                               std::int64_t steps, std::uint64_t seed);

// Divergence report between a conserved-mode and an open-mode histogram of
// the same city under the same binning.
struct AbComparison {
  double tv = 0.0;      // total-variation distance between bin masses
  double skl = 0.0;     // symmetrized KL over jointly occupied bins
  double beta_a = 0.0;
  double beta_b = 0.0;
  double se = 0.0;      // pooled slope standard error
  // Keys: tv, skl, beta_a, beta_b, se.
  std::string to_json() const;
};

AbComparison compare_ab(const SubsystemHistogram& a, const SubsystemHistogram& b);

}  // namespace gibbslab

#endif
