#include "gibbslab/exchange.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "gibbslab/error.hpp"
#include "gibbslab/jsonio.hpp"
#include "gibbslab/rng.hpp"

namespace gibbslab {

namespace {

constexpr std::int64_t kMinAgents = 1000;
constexpr std::int64_t kMinAcceptedOpen = 1000;
constexpr std::int64_t kMinFitCount = 5;

// Weighted least squares of ln(bin density) against bin centers over bins
// with at least kMinFitCount samples; weight = count (the log of a Poisson
// count has variance ~ 1/count).  Returns {slope, slope standard error}.
void fit_log_slope(SubsystemHistogram& hist) {
  const double width = hist.bin_width();
  double sw = 0.0, swx = 0.0;
  const auto n_bins = hist.counts.size();
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (hist.counts[b] < kMinFitCount) continue;
    const double w = static_cast<double>(hist.counts[b]);
    const double x = (static_cast<double>(b) + 0.5) * width;
    sw += w;
    swx += w * x;
  }
  require(sw > 0.0, ErrorCode::degenerate_fit,
          "no histogram bin holds enough samples to fit a slope");
  const double xbar = swx / sw;
  double sxx = 0.0, sxy = 0.0;
  int occupied = 0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (hist.counts[b] < kMinFitCount) continue;
    ++occupied;
    const double w = static_cast<double>(hist.counts[b]);
    const double x = (static_cast<double>(b) + 0.5) * width;
    const double density = hist.masses[b] / width;
    const double y = std::log(density);
    sxx += w * (x - xbar) * (x - xbar);
    sxy += w * (x - xbar) * y;
  }
  require(occupied >= 2 && sxx > 0.0, ErrorCode::degenerate_fit,
          "slope fit needs at least two occupied histogram bins");
  const double slope = sxy / sxx;
  hist.beta_hat = -slope;
  hist.beta_se = 1.0 / std::sqrt(sxx);
  require(std::isfinite(hist.beta_hat) && std::isfinite(hist.beta_se),
          ErrorCode::degenerate_fit, "slope fit produced a non-finite value");
}

}  // namespace

ExchangeEconomy::ExchangeEconomy(std::int64_t n_agents, double total,
                                 std::vector<std::vector<std::int64_t>> cities,
                                 ExchangeMode mode, double delta,
                                 ExchangeOptions options)
    : n_agents_(n_agents),
      total_(total),
      cities_(std::move(cities)),
      mode_(mode),
      delta_(delta),
      options_(std::move(options)) {
  require(n_agents_ >= kMinAgents, ErrorCode::invalid_argument,
          "economy needs at least 1000 agents");
  require(std::isfinite(total_) && total_ > 0.0, ErrorCode::invalid_argument,
          "economy total must be positive and finite");
  require(!cities_.empty(), ErrorCode::invalid_argument,
          "at least one city must be designated");
  const std::int64_t max_city = n_agents_ / 100;
  for (const auto& city : cities_) {
    require(!city.empty(), ErrorCode::invalid_argument,
            "a city must have at least one member");
    require(static_cast<std::int64_t>(city.size()) <= max_city,
            ErrorCode::invalid_argument,
            "a city may hold at most one percent of the agents");
    std::vector<std::int64_t> sorted = city;
    std::sort(sorted.begin(), sorted.end());
    require(sorted.front() >= 0 && sorted.back() < n_agents_,
            ErrorCode::invalid_argument, "city member index out of range");
    require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
            ErrorCode::invalid_argument, "city members must be distinct");
  }
  if (mode_ == ExchangeMode::conserved) {
    require(delta_ == 0.0, ErrorCode::invalid_argument,
            "the selection window applies only to the open mode");
  } else {
    require(std::isfinite(delta_) && delta_ > 0.0, ErrorCode::invalid_argument,
            "open mode needs a positive selection-window width");
  }
  require(options_.perturb_prob >= 0.0 && options_.perturb_prob <= 1.0,
          ErrorCode::invalid_argument,
          "perturbation probability must lie in [0, 1]");
  require(options_.perturb_scale < 0.0 ||
              (std::isfinite(options_.perturb_scale) &&
               options_.perturb_scale > 0.0),
          ErrorCode::invalid_argument,
          "perturbation scale must be positive (or negative for the default)");
  require(options_.restoring >= 0.0 && std::isfinite(options_.restoring),
          ErrorCode::invalid_argument, "restoring strength must be >= 0");
  require(options_.anchor < 0.0 ||
              (std::isfinite(options_.anchor) && options_.anchor > 0.0),
          ErrorCode::invalid_argument,
          "anchor must be positive (or negative for the default)");
  require(options_.stride != 0, ErrorCode::invalid_argument,
          "snapshot stride must be nonzero (negative for the default)");
  require(options_.bins >= 4, ErrorCode::invalid_argument,
          "histograms need at least 4 bins");
  require(options_.bin_upper < 0.0 ||
              (std::isfinite(options_.bin_upper) && options_.bin_upper > 0.0),
          ErrorCode::invalid_argument,
          "histogram upper edge must be positive (or negative for the default)");
  require(std::isfinite(options_.bin_span) && options_.bin_span > 0.0,
          ErrorCode::invalid_argument, "bin span must be positive");
  if (!options_.relabeling.empty()) {
    require(static_cast<std::int64_t>(options_.relabeling.size()) == n_agents_,
            ErrorCode::invalid_argument,
            "relabeling must permute all agent labels");
    std::vector<char> seen(static_cast<std::size_t>(n_agents_), 0);
    for (const std::int64_t target : options_.relabeling) {
      require(target >= 0 && target < n_agents_, ErrorCode::invalid_argument,
              "relabeling entry out of range");
      char& flag = seen[static_cast<std::size_t>(target)];
      require(flag == 0, ErrorCode::invalid_argument,
              "relabeling repeats a label");
      flag = 1;
    }
  }
}

double ExchangeEconomy::perturb_scale() const {
  if (options_.perturb_scale > 0.0) return options_.perturb_scale;
  return 0.01 * total_ / static_cast<double>(n_agents_);
}

double ExchangeEconomy::anchor() const {
  return options_.anchor > 0.0 ? options_.anchor : total_;
}

std::int64_t ExchangeEconomy::stride() const {
  return options_.stride > 0 ? options_.stride : n_agents_;
}

double ExchangeEconomy::bin_upper_for(std::size_t city_index) const {
  if (options_.bin_upper > 0.0) return options_.bin_upper;
  const double city_size =
      static_cast<double>(cities_.at(city_index).size());
  return options_.bin_span * city_size * total_ /
         static_cast<double>(n_agents_);
}

double SubsystemHistogram::bin_width() const {
  return bin_upper / static_cast<double>(counts.size());
}

std::string SubsystemHistogram::to_csv() const {
  CsvWriter csv({"bin_left", "bin_right", "mass"});
  const double width = bin_width();
  for (std::size_t b = 0; b < counts.size(); ++b) {
    csv.add_row({static_cast<double>(b) * width,
                 (static_cast<double>(b) + 1.0) * width, masses[b]});
  }
  return csv.dump();
}

ExchangeRunResult run_exchange(const ExchangeEconomy& economy,
                               std::int64_t steps, std::uint64_t seed) {
  require(steps >= 1, ErrorCode::invalid_argument,
          "the exchange run needs at least one step");
  const std::int64_t n = economy.n_agents();
  const double h = economy.total();
  const bool open = economy.mode() == ExchangeMode::open;
  const double delta = economy.delta();
  const double scale = economy.perturb_scale();
  const double anchor = economy.anchor();
  const double restoring = economy.options().restoring * scale;
  const double perturb_prob = economy.options().perturb_prob;
  const std::int64_t stride = economy.stride();
  const std::int64_t burn_in = steps / 10;
  const auto& relabeling = economy.options().relabeling;

  std::vector<double> holdings(static_cast<std::size_t>(n),
                               h / static_cast<double>(n));
  double running_total = h;

  const auto n_cities = economy.cities().size();
  ExchangeRunResult result;
  result.histograms.resize(n_cities);
  if (open) result.marginal_histograms.resize(n_cities);
  const std::int64_t bins = economy.options().bins;
  std::vector<double> inv_width(n_cities);
  for (std::size_t c = 0; c < n_cities; ++c) {
    auto& hist = result.histograms[c];
    hist.mode = open ? "b" : "a";
    hist.total = h;
    hist.city_size = static_cast<std::int64_t>(economy.cities()[c].size());
    hist.bin_upper = economy.bin_upper_for(c);
    hist.counts.assign(static_cast<std::size_t>(bins), 0);
    inv_width[c] = static_cast<double>(bins) / hist.bin_upper;
    if (open) {
      auto& marginal = result.marginal_histograms[c];
      marginal = hist;
      marginal.mode = "b";
    }
  }

  Philox rng(seed);
  const double n_real = static_cast<double>(n);
  const double window_lo = h - 0.5 * delta;
  const double window_hi = h + 0.5 * delta;

  const auto pick = [&](double u, double span) {
    auto index = static_cast<std::int64_t>(u * span);
    if (index >= static_cast<std::int64_t>(span)) index = static_cast<std::int64_t>(span) - 1;
    return index;
  };
  const auto relabel = [&](std::int64_t index) {
    return relabeling.empty()
               ? index
               : relabeling[static_cast<std::size_t>(index)];
  };

  const auto record = [&](std::vector<SubsystemHistogram>& target) {
    for (std::size_t c = 0; c < n_cities; ++c) {
      double city_total = 0.0;
      for (const std::int64_t member : economy.cities()[c]) {
        city_total += holdings[static_cast<std::size_t>(member)];
      }
      auto bin = static_cast<std::int64_t>(city_total * inv_width[c]);
      bin = std::clamp<std::int64_t>(bin, 0, bins - 1);
      ++target[c].counts[static_cast<std::size_t>(bin)];
      ++target[c].samples;
    }
  };

  for (std::int64_t step = 1; step <= steps; ++step) {
    const std::int64_t i_raw = pick(rng.uniform(), n_real);
    std::int64_t j_raw = pick(rng.uniform(), n_real - 1.0);
    if (j_raw >= i_raw) ++j_raw;
    const auto i = static_cast<std::size_t>(relabel(i_raw));
    const auto j = static_cast<std::size_t>(relabel(j_raw));
    const double combined = holdings[i] + holdings[j];
    const double share = rng.uniform() * combined;
    holdings[i] = share;
    holdings[j] = combined - share;

    if (open && perturb_prob > 0.0 && rng.uniform() < perturb_prob) {
      const auto a =
          static_cast<std::size_t>(relabel(pick(rng.uniform(), n_real)));
      double amount = rng.uniform(-scale, scale);
      if (running_total > anchor) {
        amount -= restoring;
      } else if (running_total < anchor) {
        amount += restoring;
      }
      const double updated = std::max(0.0, holdings[a] + amount);
      running_total += updated - holdings[a];
      holdings[a] = updated;
    }

    if (step > burn_in && (step - burn_in) % stride == 0) {
      ++result.snapshots_attempted;
      if (open) {
        record(result.marginal_histograms);
        if (running_total > window_lo && running_total <= window_hi) {
          ++result.snapshots_accepted;
          record(result.histograms);
        }
      } else {
        long double checked = 0.0L;
        for (const double holding : holdings) checked += holding;
        require(std::abs(static_cast<double>(checked) - h) <= 1e-9,
                ErrorCode::internal,
                "conserved total drifted beyond 1e-9");
        ++result.snapshots_accepted;
        record(result.histograms);
      }
    }
  }

  require(result.snapshots_accepted >= 1, ErrorCode::insufficient_accepted_snapshots,
          "no snapshot was recorded; increase steps");
  if (open) {
    require(result.snapshots_accepted >= kMinAcceptedOpen,
            ErrorCode::insufficient_accepted_snapshots,
            "fewer than 1000 snapshots passed selection; widen the window or "
            "lengthen the run");
  }

  const auto finalize = [](SubsystemHistogram& hist) {
    hist.masses.resize(hist.counts.size());
    for (std::size_t b = 0; b < hist.counts.size(); ++b) {
      hist.masses[b] = static_cast<double>(hist.counts[b]) /
                       static_cast<double>(hist.samples);
    }
    fit_log_slope(hist);
  };
  for (auto& hist : result.histograms) finalize(hist);
  for (auto& hist : result.marginal_histograms) finalize(hist);

  long double final_total = 0.0L;
  for (const double holding : holdings) final_total += holding;
  result.final_total = static_cast<double>(final_total);
  return result;
}

std::string AbComparison::to_json() const {
  JsonValue root = JsonValue::object();
  root.set("tv", tv);
  root.set("skl", skl);
  root.set("beta_a", beta_a);
  root.set("beta_b", beta_b);
  root.set("se", se);
  return root.dump();
}

AbComparison compare_ab(const SubsystemHistogram& a,
                        const SubsystemHistogram& b) {
  require(a.counts.size() == b.counts.size() && a.bin_upper == b.bin_upper,
          ErrorCode::binning_mismatch,
          "histograms must share bin count and range");
  require(a.city_size == b.city_size, ErrorCode::binning_mismatch,
          "histograms must describe same-size cities");
  require(a.total == b.total, ErrorCode::binning_mismatch,
          "histograms must target the same economy total");
  AbComparison report;
  report.beta_a = a.beta_hat;
  report.beta_b = b.beta_hat;
  report.se = std::sqrt(a.beta_se * a.beta_se + b.beta_se * b.beta_se);
  double tv = 0.0, skl = 0.0;
  for (std::size_t bin = 0; bin < a.counts.size(); ++bin) {
    const double p = a.masses[bin];
    const double q = b.masses[bin];
    tv += std::abs(p - q);
    if (p > 0.0 && q > 0.0) skl += (p - q) * (std::log(p) - std::log(q));
  }
  report.tv = 0.5 * tv;
  report.skl = skl;
  return report;
}

}  // namespace gibbslab
