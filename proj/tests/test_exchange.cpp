#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "gibbslab/error.hpp"
#include "gibbslab/exchange.hpp"

using namespace gibbslab;

namespace {

bool raises(const std::function<void()>& fn, ErrorCode code) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

std::vector<std::int64_t> iota_city(std::int64_t size, std::int64_t first) {
  std::vector<std::int64_t> city(static_cast<std::size_t>(size));
  std::iota(city.begin(), city.end(), first);
  return city;
}

struct RatioFit {
  double slope = 0.0;
  double se = 0.0;
  double r_squared = 0.0;
  int bins_used = 0;
};

// Weighted least squares of ln(p/q) on jointly occupied bins; the weight of
// a bin is the harmonic combination of its two counts.
RatioFit fit_log_ratio(const SubsystemHistogram& p, const SubsystemHistogram& q) {
  const double width = p.bin_width();
  const auto weight_of = [&](std::size_t b) -> double {
    if (p.counts[b] < 5 || q.counts[b] < 5) return 0.0;
    return 1.0 / (1.0 / static_cast<double>(p.counts[b]) +
                  1.0 / static_cast<double>(q.counts[b]));
  };
  double sw = 0.0, swx = 0.0, swy = 0.0;
  for (std::size_t b = 0; b < p.counts.size(); ++b) {
    const double w = weight_of(b);
    if (w == 0.0) continue;
    const double x = (static_cast<double>(b) + 0.5) * width;
    sw += w;
    swx += w * x;
    swy += w * std::log(p.masses[b] / q.masses[b]);
  }
  const double xbar = swx / sw;
  const double ybar = swy / sw;
  RatioFit fit;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t b = 0; b < p.counts.size(); ++b) {
    const double w = weight_of(b);
    if (w == 0.0) continue;
    ++fit.bins_used;
    const double x = (static_cast<double>(b) + 0.5) * width;
    const double y = std::log(p.masses[b] / q.masses[b]);
    sxx += w * (x - xbar) * (x - xbar);
    sxy += w * (x - xbar) * y;
  }
  fit.slope = sxy / sxx;
  fit.se = 1.0 / std::sqrt(sxx);
  double ssr = 0.0, sst = 0.0;
  for (std::size_t b = 0; b < p.counts.size(); ++b) {
    const double w = weight_of(b);
    if (w == 0.0) continue;
    const double x = (static_cast<double>(b) + 0.5) * width;
    const double y = std::log(p.masses[b] / q.masses[b]);
    const double predicted = ybar + fit.slope * (x - xbar);
    ssr += w * (y - predicted) * (y - predicted);
    sst += w * (y - ybar) * (y - ybar);
  }
  fit.r_squared = 1.0 - ssr / sst;
  return fit;
}

}  // namespace

TEST_CASE("economy construction and validation") {
  CHECK_NOTHROW(ExchangeEconomy(1000, 10.0, {{0}}));
  CHECK(raises([] { ExchangeEconomy(999, 10.0, {{0}}); },
               ErrorCode::invalid_argument));
  CHECK(raises([] { ExchangeEconomy(1000, 0.0, {{0}}); },
               ErrorCode::invalid_argument));
  CHECK(raises([] { ExchangeEconomy(1000, 10.0, {}); },
               ErrorCode::invalid_argument));
  CHECK(raises([] { ExchangeEconomy(1000, 10.0, {iota_city(11, 0)}); },
               ErrorCode::invalid_argument));
  CHECK(raises([] { ExchangeEconomy(1000, 10.0, {{1, 1}}); },
               ErrorCode::invalid_argument));
  CHECK(raises([] { ExchangeEconomy(1000, 10.0, {{1000}}); },
               ErrorCode::invalid_argument));
  CHECK(raises([] { ExchangeEconomy(1000, 10.0, {{-1}}); },
               ErrorCode::invalid_argument));
  CHECK(raises(
      [] { ExchangeEconomy(1000, 10.0, {{0}}, ExchangeMode::conserved, 1.0); },
      ErrorCode::invalid_argument));
  CHECK(raises(
      [] { ExchangeEconomy(1000, 10.0, {{0}}, ExchangeMode::open, 0.0); },
      ErrorCode::invalid_argument));
  CHECK(raises(
      [] {
        ExchangeOptions options;
        options.relabeling = {0, 0};
        ExchangeEconomy(1000, 10.0, {{0}}, ExchangeMode::conserved, 0.0, options);
      },
      ErrorCode::invalid_argument));

  SUBCASE("resolved defaults") {
    ExchangeEconomy economy(2000, 50.0, {{0}, iota_city(20, 5)});
    CHECK(economy.stride() == 2000);
    CHECK(economy.perturb_scale() == doctest::Approx(0.01 * 50.0 / 2000.0));
    CHECK(economy.anchor() == 50.0);
    CHECK(economy.bin_upper_for(0) == doctest::Approx(14.0 * 1.0 * 50.0 / 2000.0));
    CHECK(economy.bin_upper_for(1) == doctest::Approx(14.0 * 20.0 * 50.0 / 2000.0));
  }
}

TEST_CASE("run preconditions and degenerate outcomes") {
  CHECK(raises(
      [] {
        ExchangeEconomy economy(1000, 10.0, {{0}});
        run_exchange(economy, 0, 1);
      },
      ErrorCode::invalid_argument));
  // burn-in 50 + stride 1000 exceeds 500 steps: no snapshot is ever taken.
  CHECK(raises(
      [] {
        ExchangeEconomy economy(1000, 10.0, {{0}});
        run_exchange(economy, 500, 1);
      },
      ErrorCode::insufficient_accepted_snapshots));
  // ~900 snapshot instants < the 1000 required in open mode.
  CHECK(raises(
      [] {
        ExchangeEconomy economy(1000, 10.0, {{0}}, ExchangeMode::open, 0.1);
        run_exchange(economy, 1000000, 1);
      },
      ErrorCode::insufficient_accepted_snapshots));
  // One giant bin swallows every sample: no slope can be fitted.
  CHECK(raises(
      [] {
        ExchangeOptions options;
        options.bin_upper = 1e6;
        ExchangeEconomy economy(1000, 10.0, {{0}}, ExchangeMode::conserved, 0.0,
                                options);
        run_exchange(economy, 2000000, 1);
      },
      ErrorCode::degenerate_fit));
}

TEST_CASE("conserved-mode stationary law") {
  const std::int64_t n_agents = 1000;
  const double h = 1000.0;
  const std::vector<std::vector<std::int64_t>> cities = {
      {0}, iota_city(10, 100), iota_city(10, 300)};
  ExchangeEconomy economy(n_agents, h, cities);
  const auto run = run_exchange(economy, 111200000, 41);

  SUBCASE("snapshot accounting and conservation") {
    CHECK(run.snapshots_attempted == 100080);
    CHECK(run.snapshots_accepted == 100080);
    CHECK(run.marginal_histograms.empty());
    CHECK(std::abs(run.final_total - h) <= 1e-9);
  }

  SUBCASE("single-agent holding is exponential with slope N/h") {
    const auto& hist = run.histograms[0];
    CHECK(hist.mode == "a");
    CHECK(hist.city_size == 1);
    CHECK(hist.samples == 100080);
    CHECK(hist.beta_hat == doctest::Approx(1.0031747436).epsilon(1e-6));
    CHECK(hist.beta_se == doctest::Approx(0.0032116918).epsilon(1e-4));
    CHECK(std::abs(hist.beta_hat - 1.0) < 0.05);
  }

  SUBCASE("disjoint equal cities share the fitted slope") {
    const auto& first = run.histograms[1];
    const auto& second = run.histograms[2];
    const double joint =
        std::sqrt(first.beta_se * first.beta_se + second.beta_se * second.beta_se);
    CHECK(std::abs(first.beta_hat - second.beta_hat) < 2.0 * joint);
    CHECK(first.beta_hat == doctest::Approx(0.09038647).epsilon(1e-5));
    CHECK(second.beta_hat == doctest::Approx(0.08970620).epsilon(1e-5));
  }

  SUBCASE("bin masses sum to one") {
    for (const auto& hist : run.histograms) {
      double sum = 0.0;
      for (const double mass : hist.masses) sum += mass;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("open-mode selection agrees with the conserved ensemble") {
  const std::int64_t n_agents = 1000;
  const double h = 1000.0;
  const std::vector<std::vector<std::int64_t>> cities = {
      {0}, iota_city(10, 100), iota_city(10, 300)};
  ExchangeEconomy conserved(n_agents, h, cities);
  ExchangeEconomy open(n_agents, h, cities, ExchangeMode::open, 0.01 * h);
  const auto run_a = run_exchange(conserved, 111200000, 41);
  const auto run_b = run_exchange(open, 111200000, 42);

  SUBCASE("selection bookkeeping") {
    CHECK(run_b.snapshots_attempted == 100080);
    CHECK(run_b.snapshots_accepted == 100080);  // restoring keeps the window hit
    CHECK(run_b.marginal_histograms.size() == cities.size());
    CHECK(run_b.final_total == doctest::Approx(h).epsilon(1e-4));
    for (const auto& hist : run_b.histograms) CHECK(hist.mode == "b");
  }

  SUBCASE("all cities agree within sampling noise") {
    const double frozen_tv[3] = {0.009333, 0.003597, 0.005486};
    const double frozen_z[3] = {0.7957, 0.3561, 0.4898};
    for (std::size_t c = 0; c < cities.size(); ++c) {
      const auto report = compare_ab(run_a.histograms[c], run_b.histograms[c]);
      CHECK(report.tv < 0.02);
      const double z = std::abs(report.beta_a - report.beta_b) / report.se;
      CHECK(z < 3.0);
      CHECK(report.tv == doctest::Approx(frozen_tv[c]).epsilon(1e-3));
      CHECK(z == doctest::Approx(frozen_z[c]).epsilon(1e-2));
      CHECK(report.skl >= 0.0);
    }
  }

  SUBCASE("full acceptance makes the selected and marginal histograms equal") {
    CHECK(run_b.marginal_histograms[0].counts == run_b.histograms[0].counts);
    CHECK(run_b.marginal_histograms[0].beta_hat ==
          doctest::Approx(0.99956973).epsilon(1e-6));
  }
}

TEST_CASE("holding ratio across two ensembles is log-linear") {
  // Conserved runs at totals h and 2h: the limit law predicts the ratio of
  // the two city densities to be exponential with slope -(N/h - N/(2h)).
  const std::int64_t n_agents = 1000;
  ExchangeOptions options;
  options.bin_upper = 50.0;
  const std::vector<std::vector<std::int64_t>> cities = {iota_city(10, 0)};
  ExchangeEconomy low(n_agents, 1000.0, cities, ExchangeMode::conserved, 0.0,
                      options);
  ExchangeEconomy high(n_agents, 2000.0, cities, ExchangeMode::conserved, 0.0,
                       options);
  const auto run_low = run_exchange(low, 22300000, 301);
  const auto run_high = run_exchange(high, 22300000, 302);
  CHECK(run_low.histograms[0].samples == 20070);
  CHECK(run_high.histograms[0].samples == 20070);

  const auto fit = fit_log_ratio(run_low.histograms[0], run_high.histograms[0]);
  CHECK(fit.bins_used == 25);
  CHECK(fit.slope == doctest::Approx(-0.50599).epsilon(1e-3));
  CHECK(std::abs(fit.slope - (-0.5)) < 3.0 * fit.se);
  CHECK(fit.r_squared > 0.99);
  CHECK(fit.r_squared == doctest::Approx(0.997047).epsilon(1e-3));
}

TEST_CASE("relabeling symmetry and determinism") {
  const std::int64_t n_agents = 1000;
  const auto city = iota_city(10, 0);
  std::vector<std::int64_t> reversal(static_cast<std::size_t>(n_agents));
  for (std::int64_t k = 0; k < n_agents; ++k) {
    reversal[static_cast<std::size_t>(k)] = n_agents - 1 - k;
  }
  std::vector<std::int64_t> mapped(city.size());
  for (std::size_t k = 0; k < city.size(); ++k) {
    mapped[k] = reversal[static_cast<std::size_t>(city[k])];
  }

  SUBCASE("same seed reproduces the run exactly") {
    ExchangeEconomy economy(n_agents, 1000.0, {city});
    const auto first = run_exchange(economy, 3000000, 99);
    const auto second = run_exchange(economy, 3000000, 99);
    CHECK(first.histograms[0].counts == second.histograms[0].counts);
    CHECK(first.histograms[0].beta_hat == second.histograms[0].beta_hat);
    CHECK(first.final_total == second.final_total);
  }

  SUBCASE("a relabeled economy reproduces the original statistics exactly") {
    ExchangeEconomy base(n_agents, 1000.0, {city});
    const auto original = run_exchange(base, 3000000, 99);
    ExchangeOptions options;
    options.relabeling = reversal;
    ExchangeEconomy relabeled(n_agents, 1000.0, {mapped},
                              ExchangeMode::conserved, 0.0, options);
    const auto permuted = run_exchange(relabeled, 3000000, 99);
    CHECK(original.histograms[0].counts == permuted.histograms[0].counts);
    CHECK(original.histograms[0].beta_hat == permuted.histograms[0].beta_hat);
  }

  SUBCASE("the symmetry also holds for the open mode") {
    ExchangeEconomy base(n_agents, 1000.0, {city}, ExchangeMode::open, 10.0);
    const auto original = run_exchange(base, 3000000, 99);
    ExchangeOptions options;
    options.relabeling = reversal;
    ExchangeEconomy relabeled(n_agents, 1000.0, {mapped}, ExchangeMode::open,
                              10.0, options);
    const auto permuted = run_exchange(relabeled, 3000000, 99);
    CHECK(original.histograms[0].counts == permuted.histograms[0].counts);
    CHECK(original.marginal_histograms[0].counts ==
          permuted.marginal_histograms[0].counts);
    CHECK(original.snapshots_accepted == permuted.snapshots_accepted);
  }
}

TEST_CASE("histogram and comparison exports") {
  ExchangeEconomy economy(1000, 1000.0, {{3}});
  const auto run = run_exchange(economy, 2000000, 7);
  const auto& hist = run.histograms[0];
  CHECK(hist.samples == 1800);
  CHECK(hist.beta_hat == doctest::Approx(0.98543099765920883).epsilon(1e-9));

  SUBCASE("csv layout") {
    const std::string csv = hist.to_csv();
    CHECK(csv.rfind("bin_left,bin_right,mass\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 65);  // header + 64 bins
  }

  SUBCASE("self-comparison is exactly zero") {
    const auto report = compare_ab(hist, hist);
    CHECK(report.tv == 0.0);
    CHECK(report.skl == 0.0);
    CHECK(report.beta_a == report.beta_b);
    CHECK(report.se == doctest::Approx(0.036961223446362497).epsilon(1e-9));
  }

  SUBCASE("json layout") {
    const auto parsed = nlohmann::json::parse(compare_ab(hist, hist).to_json());
    CHECK(parsed.size() == 5);
    CHECK(parsed.contains("tv"));
    CHECK(parsed.contains("skl"));
    CHECK(parsed.contains("beta_a"));
    CHECK(parsed.contains("beta_b"));
    CHECK(parsed.contains("se"));
    CHECK(parsed["beta_a"].get<double>() == hist.beta_hat);
  }

  SUBCASE("mismatched binning is rejected") {
    ExchangeOptions options;
    options.bins = 32;
    ExchangeEconomy other(1000, 1000.0, {{3}}, ExchangeMode::conserved, 0.0,
                          options);
    const auto run_other = run_exchange(other, 2000000, 7);
    CHECK(raises([&] { compare_ab(hist, run_other.histograms[0]); },
                 ErrorCode::binning_mismatch));
    ExchangeEconomy bigger(1000, 2000.0, {{3}});
    const auto run_bigger = run_exchange(bigger, 2000000, 7);
    CHECK(raises([&] { compare_ab(hist, run_bigger.histograms[0]); },
                 ErrorCode::binning_mismatch));
  }
}
