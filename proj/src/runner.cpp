#include "gibbslab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <limits>

#include <json.hpp>

#include "gibbslab/conditional.hpp"
#include "gibbslab/counting.hpp"
#include "gibbslab/density.hpp"
#include "gibbslab/error.hpp"
#include "gibbslab/exchange.hpp"
#include "gibbslab/joint.hpp"
#include "gibbslab/jsonio.hpp"
#include "gibbslab/limitlaw.hpp"
#include "gibbslab/phasespace.hpp"
#include "gibbslab/rng.hpp"
#include "gibbslab/thermo.hpp"

namespace gibbslab {
namespace {

using nlohmann::json;

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Collects everything a run produces: output files, assertion records, and
// the resolved-config echo that goes into the manifest.
struct RunState {
  std::filesystem::path dir;
  std::uint64_t seed = 0;
  int workers = 1;
  std::vector<std::string> outputs;
  std::vector<Assertion> assertions;
  JsonValue resolved = JsonValue::object();

  void write_output(const std::string& name, const std::string& content) {
    write_text_file((dir / name).string(), content);
    outputs.push_back(name);
  }

  void check(const std::string& name, bool ok, std::string detail) {
    assertions.push_back({name, ok, std::move(detail)});
  }

  bool all_passed() const {
    for (const auto& a : assertions)
      if (!a.passed) return false;
    return !assertions.empty();
  }
};

std::string versus(const char* what, double value, const char* relation,
                   double bound) {
  return std::string(what) + " = " + format_double(value) + " (" + relation +
         " " + format_double(bound) + ")";
}

// Typed access to the flat config object. Every read echoes the resolved
// value (default or supplied) into the manifest; finish() rejects keys that
// no read consumed, so misspelled or misplaced options fail loudly.
class ConfigReader {
 public:
  ConfigReader(const json& cfg, const std::string& experiment, RunState& state)
      : cfg_(cfg), experiment_(experiment), state_(state) {}

  double number(const std::string& key, double dflt) {
    const double v = cfg_.contains(key) ? as_number(key) : dflt;
    state_.resolved.set(key, v);
    return v;
  }

  std::int64_t integer(const std::string& key, std::int64_t dflt) {
    const std::int64_t v = cfg_.contains(key) ? as_integer(key) : dflt;
    state_.resolved.set(key, v);
    return v;
  }

  std::string text(const std::string& key, const std::string& dflt) {
    std::string v = dflt;
    if (cfg_.contains(key)) {
      consumed_.insert(key);
      const json& j = cfg_.at(key);
      require(j.is_string(), ErrorCode::config_error,
              "config key '" + key + "' must be a string");
      v = j.get<std::string>();
    }
    state_.resolved.set(key, v);
    return v;
  }

  bool flag(const std::string& key, bool dflt) {
    bool v = dflt;
    if (cfg_.contains(key)) {
      consumed_.insert(key);
      const json& j = cfg_.at(key);
      require(j.is_boolean(), ErrorCode::config_error,
              "config key '" + key + "' must be a boolean");
      v = j.get<bool>();
    }
    state_.resolved.set(key, v);
    return v;
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> dflt) {
    std::vector<double> v = std::move(dflt);
    if (cfg_.contains(key)) {
      consumed_.insert(key);
      const json& j = cfg_.at(key);
      require(j.is_array() && !j.empty(), ErrorCode::config_error,
              "config key '" + key + "' must be a non-empty array of numbers");
      v.clear();
      for (const auto& e : j) {
        require(e.is_number(), ErrorCode::config_error,
                "config key '" + key + "' must contain only numbers");
        v.push_back(e.get<double>());
      }
    }
    JsonValue arr = JsonValue::array();
    for (double x : v) arr.push_back(JsonValue::real(x));
    state_.resolved.set(key, std::move(arr));
    return v;
  }

  std::vector<std::int64_t> integers(const std::string& key,
                                     std::vector<std::int64_t> dflt) {
    std::vector<std::int64_t> v = std::move(dflt);
    if (cfg_.contains(key)) {
      consumed_.insert(key);
      const json& j = cfg_.at(key);
      require(j.is_array() && !j.empty(), ErrorCode::config_error,
              "config key '" + key + "' must be a non-empty array of integers");
      v.clear();
      for (const auto& e : j) {
        require(e.is_number_integer(), ErrorCode::config_error,
                "config key '" + key + "' must contain only integers");
        v.push_back(e.get<std::int64_t>());
      }
    }
    JsonValue arr = JsonValue::array();
    for (std::int64_t x : v) arr.push_back(JsonValue::integer(x));
    state_.resolved.set(key, std::move(arr));
    return v;
  }

  std::vector<std::vector<std::int64_t>> index_groups(
      const std::string& key, std::vector<std::vector<std::int64_t>> dflt) {
    std::vector<std::vector<std::int64_t>> v = std::move(dflt);
    if (cfg_.contains(key)) {
      consumed_.insert(key);
      const json& j = cfg_.at(key);
      require(j.is_array() && !j.empty(), ErrorCode::config_error,
              "config key '" + key + "' must be a non-empty array of index arrays");
      v.clear();
      for (const auto& grp : j) {
        require(grp.is_array() && !grp.empty(), ErrorCode::config_error,
                "config key '" + key + "' must contain non-empty index arrays");
        std::vector<std::int64_t> group;
        for (const auto& e : grp) {
          require(e.is_number_integer() && e.get<std::int64_t>() >= 0,
                  ErrorCode::config_error,
                  "config key '" + key + "' must contain nonnegative integers");
          group.push_back(e.get<std::int64_t>());
        }
        v.push_back(std::move(group));
      }
    }
    JsonValue arr = JsonValue::array();
    for (const auto& group : v) {
      JsonValue inner = JsonValue::array();
      for (std::int64_t x : group) inner.push_back(JsonValue::integer(x));
      arr.push_back(std::move(inner));
    }
    state_.resolved.set(key, std::move(arr));
    return v;
  }

  // Rejects config keys no getter consumed. "experiment", "seed", and "out"
  // are handled by the runner itself and always legal.
  void finish() const {
    for (const auto& item : cfg_.items()) {
      const std::string& key = item.key();
      if (key == "experiment" || key == "seed" || key == "out") continue;
      require(consumed_.count(key) != 0, ErrorCode::config_error,
              "unknown config key '" + key + "' for experiment '" +
                  experiment_ + "'");
    }
  }

 private:
  double as_number(const std::string& key) {
    consumed_.insert(key);
    const json& j = cfg_.at(key);
    require(j.is_number(), ErrorCode::config_error,
            "config key '" + key + "' must be a number");
    return j.get<double>();
  }

  std::int64_t as_integer(const std::string& key) {
    consumed_.insert(key);
    const json& j = cfg_.at(key);
    require(j.is_number_integer(), ErrorCode::config_error,
            "config key '" + key + "' must be an integer");
    return j.get<std::int64_t>();
  }

  const json& cfg_;
  std::string experiment_;
  RunState& state_;
  std::set<std::string> consumed_;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  require(n >= 2 && y.size() == n, ErrorCode::degenerate_fit,
          "a line fit needs at least two points");
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, ErrorCode::degenerate_fit, "line fit abscissae coincide");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

// ---------------------------------------------------------------------------
// conditional: exact conditional of one summand given the total, checked
// against the scaled-beta closed form for an equal-scale gamma pair.
// ---------------------------------------------------------------------------

void run_conditional(ConfigReader& cfg, RunState& state) {
  const double h = cfg.number("h", 1.0);
  const double x_shape = cfg.number("x_shape", 2.0);
  const double x_scale = cfg.number("x_scale", 1.0);
  const double y_shape = cfg.number("y_shape", 3.0);
  const double y_scale = cfg.number("y_scale", 1.0);
  const std::int64_t points = cfg.integer("points", 2048);
  const double bound = cfg.number("error_bound", 1e-6);
  cfg.finish();

  require(h > 0.0 && std::isfinite(h), ErrorCode::config_error,
          "'h' must be positive and finite");
  require(x_shape >= 1.0 && y_shape >= 1.0 && x_scale > 0.0 && y_scale > 0.0,
          ErrorCode::config_error,
          "gamma scales must be positive and shapes at least 1 (the "
          "closed-form comparison needs bounded densities)");
  require(x_scale == y_scale, ErrorCode::config_error,
          "the scaled-beta reference requires equal gamma scales");
  require(points >= 16 && points <= (1 << 20), ErrorCode::config_error,
          "'points' must lie in [16, 1048576]");
  require(bound > 0.0, ErrorCode::config_error, "'error_bound' must be positive");

  const JointLaw joint = JointLaw::independent(
      Density1D::gamma(x_shape, x_scale), Density1D::gamma(y_shape, y_scale));
  const ConditionalLaw law =
      exact_conditional_continuous(joint, h, static_cast<std::size_t>(points));

  // X | X+Y = h for independent equal-scale gammas is h times a
  // Beta(x_shape, y_shape) variable; the scale drops out entirely.
  const double log_beta_fn = std::lgamma(x_shape) + std::lgamma(y_shape) -
                             std::lgamma(x_shape + y_shape);
  const auto reference = [&](double x) {
    const double u = std::min(1.0, std::max(0.0, x / h));
    const double t1 = x_shape == 1.0 ? 0.0 : (x_shape - 1.0) * std::log(u);
    const double t2 = y_shape == 1.0 ? 0.0 : (y_shape - 1.0) * std::log1p(-u);
    return std::exp(t1 + t2 - log_beta_fn) / h;
  };

  CsvWriter csv({"x", "exact", "reference", "abs_error"});
  double max_err = 0.0;
  const Interval sup = law.density.support();
  for (std::int64_t i = 0; i < points; ++i) {
    const double x = sup.lo + static_cast<double>(i) * sup.width() /
                                  static_cast<double>(points - 1);
    const double exact = law.density.pdf(x);
    const double ref = reference(x);
    const double err = std::abs(exact - ref);
    max_err = std::max(max_err, err);
    csv.add_row({x, exact, ref, err});
  }
  state.write_output("conditional_density.csv", csv.dump());

  JsonValue summary = JsonValue::object();
  summary.set("h", h);
  summary.set("points", points);
  summary.set("max_abs_error", max_err);
  summary.set("error_bound", bound);
  state.write_output("conditional_summary.json", summary.dump() + "\n");

  state.check("conditional_matches_scaled_beta", max_err < bound,
              versus("max |exact - reference|", max_err, "bound", bound));
}

// ---------------------------------------------------------------------------
// limit-law: the canonical (tilted) form of the conditional law; the log
// ratio against the unconditioned subsystem must be linear with slope equal
// to minus the bath log-slope at the conditioning level.
// ---------------------------------------------------------------------------

void run_limit_law(ConfigReader& cfg, RunState& state) {
  const double h = cfg.number("h", 2.0);
  const double system_rate = cfg.number("system_rate", 1.0);
  const double bath_shape = cfg.number("bath_shape", 5.0);
  const double bath_scale = cfg.number("bath_scale", 1.0);
  const std::int64_t points = cfg.integer("points", 2048);
  cfg.finish();

  require(h > 0.0 && std::isfinite(h), ErrorCode::config_error,
          "'h' must be positive and finite");
  require(system_rate > 0.0 && bath_shape > 0.0 && bath_scale > 0.0,
          ErrorCode::config_error, "rates, shapes, and scales must be positive");
  require(points >= 64 && points <= (1 << 20), ErrorCode::config_error,
          "'points' must lie in [64, 1048576]");

  const Density1D f_x = Density1D::exponential(system_rate);
  const Density1D f_y = Density1D::gamma(bath_shape, bath_scale);
  const JointLaw joint = JointLaw::independent(f_x, f_y);

  const double psi = tilt_exponent(joint, h);
  const double psi_analytic = (bath_shape - 1.0) / h - 1.0 / bath_scale;
  const ConditionalLaw law =
      asymptotic_conditional(f_x, joint, h, static_cast<std::size_t>(points));

  const Interval sup = law.density.support();
  std::vector<double> xs, ys;
  CsvWriter csv({"x", "log_ratio"});
  for (std::int64_t i = 0; i < points; ++i) {
    const double x = sup.lo + (static_cast<double>(i) + 0.5) * sup.width() /
                                  static_cast<double>(points);
    const double num = law.density.pdf(x);
    const double den = f_x.pdf(x);
    if (num <= 0.0 || den <= 0.0) continue;
    const double r = std::log(num / den);
    xs.push_back(x);
    ys.push_back(r);
    csv.add_row({x, r});
  }
  const LineFit fit = fit_line(xs, ys);
  state.write_output("limit_law_ratio.csv", csv.dump());

  JsonValue summary = JsonValue::object();
  summary.set("h", h);
  summary.set("psi_measured", psi);
  summary.set("psi_analytic", psi_analytic);
  summary.set("slope", fit.slope);
  summary.set("intercept", fit.intercept);
  summary.set("r_squared", fit.r_squared);
  state.write_output("limit_law_summary.json", summary.dump() + "\n");

  state.check("log_ratio_linear", fit.r_squared > 1.0 - 1e-10,
              versus("R^2", fit.r_squared, ">", 1.0 - 1e-10));
  state.check("slope_is_minus_tilt", std::abs(-fit.slope - psi) <= 1e-6,
              versus("|slope + psi|", std::abs(fit.slope + psi), "tol", 1e-6));
  state.check("tilt_matches_bath_log_slope",
              std::abs(psi - psi_analytic) <= 1e-6,
              versus("|psi - analytic|", std::abs(psi - psi_analytic), "tol",
                     1e-6));
}

// ---------------------------------------------------------------------------
// convergence: KL divergence between the exact conditional and its canonical
// form as the subsystem weight shrinks like 1/n.
// ---------------------------------------------------------------------------

void run_convergence(ConfigReader& cfg, RunState& state) {
  const double h = cfg.number("h", 4.0);
  const std::vector<std::int64_t> n_values =
      cfg.integers("n", {10, 30, 100, 300, 1000});
  const double system_rate = cfg.number("system_rate", 1.0);
  const double bath_shape = cfg.number("bath_shape", 5.0);
  const double bath_scale = cfg.number("bath_scale", 1.0);
  const double slope_bound = cfg.number("slope_bound", -2.0 / 3.0 + 0.2);
  cfg.finish();

  require(h > 0.0 && std::isfinite(h), ErrorCode::config_error,
          "'h' must be positive and finite");
  require(system_rate > 0.0 && bath_shape > 0.0 && bath_scale > 0.0,
          ErrorCode::config_error, "rates, shapes, and scales must be positive");
  require(n_values.size() >= 4, ErrorCode::config_error,
          "'n' needs at least four sizes for a stable decay fit");
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    require(n_values[i] >= 1, ErrorCode::config_error,
            "'n' entries must be positive");
    require(i == 0 || n_values[i] > n_values[i - 1], ErrorCode::config_error,
            "'n' must be strictly increasing");
  }
  require(n_values.back() >= 100 * n_values.front(), ErrorCode::config_error,
          "'n' must span at least two decades");

  const SmallSystemSequence seq{
      JointLaw::independent(Density1D::exponential(system_rate),
                            Density1D::gamma(bath_shape, bath_scale)),
      n_values,
      {}};

  ConvergenceOptions options;
  options.workers = state.workers;
  const ConvergenceReport report = convergence_study(seq, h, options);

  state.write_output("convergence.csv", report.to_csv());
  state.write_output("convergence_summary.json", report.summary_json() + "\n");

  bool decreasing = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    if (report.rows[i].floored || report.rows[i - 1].floored) continue;
    decreasing = decreasing && report.rows[i].kl < report.rows[i - 1].kl;
  }
  state.check("kl_strictly_decreasing", decreasing,
              decreasing ? "each KL row is below its predecessor"
                         : "a KL row failed to decrease");
  state.check("loglog_slope_below_bound", report.slope <= slope_bound,
              versus("slope", report.slope, "<=", slope_bound));
}

// ---------------------------------------------------------------------------
// counting: a small count conditioned on a large total follows the tilted
// prior; a factorial prior tilts to a truncated Poisson law exactly.
// ---------------------------------------------------------------------------

void run_counting(ConfigReader& cfg, RunState& state) {
  const double prior_mean = cfg.number("prior_mean", 2.0);
  const double bath_rate = cfg.number("bath_rate", 3.0);
  const std::int64_t n = cfg.integer("n", 1000);
  const double lambda = cfg.number("lambda", 3.0);
  const double tv_bound = cfg.number("tv_bound", 1e-2);
  cfg.finish();

  require(prior_mean > 0.0 && bath_rate > 0.0 && lambda > 0.0,
          ErrorCode::config_error, "means and rates must be positive");
  require(n >= 10 && n <= 2000000, ErrorCode::config_error,
          "'n' must lie in [10, 2000000]");
  require(tv_bound > 0.0, ErrorCode::config_error, "'tv_bound' must be positive");

  const DiscretePMF prior = DiscretePMF::poisson(prior_mean);
  const double bath_mean = static_cast<double>(n) * bath_rate;
  const std::int64_t m = std::llround(prior_mean + bath_mean);
  const DiscretePMF bath =
      DiscretePMF::poisson(bath_mean, static_cast<std::size_t>(m) + 2);

  const double mu = pmf_tilt_at(bath, m);
  const DiscreteConditionalLaw exact = exact_conditional_discrete(
      prior, [&bath](std::int64_t l, std::int64_t) { return bath.log_p(l); },
      m);
  const DiscretePMF tilted = tilted_pmf(prior, mu, m);
  const double tv = DiscretePMF::tv_distance(exact.pmf, tilted);

  // A 1/k! prior tilted by mu = ln(lambda) is exactly the Poisson(lambda)
  // law truncated to the prior's support.
  const std::size_t fact_size = 21;
  const DiscretePMF fact_tilted = tilted_pmf(
      DiscretePMF::inverse_factorial(fact_size), std::log(lambda),
      static_cast<std::int64_t>(fact_size) - 1);
  const DiscretePMF poisson_ref = DiscretePMF::poisson(lambda, fact_size);
  double fact_gap = 0.0;
  for (std::int64_t k = 0; k < static_cast<std::int64_t>(fact_size); ++k)
    fact_gap = std::max(fact_gap, std::abs(fact_tilted.p(k) - poisson_ref.p(k)));

  CsvWriter csv({"k", "exact", "tilted"});
  const std::int64_t k_max =
      std::min<std::int64_t>(m, static_cast<std::int64_t>(prior.size()) + 20);
  for (std::int64_t k = 0; k <= k_max; ++k)
    csv.add_row({static_cast<double>(k), exact.pmf.p(k), tilted.p(k)});
  state.write_output("counting_laws.csv", csv.dump());

  JsonValue summary = JsonValue::object();
  summary.set("n", n);
  summary.set("total", m);
  summary.set("tilt", mu);
  summary.set("tv_exact_vs_tilted", tv);
  summary.set("tv_bound", tv_bound);
  summary.set("factorial_prior_gap", fact_gap);
  state.write_output("counting_summary.json", summary.dump() + "\n");

  state.check("tilted_prior_tracks_exact_conditional", tv < tv_bound,
              versus("TV", tv, "bound", tv_bound));
  state.check("factorial_prior_tilts_to_poisson", fact_gap <= 1e-12,
              versus("max pointwise gap", fact_gap, "tol", 1e-12));
}

// ---------------------------------------------------------------------------
// gibbs-paradox: occupancy of a sub-volume under unlabeled versus labeled
// counting conventions; a single particle cannot tell them apart, and the
// labeled law is the binomial by direct enumeration.
// ---------------------------------------------------------------------------

void run_gibbs_paradox(ConfigReader& cfg, RunState& state) {
  const double ratio = cfg.number("ratio", 0.5);
  const std::int64_t total = cfg.integer("total", 4);
  cfg.finish();

  require(ratio > 0.0 && ratio < 1.0, ErrorCode::config_error,
          "'ratio' must lie strictly between 0 and 1");
  require(total >= 1 && total <= 100000, ErrorCode::config_error,
          "'total' must lie in [1, 100000]");

  const GibbsParadoxReport report =
      gibbs_paradox_demo(RegionPair::demo(ratio, 1.0, total));
  const GibbsParadoxReport single =
      gibbs_paradox_demo(RegionPair::demo(ratio, 1.0, 1));

  const DiscretePMF binom = DiscretePMF::binomial(total, ratio);
  double binom_gap = 0.0;
  for (std::int64_t k = 0; k <= total; ++k)
    binom_gap =
        std::max(binom_gap, std::abs(report.law_distinct.p(k) - binom.p(k)));

  CsvWriter csv({"k", "unlabeled", "labeled", "binomial_reference"});
  for (std::int64_t k = 0; k <= total; ++k)
    csv.add_row({static_cast<double>(k), report.law_indistinct.p(k),
                 report.law_distinct.p(k), binom.p(k)});
  state.write_output("gibbs_paradox_laws.csv", csv.dump());
  state.write_output("gibbs_paradox.json", report.to_json(state.seed) + "\n");

  state.check("single_particle_conventions_agree", single.kl <= 1e-12,
              versus("KL at one particle", single.kl, "tol", 1e-12));
  state.check("labeled_law_is_binomial", binom_gap <= 1e-12,
              versus("max pointwise gap", binom_gap, "tol", 1e-12));
  state.check("divergence_nonnegative", report.kl >= 0.0,
              versus("KL", report.kl, ">=", 0.0));
}

// ---------------------------------------------------------------------------
// colonies: a small colony coupled to a large one by migration; its law on
// total-conditioned time slices follows the tilted prior prediction.
// ---------------------------------------------------------------------------

void run_colonies(ConfigReader& cfg, RunState& state) {
  const std::vector<double> birth = cfg.numbers("birth", {0.4, 20.0});
  const std::vector<double> death = cfg.numbers("death", {1.0, 1.0});
  const std::vector<double> migration = cfg.numbers("migration", {0.05, 0.001});
  const std::vector<std::int64_t> initial = cfg.integers("initial", {0, 20});
  const double t_max = cfg.number("t_max", 25000.0);
  const std::int64_t replicas = cfg.integer("replicas", 1);
  const std::int64_t target = cfg.integer("target_total", -1);
  const double tv_bound = cfg.number("tv_bound", 0.05);
  cfg.finish();

  require(birth.size() == 2 && death.size() == 2 && migration.size() == 2 &&
              initial.size() == 2,
          ErrorCode::config_error,
          "'birth', 'death', 'migration', and 'initial' each need two entries");
  require(t_max > 0.0 && std::isfinite(t_max), ErrorCode::config_error,
          "'t_max' must be positive and finite");
  require(replicas >= 1 && replicas <= 64, ErrorCode::config_error,
          "'replicas' must lie in [1, 64]");
  require(initial[0] >= 0 && initial[1] >= 0, ErrorCode::config_error,
          "'initial' counts must be nonnegative");
  require(tv_bound > 0.0, ErrorCode::config_error, "'tv_bound' must be positive");

  const ColonyModel model = ColonyModel::make(
      {birth[0], birth[1]}, {death[0], death[1]},
      {migration[0], migration[1]}, {initial[0], initial[1]});
  std::optional<std::int64_t> target_opt;
  if (target >= 0) target_opt = target;

  const ColonyReport report =
      colony_simulation(model, t_max, state.seed, target_opt,
                        static_cast<int>(replicas));

  state.write_output("colonies_conditional.csv", pmf_to_csv(report.conditional));
  state.write_output("colonies_marginal.csv", pmf_to_csv(report.marginal));
  state.write_output("colonies_predicted.csv", pmf_to_csv(report.predicted));

  JsonValue summary = JsonValue::object();
  summary.set("target_total", report.target_total);
  summary.set("tilt", report.tilt);
  summary.set("tv_conditional_vs_predicted", report.tv_conditional_vs_predicted);
  summary.set("tv_bound", tv_bound);
  summary.set("conditional_time", report.conditional_time);
  summary.set("total_time", report.total_time);
  summary.set("events", report.events);
  summary.set("extinct", report.extinct);
  state.write_output("colonies_summary.json", summary.dump() + "\n");

  state.check("population_survived", !report.extinct,
              report.extinct ? "the population went extinct"
                             : "the population never died out");
  state.check("conditional_tracks_tilted_prediction",
              report.tv_conditional_vs_predicted < tv_bound,
              versus("TV", report.tv_conditional_vs_predicted, "bound",
                     tv_bound));
}

// ---------------------------------------------------------------------------
// shell: uniform sampling of a thin energy shell; the small subsystem's
// energy law approaches the canonical exponential with the rate read off the
// measured bath density of states, improving as the bath grows.
// ---------------------------------------------------------------------------

SeparableHamiltonian make_hamiltonian(const std::string& family,
                                      std::int64_t n1, std::int64_t n2) {
  if (family == "harmonic")
    return SeparableHamiltonian::harmonic(static_cast<int>(n1),
                                          static_cast<int>(n2));
  if (family == "quartic")
    return SeparableHamiltonian::quartic(static_cast<int>(n1),
                                         static_cast<int>(n2));
  raise(ErrorCode::config_error,
        "'family' must be 'harmonic' or 'quartic', got '" + family + "'");
}

void run_shell(ConfigReader& cfg, RunState& state) {
  const std::string family = cfg.text("family", "harmonic");
  const std::int64_t n1 = cfg.integer("n1", 2);
  const std::int64_t n2 = cfg.integer("n2", 200);
  const double h = cfg.number("h", 100.0);
  const double delta = cfg.number("delta", 0.1);
  const std::int64_t count = cfg.integer("count", 100000);
  const std::vector<std::int64_t> sweep = cfg.integers("sweep", {20, 50, 200});
  const double ks_bound = cfg.number("ks_bound", 0.02);
  const std::string sampler_name = cfg.text("sampler", "auto");
  cfg.finish();

  require(n1 >= 1 && n2 >= 2, ErrorCode::config_error,
          "'n1' must be >= 1 and 'n2' >= 2");
  require(h > 0.0 && delta > 0.0 && delta < h, ErrorCode::config_error,
          "need 0 < delta < h");
  require(count >= 100 && count <= 10000000, ErrorCode::config_error,
          "'count' must lie in [100, 10000000]");
  require(ks_bound > 0.0, ErrorCode::config_error, "'ks_bound' must be positive");
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    require(sweep[i] >= 2, ErrorCode::config_error,
            "'sweep' bath sizes must be >= 2");
    require(i == 0 || sweep[i] > sweep[i - 1], ErrorCode::config_error,
            "'sweep' must be strictly increasing");
  }
  ShellSamplerKind sampler = ShellSamplerKind::automatic_choice;
  if (sampler_name == "direct") {
    sampler = ShellSamplerKind::direct;
  } else if (sampler_name == "rejection") {
    sampler = ShellSamplerKind::rejection;
  } else {
    require(sampler_name == "auto", ErrorCode::config_error,
            "'sampler' must be 'auto', 'direct', or 'rejection'");
  }

  const SeparableHamiltonian H = make_hamiltonian(family, n1, n2);
  const ShellSampleSet samples =
      sample_energy_shell(H, h, delta, count, state.seed, {}, sampler);

  // The inverse temperature comes from the measured bath density of states,
  // not from the closed form; the closed form is reported alongside.
  const DensityOfStates dos =
      density_of_states(H.bath_powers(), Interval{0.25 * h, 1.75 * h}, 801);
  const double psi_measured = dos.beta_at(h);
  const double psi_predicted = H.tilt_prediction(h);
  const double ks = ks_to_canonical(samples, psi_measured);

  state.write_output("shell_samples.csv", samples.to_csv());
  state.write_output("shell_summary.json",
                     samples.summary_json(ks, psi_measured, psi_predicted) +
                         "\n");

  CsvWriter sweep_csv({"n2", "ks", "psi_measured"});
  std::vector<double> sweep_ks;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const SeparableHamiltonian Hi = make_hamiltonian(family, n1, sweep[i]);
    const ShellSampleSet si = sample_energy_shell(
        Hi, h, delta, count, state.seed + 1 + static_cast<std::uint64_t>(i), {},
        sampler);
    const DensityOfStates di = density_of_states(
        Hi.bath_powers(), Interval{0.25 * h, 1.75 * h}, 801);
    const double psi_i = di.beta_at(h);
    const double ks_i = ks_to_canonical(si, psi_i);
    sweep_ks.push_back(ks_i);
    sweep_csv.add_row({static_cast<double>(sweep[i]), ks_i, psi_i});
  }
  state.write_output("shell_sweep.csv", sweep_csv.dump());

  state.check("ks_below_bound", ks < ks_bound,
              versus("KS", ks, "bound", ks_bound));
  // Two sampling standard deviations of the KS statistic at this sample size.
  const double slack = 0.52 / std::sqrt(static_cast<double>(count));
  bool monotone = true;
  for (std::size_t i = 1; i < sweep_ks.size(); ++i)
    monotone = monotone && sweep_ks[i] < sweep_ks[i - 1] + slack;
  state.check("ks_improves_with_bath_size", monotone,
              monotone ? "KS decreases along the bath-size sweep"
                       : "KS failed to decrease along the bath-size sweep");
}

// ---------------------------------------------------------------------------
// legendre: the maximum-term (Legendre) free energy against the full
// partition integral; their gap per volume dies off as the volume grows.
// ---------------------------------------------------------------------------

void run_legendre(ConfigReader& cfg, RunState& state) {
  const std::string family = cfg.text("family", "ideal_gas");
  const double c = cfg.number("c", 1.5);
  const double beta = cfg.number("beta", 1.0);
  const std::vector<double> volumes = cfg.numbers("volumes", {100.0, 1000.0, 10000.0});
  const double gap_bound = cfg.number("gap_bound", 0.01);
  const double gap_bound_volume = cfg.number("gap_bound_volume", 1000.0);
  cfg.finish();

  require(beta > 0.0 && std::isfinite(beta), ErrorCode::config_error,
          "'beta' must be positive and finite");
  require(c > 0.0, ErrorCode::config_error, "'c' must be positive");
  require(volumes.size() >= 2, ErrorCode::config_error,
          "'volumes' needs at least two entries");
  for (std::size_t i = 0; i < volumes.size(); ++i) {
    require(volumes[i] > 0.0, ErrorCode::config_error,
            "'volumes' must be positive");
    require(i == 0 || volumes[i] > volumes[i - 1], ErrorCode::config_error,
            "'volumes' must be strictly increasing");
  }
  require(gap_bound > 0.0 && gap_bound_volume > 0.0, ErrorCode::config_error,
          "gap bounds must be positive");

  std::function<ExtensiveEntropy(double)> make_entropy;
  if (family == "ideal_gas") {
    make_entropy = [c](double v) { return ExtensiveEntropy::ideal_gas(c, v); };
  } else if (family == "poissonian") {
    make_entropy = [](double v) { return ExtensiveEntropy::poissonian(v); };
  } else {
    raise(ErrorCode::config_error,
          "'family' must be 'ideal_gas' or 'poissonian', got '" + family + "'");
  }

  const std::vector<FreeEnergyReport> reports =
      free_energy_sweep(make_entropy, volumes, beta);

  CsvWriter csv({"V", "F_exact", "F_legendre", "gap", "gap_per_V"});
  JsonValue rows = JsonValue::array();
  for (const auto& r : reports) {
    csv.add_row({r.volume, r.exact, r.legendre, r.gap, r.gap_per_volume});
    JsonValue row = JsonValue::object();
    row.set("beta", r.beta);
    row.set("volume", r.volume);
    row.set("exact", r.exact);
    row.set("legendre", r.legendre);
    row.set("gap", r.gap);
    row.set("gap_per_volume", r.gap_per_volume);
    rows.push_back(std::move(row));
  }
  state.write_output("legendre_sweep.csv", csv.dump());
  JsonValue summary = JsonValue::object();
  summary.set("family", family);
  summary.set("beta", beta);
  summary.set("reports", std::move(rows));
  state.write_output("legendre_summary.json", summary.dump() + "\n");

  bool monotone = true;
  for (std::size_t i = 1; i < reports.size(); ++i)
    monotone = monotone && reports[i].gap_per_volume < reports[i - 1].gap_per_volume;
  state.check("gap_per_volume_decreases", monotone,
              monotone ? "the per-volume gap shrinks along the sweep"
                       : "the per-volume gap failed to shrink");

  bool small_at_scale = true;
  double worst = 0.0;
  for (const auto& r : reports) {
    if (r.volume >= gap_bound_volume) {
      small_at_scale = small_at_scale && r.gap_per_volume < gap_bound;
      worst = std::max(worst, r.gap_per_volume);
    }
  }
  state.check("gap_per_volume_small_at_scale", small_at_scale,
              versus("max gap/V beyond the threshold volume", worst, "bound",
                     gap_bound));
}

// ---------------------------------------------------------------------------
// fluctuation: variance lower bound tying a density's spread to the spread
// of its log-slope; tight (both sides zero) exactly for the exponential.
// ---------------------------------------------------------------------------

void run_fluctuation(ConfigReader& cfg, RunState& state) {
  const std::string family = cfg.text("family", "exponential");
  if (family == "exponential") {
    const double lambda = cfg.number("lambda", 1.0);
    cfg.finish();
    require(lambda > 0.0 && std::isfinite(lambda), ErrorCode::config_error,
            "'lambda' must be positive and finite");

    const FluctuationReport report =
        fluctuation_bounds(Density1D::exponential(lambda));
    state.write_output("fluctuation.json", report.to_json() + "\n");

    state.check("bound_tight_left_side", std::abs(report.lhs) <= 1e-12,
                versus("|var product|", std::abs(report.lhs), "tol", 1e-12));
    state.check("bound_tight_right_side", std::abs(report.rhs) <= 1e-12,
                versus("|boundary term|", std::abs(report.rhs), "tol", 1e-12));
    state.check("second_moment_product_is_two",
                std::abs(report.second_moment_product - 2.0) <= 1e-9,
                versus("|E[Y^2] E[beta^2] - 2|",
                       std::abs(report.second_moment_product - 2.0), "tol",
                       1e-9));
    return;
  }

  require(family == "gamma", ErrorCode::config_error,
          "'family' must be 'exponential' or 'gamma', got '" + family + "'");
  const std::vector<double> shapes = cfg.numbers("shapes", {2.0, 3.0, 5.0});
  const std::vector<double> scales = cfg.numbers("scales", {0.5, 1.0, 2.0});
  cfg.finish();
  for (double k : shapes)
    require(k >= 1.0 && std::isfinite(k), ErrorCode::config_error,
            "'shapes' must be >= 1 (the log-slope diverges at the origin below 1)");
  for (double th : scales)
    require(th > 0.0 && std::isfinite(th), ErrorCode::config_error,
            "'scales' must be positive");

  CsvWriter csv({"shape", "scale", "lhs", "rhs", "slack"});
  double min_slack = std::numeric_limits<double>::infinity();
  for (double k : shapes) {
    for (double th : scales) {
      const FluctuationReport r = fluctuation_bounds(Density1D::gamma(k, th));
      const double slack = r.lhs - r.rhs;
      min_slack = std::min(min_slack, slack);
      csv.add_row({k, th, r.lhs, r.rhs, slack});
    }
  }
  state.write_output("fluctuation_grid.csv", csv.dump());
  JsonValue summary = JsonValue::object();
  summary.set("family", family);
  summary.set("cells",
              static_cast<std::int64_t>(shapes.size() * scales.size()));
  summary.set("min_slack", min_slack);
  state.write_output("fluctuation.json", summary.dump() + "\n");

  state.check("variance_bound_holds_on_grid", min_slack >= -1e-9,
              versus("min lhs - rhs", min_slack, ">=", -1e-9));
}

// ---------------------------------------------------------------------------
// kl-bound: relative entropy against an unnormalized comparison density is
// bounded below by minus the log of its mass, with equality exactly at the
// normalized comparison.
// ---------------------------------------------------------------------------

Density1D draw_density(Philox& rng, bool unnormalized) {
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
}

void run_kl_bound(ConfigReader& cfg, RunState& state) {
  const std::int64_t pairs = cfg.integer("pairs", 50);
  cfg.finish();
  require(pairs >= 1 && pairs <= 10000, ErrorCode::config_error,
          "'pairs' must lie in [1, 10000]");

  const Philox master(state.seed);
  std::vector<KlBoundReport> reports(static_cast<std::size_t>(pairs));
  const int n_workers = std::max(1, state.workers);
  std::vector<std::thread> pool;
  // Each pair draws from its own split stream, so the sweep is identical for
  // any worker count.
  const auto work = [&](int w) {
    for (std::int64_t i = w; i < pairs; i += n_workers) {
      Philox rng = master.split(static_cast<std::uint64_t>(i) + 1);
      const Density1D f = draw_density(rng, false);
      const Density1D g = draw_density(rng, true);
      reports[static_cast<std::size_t>(i)] = kl_lower_bound_check(f, g);
    }
  };
  if (n_workers == 1) {
    work(0);
  } else {
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }

  CsvWriter csv({"pair", "lhs", "rhs", "slack", "kl_normalized"});
  double min_slack = std::numeric_limits<double>::infinity();
  double max_identity_gap = 0.0;
  for (std::int64_t i = 0; i < pairs; ++i) {
    const auto& r = reports[static_cast<std::size_t>(i)];
    min_slack = std::min(min_slack, r.slack);
    max_identity_gap =
        std::max(max_identity_gap, std::abs(r.slack - r.kl_normalized));
    csv.add_row({static_cast<double>(i), r.lhs, r.rhs, r.slack, r.kl_normalized});
  }
  state.write_output("kl_bound_pairs.csv", csv.dump());

  // Equality case: the comparison is the reference itself, carrying an
  // arbitrary mass; the bound must be met with zero slack.
  const Density1D f_eq = Density1D::gamma(2.0, 1.0, Interval{0.0, 10.0}).normalized();
  const KlBoundReport equality = kl_lower_bound_check(f_eq, f_eq.scaled_mass(3.0));

  JsonValue summary = JsonValue::object();
  summary.set("pairs", pairs);
  summary.set("min_slack", min_slack);
  summary.set("max_identity_gap", max_identity_gap);
  summary.set("equality_slack", equality.slack);
  state.write_output("kl_bound_summary.json", summary.dump() + "\n");

  state.check("lower_bound_holds", min_slack >= -1e-9,
              versus("min slack", min_slack, ">=", -1e-9));
  state.check("slack_equals_normalized_divergence", max_identity_gap <= 1e-8,
              versus("max |slack - KL|", max_identity_gap, "tol", 1e-8));
  state.check("equality_at_normalized_comparison",
              std::abs(equality.slack) <= 1e-8,
              versus("|slack|", std::abs(equality.slack), "tol", 1e-8));
}

// ---------------------------------------------------------------------------
// exchange / compare-ab: pairwise-exchange economy with tracked cities.
// ---------------------------------------------------------------------------

std::vector<std::vector<std::int64_t>> default_cities(std::int64_t agents) {
  const std::int64_t size = std::max<std::int64_t>(1, agents / 200);
  std::vector<std::vector<std::int64_t>> cities(3);
  cities[0] = {0};
  for (std::int64_t i = 0; i < size; ++i) {
    cities[1].push_back(agents / 10 + i);
    cities[2].push_back(agents / 2 + i);
  }
  return cities;
}

bool disjoint(const std::vector<std::int64_t>& a,
              const std::vector<std::int64_t>& b) {
  const std::set<std::int64_t> sa(a.begin(), a.end());
  for (std::int64_t x : b)
    if (sa.count(x)) return false;
  return true;
}

// The assertions shared by both exchange experiments: every single-agent
// city recovers the per-agent rate, and equal-size disjoint cities agree.
void check_city_rates(RunState& state, const char* tag,
                      const std::vector<std::vector<std::int64_t>>& cities,
                      const std::vector<SubsystemHistogram>& hists,
                      double beta_target) {
  for (std::size_t i = 0; i < hists.size(); ++i) {
    if (hists[i].city_size != 1) continue;
    const double rel = std::abs(hists[i].beta_hat - beta_target) / beta_target;
    state.check(std::string(tag) + "_city" + std::to_string(i) +
                    "_rate_within_5pct",
                rel < 0.05, versus("relative error", rel, "bound", 0.05));
  }
  for (std::size_t i = 0; i < hists.size(); ++i) {
    for (std::size_t j = i + 1; j < hists.size(); ++j) {
      if (hists[i].city_size != hists[j].city_size) continue;
      if (!disjoint(cities[i], cities[j])) continue;
      const double gap = std::abs(hists[i].beta_hat - hists[j].beta_hat);
      const double joint_se = std::sqrt(hists[i].beta_se * hists[i].beta_se +
                                        hists[j].beta_se * hists[j].beta_se);
      state.check(std::string(tag) + "_cities" + std::to_string(i) + "_" +
                      std::to_string(j) + "_agree",
                  gap <= 2.0 * joint_se,
                  versus("|rate gap|", gap, "<= 2 x joint se", 2.0 * joint_se));
    }
  }
}

JsonValue histogram_brief(const SubsystemHistogram& h) {
  JsonValue v = JsonValue::object();
  v.set("mode", h.mode);
  v.set("city_size", h.city_size);
  v.set("samples", h.samples);
  v.set("beta_hat", h.beta_hat);
  v.set("beta_se", h.beta_se);
  return v;
}

void run_exchange_experiment(ConfigReader& cfg, RunState& state) {
  const std::int64_t agents = cfg.integer("agents", 10000);
  const double total = cfg.number("total", 10000.0);
  const std::string mode_name = cfg.text("mode", "conserved");
  const double delta_cfg = cfg.number("delta", -1.0);
  const std::int64_t steps = cfg.integer("steps", 1112000000);
  const std::vector<std::vector<std::int64_t>> cities =
      cfg.index_groups("cities", default_cities(agents));
  cfg.finish();

  require(mode_name == "conserved" || mode_name == "open",
          ErrorCode::config_error,
          "'mode' must be 'conserved' or 'open', got '" + mode_name + "'");
  require(agents >= 1000, ErrorCode::config_error, "'agents' must be >= 1000");
  require(total > 0.0 && std::isfinite(total), ErrorCode::config_error,
          "'total' must be positive and finite");
  require(steps >= 1, ErrorCode::config_error, "'steps' must be positive");

  const bool open = mode_name == "open";
  const double delta = open ? (delta_cfg > 0.0 ? delta_cfg : 0.01 * total) : 0.0;
  require(!open || delta > 0.0, ErrorCode::config_error,
          "open mode needs a positive 'delta'");

  const ExchangeEconomy economy(
      agents, total, cities, open ? ExchangeMode::open : ExchangeMode::conserved,
      delta);
  const ExchangeRunResult result = run_exchange(economy, steps, state.seed);

  JsonValue hists = JsonValue::array();
  for (std::size_t i = 0; i < result.histograms.size(); ++i) {
    state.write_output("exchange_city" + std::to_string(i) + ".csv",
                       result.histograms[i].to_csv());
    hists.push_back(histogram_brief(result.histograms[i]));
  }
  for (std::size_t i = 0; i < result.marginal_histograms.size(); ++i)
    state.write_output("exchange_city" + std::to_string(i) + "_marginal.csv",
                       result.marginal_histograms[i].to_csv());

  JsonValue summary = JsonValue::object();
  summary.set("mode", mode_name);
  summary.set("agents", agents);
  summary.set("total", total);
  summary.set("per_agent_rate", static_cast<double>(agents) / total);
  summary.set("snapshots_attempted", result.snapshots_attempted);
  summary.set("snapshots_accepted", result.snapshots_accepted);
  summary.set("final_total", result.final_total);
  summary.set("histograms", std::move(hists));
  state.write_output("exchange_summary.json", summary.dump() + "\n");

  check_city_rates(state, "exchange", cities, result.histograms,
                   static_cast<double>(agents) / total);
}

void run_compare_ab(ConfigReader& cfg, RunState& state) {
  const std::int64_t agents = cfg.integer("agents", 10000);
  const double total = cfg.number("total", 10000.0);
  const double delta_cfg = cfg.number("delta", -1.0);
  const std::int64_t steps = cfg.integer("steps", 1112000000);
  const std::vector<std::vector<std::int64_t>> cities =
      cfg.index_groups("cities", default_cities(agents));
  const double tv_bound = cfg.number("tv_bound", 0.02);
  const double z_bound = cfg.number("z_bound", 3.0);
  cfg.finish();

  require(agents >= 1000, ErrorCode::config_error, "'agents' must be >= 1000");
  require(total > 0.0 && std::isfinite(total), ErrorCode::config_error,
          "'total' must be positive and finite");
  require(steps >= 1, ErrorCode::config_error, "'steps' must be positive");
  require(tv_bound > 0.0 && z_bound > 0.0, ErrorCode::config_error,
          "bounds must be positive");
  const double delta = delta_cfg > 0.0 ? delta_cfg : 0.01 * total;

  const ExchangeEconomy econ_a(agents, total, cities, ExchangeMode::conserved,
                               0.0);
  const ExchangeEconomy econ_b(agents, total, cities, ExchangeMode::open, delta);
  const ExchangeRunResult res_a = run_exchange(econ_a, steps, state.seed);
  const ExchangeRunResult res_b = run_exchange(econ_b, steps, state.seed + 1);

  JsonValue comparisons = JsonValue::array();
  for (std::size_t i = 0; i < cities.size(); ++i) {
    state.write_output("compare_ab_city" + std::to_string(i) + "_a.csv",
                       res_a.histograms[i].to_csv());
    state.write_output("compare_ab_city" + std::to_string(i) + "_b.csv",
                       res_b.histograms[i].to_csv());
    const AbComparison cmp =
        compare_ab(res_a.histograms[i], res_b.histograms[i]);
    const double z = std::abs(cmp.beta_a - cmp.beta_b) / cmp.se;

    JsonValue row = JsonValue::object();
    row.set("city", static_cast<std::int64_t>(i));
    row.set("city_size", res_a.histograms[i].city_size);
    row.set("tv", cmp.tv);
    row.set("skl", cmp.skl);
    row.set("beta_a", cmp.beta_a);
    row.set("beta_b", cmp.beta_b);
    row.set("se", cmp.se);
    row.set("z", z);
    comparisons.push_back(std::move(row));

    state.check("tv_city" + std::to_string(i), cmp.tv < tv_bound,
                versus("TV", cmp.tv, "bound", tv_bound));
    state.check("rates_match_city" + std::to_string(i), z < z_bound,
                versus("z", z, "bound", z_bound));
  }

  JsonValue summary = JsonValue::object();
  summary.set("agents", agents);
  summary.set("total", total);
  summary.set("delta", delta);
  summary.set("steps", steps);
  summary.set("snapshots_a", res_a.snapshots_accepted);
  summary.set("snapshots_b", res_b.snapshots_accepted);
  summary.set("comparisons", std::move(comparisons));
  state.write_output("compare_ab.json", summary.dump() + "\n");

  check_city_rates(state, "conserved", cities, res_a.histograms,
                   static_cast<double>(agents) / total);
}

// ---------------------------------------------------------------------------
// Experiment catalogue.
// ---------------------------------------------------------------------------

struct ParamDoc {
  const char* key;
  const char* type;
  const char* value;  // default, as it would appear in the config
};

struct ExperimentEntry {
  const char* name;
  const char* anchor;
  std::uint64_t default_seed;
  std::vector<ParamDoc> params;
  void (*run)(ConfigReader&, RunState&);
};

const std::vector<ExperimentEntry>& experiments() {
  static const std::vector<ExperimentEntry> table = {
      {"conditional",
       "exact law of one summand of an independent pair given their total",
       0,
       {{"h", "number", "1"},
        {"x_shape", "number", "2"},
        {"x_scale", "number", "1"},
        {"y_shape", "number", "3"},
        {"y_scale", "number", "1"},
        {"points", "integer", "2048"},
        {"error_bound", "number", "1e-6"}},
       run_conditional},
      {"limit-law",
       "tilted-subsystem form of the conditional law; log ratio linear with "
       "slope set by the bath log-slope",
       0,
       {{"h", "number", "2"},
        {"system_rate", "number", "1"},
        {"bath_shape", "number", "5"},
        {"bath_scale", "number", "1"},
        {"points", "integer", "2048"}},
       run_limit_law},
      {"convergence",
       "KL gap between the exact conditional and its tilted form as the "
       "subsystem weight shrinks",
       7,
       {{"h", "number", "4"},
        {"n", "integer array", "[10, 30, 100, 300, 1000]"},
        {"system_rate", "number", "1"},
        {"bath_shape", "number", "5"},
        {"bath_scale", "number", "1"},
        {"slope_bound", "number", "-0.4667"}},
       run_convergence},
      {"counting",
       "count conditioned on a large total follows the tilted prior; a "
       "factorial prior tilts to a truncated Poisson law",
       0,
       {{"prior_mean", "number", "2"},
        {"bath_rate", "number", "3"},
        {"n", "integer", "1000"},
        {"lambda", "number", "3"},
        {"tv_bound", "number", "0.01"}},
       run_counting},
      {"gibbs-paradox",
       "sub-volume occupancy under unlabeled versus labeled counting "
       "conventions",
       0,
       {{"ratio", "number", "0.5"}, {"total", "integer", "4"}},
       run_gibbs_paradox},
      {"colonies",
       "migration-coupled birth-death colonies; the small colony's "
       "total-conditioned law follows the tilted prediction",
       1,
       {{"birth", "number array", "[0.4, 20]"},
        {"death", "number array", "[1, 1]"},
        {"migration", "number array", "[0.05, 0.001]"},
        {"initial", "integer array", "[0, 20]"},
        {"t_max", "number", "25000"},
        {"replicas", "integer", "1"},
        {"target_total", "integer", "-1 (model default)"},
        {"tv_bound", "number", "0.05"}},
       run_colonies},
      {"shell",
       "uniform energy-shell samples drive the subsystem energy law to the "
       "canonical exponential as the bath grows",
       2,
       {{"family", "string", "harmonic"},
        {"n1", "integer", "2"},
        {"n2", "integer", "200"},
        {"h", "number", "100"},
        {"delta", "number", "0.1"},
        {"count", "integer", "100000"},
        {"sweep", "integer array", "[20, 50, 200]"},
        {"ks_bound", "number", "0.02"},
        {"sampler", "string", "auto"}},
       run_shell},
      {"legendre",
       "maximum-term free energy versus the full partition integral; the gap "
       "per volume vanishes with volume",
       0,
       {{"family", "string", "ideal_gas"},
        {"c", "number", "1.5"},
        {"beta", "number", "1"},
        {"volumes", "number array", "[100, 1000, 10000]"},
        {"gap_bound", "number", "0.01"},
        {"gap_bound_volume", "number", "1000"}},
       run_legendre},
      {"fluctuation",
       "variance product of a density and its log-slope is bounded by the "
       "boundary term; tight for the exponential",
       42,
       {{"family", "string", "exponential"},
        {"lambda", "number", "1 (exponential only)"},
        {"shapes", "number array", "[2, 3, 5] (gamma only)"},
        {"scales", "number array", "[0.5, 1, 2] (gamma only)"}},
       run_fluctuation},
      {"kl-bound",
       "relative entropy against an unnormalized comparison is at least "
       "minus the log of its mass",
       777,
       {{"pairs", "integer", "50"}},
       run_kl_bound},
      {"exchange",
       "pairwise-exchange economy: tracked cities develop exponential "
       "holdings at the per-agent rate",
       2024,
       {{"agents", "integer", "10000"},
        {"total", "number", "10000"},
        {"mode", "string", "conserved"},
        {"delta", "number", "-1 (auto: 0.01 x total in open mode)"},
        {"steps", "integer", "1112000000"},
        {"cities", "index arrays", "[[0], block at N/10, block at N/2]"}},
       run_exchange_experiment},
      {"compare-ab",
       "conserved-total run versus total-selected open run: city histograms "
       "and rates must agree",
       2024,
       {{"agents", "integer", "10000"},
        {"total", "number", "10000"},
        {"delta", "number", "-1 (auto: 0.01 x total)"},
        {"steps", "integer", "1112000000"},
        {"cities", "index arrays", "[[0], block at N/10, block at N/2]"},
        {"tv_bound", "number", "0.02"},
        {"z_bound", "number", "3"}},
       run_compare_ab},
  };
  return table;
}

const ExperimentEntry* find_experiment(const std::string& name) {
  for (const auto& e : experiments())
    if (name == e.name) return &e;
  return nullptr;
}

std::filesystem::path resolve_out_dir(const std::string& override_dir,
                                      const json& cfg) {
  if (!override_dir.empty()) return override_dir;
  if (cfg.is_object() && cfg.contains("out") && cfg.at("out").is_string())
    return cfg.at("out").get<std::string>();
  if (const char* env = std::getenv("GIBBSLAB_OUT"); env && *env)
    return env;
  return "gibbslab_out";
}

}  // namespace

RunOutcome run_experiment_config(const std::string& config_json,
                                 const std::string& out_dir_override,
                                 std::optional<std::uint64_t> seed_override,
                                 int workers) {
  const auto start = std::chrono::steady_clock::now();

  RunOutcome outcome;
  RunState state;
  state.workers = std::max(1, workers);

  std::string experiment_name;
  std::string status = "pass";
  std::string error_message;

  json cfg = json::parse(config_json, nullptr, /*allow_exceptions=*/false);
  try {
    require(!cfg.is_discarded(), ErrorCode::config_error,
            "config is not valid JSON");
    require(cfg.is_object(), ErrorCode::config_error,
            "config must be a JSON object");
    require(cfg.contains("experiment") && cfg.at("experiment").is_string(),
            ErrorCode::config_error,
            "config must carry an 'experiment' name");
    experiment_name = cfg.at("experiment").get<std::string>();

    const ExperimentEntry* entry = find_experiment(experiment_name);
    if (entry == nullptr) {
      std::string names;
      for (const auto& e : experiments())
        names += names.empty() ? e.name : std::string(", ") + e.name;
      raise(ErrorCode::config_error, "unknown experiment '" + experiment_name +
                                         "'; available: " + names);
    }

    state.seed = entry->default_seed;
    if (cfg.contains("seed")) {
      const json& s = cfg.at("seed");
      require(s.is_number_integer() && s.get<std::int64_t>() >= 0,
              ErrorCode::config_error, "'seed' must be a nonnegative integer");
      state.seed = s.get<std::uint64_t>();
    }
    if (seed_override) state.seed = *seed_override;

    state.dir = resolve_out_dir(out_dir_override, cfg);
    std::filesystem::create_directories(state.dir);

    state.resolved.set("experiment", experiment_name);
    state.resolved.set("seed", state.seed);

    ConfigReader reader(cfg, experiment_name, state);
    entry->run(reader, state);
    status = state.all_passed() ? "pass" : "assertion_failure";
  } catch (const Error& e) {
    status = e.code() == ErrorCode::config_error ? "config_error"
                                                 : "runtime_error";
    error_message = std::string(error_code_name(e.code())) + ": " + e.what();
  } catch (const std::exception& e) {
    status = "runtime_error";
    error_message = e.what();
  }

  if (status == "pass") {
    outcome.exit_code = kRunPass;
  } else if (status == "assertion_failure") {
    outcome.exit_code = kRunAssertionFailure;
  } else if (status == "config_error") {
    outcome.exit_code = kRunConfigError;
  } else {
    outcome.exit_code = kRunRuntimeError;
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  JsonValue manifest = JsonValue::object();
  manifest.set("experiment", experiment_name);
  manifest.set("version", "0.1.0");
  manifest.set("rng", Philox::algorithm_name);
  manifest.set("seed", state.seed);
  manifest.set("workers", state.workers);
  manifest.set("config", state.resolved);
  JsonValue outs = JsonValue::array();
  for (const auto& name : state.outputs)
    outs.push_back(JsonValue::string(name));
  manifest.set("outputs", std::move(outs));
  JsonValue asserts = JsonValue::array();
  for (const auto& a : state.assertions) {
    JsonValue row = JsonValue::object();
    row.set("name", a.name);
    row.set("passed", a.passed);
    row.set("detail", a.detail);
    asserts.push_back(std::move(row));
  }
  manifest.set("assertions", std::move(asserts));
  manifest.set("status", status);
  manifest.set("error",
               error_message.empty() ? JsonValue()
                                     : JsonValue::string(error_message));
  manifest.set("duration_seconds", seconds);

  outcome.manifest_json = manifest.dump() + "\n";

  // Best effort: the manifest is written even for failed runs, but a run
  // that could not resolve or create its directory still returns the
  // manifest text in memory.
  try {
    std::filesystem::path dir = state.dir;
    if (dir.empty()) {
      dir = resolve_out_dir(out_dir_override, cfg);
      std::filesystem::create_directories(dir);
    }
    const std::filesystem::path path = dir / "run_manifest.json";
    write_text_file(path.string(), outcome.manifest_json);
    outcome.manifest_path = path.string();
  } catch (const std::exception&) {
    outcome.manifest_path.clear();
  }

  return outcome;
}

std::string list_experiments_text() {
  std::string out = "experiments (" +
                    std::to_string(experiments().size()) + "):\n\n";
  for (const auto& e : experiments()) {
    out += e.name;
    out += "\n  demonstrates: ";
    out += e.anchor;
    out += "\n  parameters: ";
    bool first = true;
    for (const auto& p : e.params) {
      if (!first) out += ", ";
      out += std::string(p.key) + "=" + p.value;
      first = false;
    }
    out += first ? "(none)" : "";
    out += "\n  common keys: seed (integer, default " +
           std::to_string(e.default_seed) + "), out (string)\n\n";
  }
  return out;
}

std::string list_experiments_json() {
  JsonValue root = JsonValue::object();
  JsonValue arr = JsonValue::array();
  for (const auto& e : experiments()) {
    JsonValue row = JsonValue::object();
    row.set("name", e.name);
    row.set("demonstrates", e.anchor);
    row.set("default_seed", e.default_seed);
    JsonValue params = JsonValue::array();
    for (const auto& p : e.params) {
      JsonValue pr = JsonValue::object();
      pr.set("name", p.key);
      pr.set("type", p.type);
      pr.set("default", p.value);
      params.push_back(std::move(pr));
    }
    row.set("parameters", std::move(params));
    arr.push_back(std::move(row));
  }
  root.set("experiments", std::move(arr));
  return root.dump() + "\n";
}

}  // namespace gibbslab
