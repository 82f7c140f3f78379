#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gibbslab/error.hpp"
#include "gibbslab/jsonio.hpp"
#include "gibbslab/numerics.hpp"

using namespace gibbslab;

TEST_CASE("adaptive quadrature reproduces closed-form integrals") {
  CHECK(adaptive_simpson([](double x) { return x * x; }, 0.0, 1.0) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(adaptive_simpson([](double x) { return std::sin(x); }, 0.0,
                         3.14159265358979323846) == doctest::Approx(2.0).epsilon(1e-12));
  // Integrable log singularity kept off the endpoint by a tiny margin.
  CHECK(adaptive_simpson([](double x) { return -std::log(x); }, 1e-12, 1.0) ==
        doctest::Approx(1.0).epsilon(1e-8));
  // A narrow bump the first coarse panels cannot see.
  const double bump = adaptive_simpson(
      [](double x) {
        const double t = (x - 0.3) / 0.001;
        return std::exp(-0.5 * t * t);
      },
      0.0, 1.0);
  CHECK(bump == doctest::Approx(0.001 * std::sqrt(2.0 * 3.14159265358979323846))
                    .epsilon(1e-6));
}

TEST_CASE("quadrature rejects non-finite integrands") {
  CHECK_THROWS_AS(adaptive_simpson([](double x) { return 1.0 / x; }, 0.0, 1.0), Error);
  try {
    adaptive_simpson([](double) { return std::nan(""); }, 0.0, 1.0);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_integrable);
  }
}

TEST_CASE("trapezoid rule on a uniform grid") {
  std::vector<double> values = {0.0, 1.0, 4.0, 9.0};  // x^2 at 0,1,2,3
  CHECK(trapezoid_uniform(values, 1.0) == doctest::Approx(9.5));
}

TEST_CASE("golden-section search finds a quadratic maximum") {
  const double x =
      golden_section_max([](double t) { return -(t - 2.0) * (t - 2.0); }, 0.0, 5.0, 1e-10);
  CHECK(x == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("bisection finds the square root of two") {
  const double r = bisect([](double t) { return t * t - 2.0; }, 0.0, 2.0, 1e-14);
  CHECK(r == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(bisect([](double t) { return t * t + 1.0; }, 0.0, 2.0, 1e-12), Error);
}

TEST_CASE("log-sum-exp is stable far below the exponent range") {
  CHECK(log_sum_exp({std::log(2.0), std::log(3.0)}) ==
        doctest::Approx(std::log(5.0)).epsilon(1e-14));
  CHECK(log_sum_exp({-1000.0, -1000.0}) ==
        doctest::Approx(-1000.0 + std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("line fit recovers exact linear data") {
  std::vector<double> x = {1.0, 2.0, 3.0, 4.0, 5.0};
  std::vector<double> y;
  for (double xi : x) y.push_back(3.0 * xi - 7.0);
  const LineFit fit = fit_line(x, y);
  CHECK(fit.slope == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(-7.0).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.residual < 1e-10);
}

TEST_CASE("weighted fit reports the standard error of the slope") {
  // Unit weights: se = 1/sqrt(sum (x - mean)^2) = 1/sqrt(10).
  std::vector<double> x = {1.0, 2.0, 3.0, 4.0, 5.0};
  std::vector<double> y = {2.0, 4.0, 6.0, 8.0, 10.0};
  std::vector<double> w(5, 1.0);
  const LineFit fit = fit_line_weighted(x, y, w);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.slope_se == doctest::Approx(1.0 / std::sqrt(10.0)).epsilon(1e-12));
}

TEST_CASE("KS distance against the uniform CDF, worked example") {
  std::vector<double> sample = {0.2, 0.4, 0.6, 0.8};
  const double d = ks_statistic(sample, [](double x) { return x; });
  CHECK(d == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("regularized incomplete gamma against frozen references") {
  CHECK(gamma_p(5.0, 4.0) == doctest::Approx(0.37116306482012648).epsilon(1e-12));
  CHECK(gamma_q(0.5, 1.2345) == doctest::Approx(0.11611177626720800).epsilon(1e-12));
  CHECK(gamma_p(1.0, 2.0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-13));
  CHECK(gamma_p(2.0, 3.0) + gamma_q(2.0, 3.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gamma_p(0.5, 1.44) == doctest::Approx(std::erf(1.2)).epsilon(1e-12));
}

TEST_CASE("normal CDF and quantile invert each other") {
  CHECK(normal_cdf(1.2) == doctest::Approx(0.88493032977829173).epsilon(1e-13));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  for (double p : {0.001, 0.01, 0.2, 0.5, 0.8, 0.99, 0.999}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
  }
}

TEST_CASE("chi-square survival function hits the textbook critical value") {
  CHECK(chi_square_sf(3.841458820694124, 1.0) == doctest::Approx(0.05).epsilon(1e-10));
}

TEST_CASE("JSON writer emits deterministic insertion-ordered text") {
  JsonValue root = JsonValue::object();
  root.set("b", 2);
  root.set("a", 1.5);
  root.set("name", "x\"y");
  JsonValue arr = JsonValue::array();
  arr.push_back(JsonValue::integer(1));
  arr.push_back(JsonValue::real(0.1));
  root.set("list", std::move(arr));
  const std::string text = root.dump();
  CHECK(text.find("\"b\"") < text.find("\"a\""));
  CHECK(text.find("\"a\"") < text.find("\"name\""));
  CHECK(text.find("x\\\"y") != std::string::npos);
  CHECK(text.find("0.10000000000000001") != std::string::npos);
}

TEST_CASE("doubles print with 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5) == "-2.5");
}

TEST_CASE("CSV writer emits a header and full-precision rows") {
  CsvWriter csv({"x", "y"});
  csv.add_row({1.0, 0.1});
  const std::string text = csv.dump();
  CHECK(text.find("x,y\n") == 0);
  CHECK(text.find("1,0.10000000000000001") != std::string::npos);
}
