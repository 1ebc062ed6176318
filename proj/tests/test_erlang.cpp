#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "capshare/erlang.hpp"

using namespace capshare;

namespace {

// Independent oracle: adaptive Simpson quadrature of y^(s-1) e^(-y) on [x, x+80]
// (the tail beyond is below 1e-25 for the ranges probed here). Shares no code
// with the series/continued-fraction implementation under test.
double simpson(double (*f)(double, double), double s, double a, double b) {
  const double c = 0.5 * (a + b);
  return (b - a) / 6.0 * (f(s, a) + 4.0 * f(s, c) + f(s, b));
}

double integrand(double s, double y) { return std::pow(y, s - 1.0) * std::exp(-y); }

double adaptive(double s, double a, double b, double whole, double tol, int depth) {
  const double c = 0.5 * (a + b);
  const double left = simpson(integrand, s, a, c);
  const double right = simpson(integrand, s, c, b);
  if (depth > 40 || std::fabs(left + right - whole) < 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive(s, a, c, left, tol / 2.0, depth + 1) +
         adaptive(s, c, b, right, tol / 2.0, depth + 1);
}

double quadrature_upper_gamma(double s, double x) {
  const double b = x + 80.0;
  return adaptive(s, x, b, simpson(integrand, s, x, b), 1e-14, 0);
}

}  // namespace

TEST_CASE("upper incomplete gamma against the quadrature oracle") {
  for (double s : {0.5, 1.0, 2.5, 7.0, 20.0}) {
    for (double x : {0.25, 0.75, 1.0, 5.0, 19.5}) {
      const double via_quadrature = quadrature_upper_gamma(s, x);
      const double via_impl = upper_incomplete_gamma(s, x);
      // the quadrature itself carries ~1e-13 absolute error, hence the floor
      CHECK(std::fabs(via_impl - via_quadrature) <=
            1e-9 * via_quadrature + 1e-12);
    }
  }
}

TEST_CASE("upper incomplete gamma anchors") {
  // closed form at s = 1
  for (double x : {0.0, 1.0, 5.0}) {
    CHECK(upper_incomplete_gamma(1.0, x) ==
          doctest::Approx(std::exp(-x)).epsilon(1e-12));
  }
  // complete gamma at x = 0 and two frozen high-precision references
  CHECK(upper_incomplete_gamma(2.5, 0.0) ==
        doctest::Approx(1.3293403881791370).epsilon(1e-12));
  CHECK(upper_incomplete_gamma(2.5, 1.0) ==
        doctest::Approx(1.1288027918891024).epsilon(1e-12));
  CHECK(upper_incomplete_gamma(2.5, 0.75) ==
        doctest::Approx(1.2137805817010993).epsilon(1e-12));
  CHECK(upper_incomplete_gamma(5.0, 1.0) ==
        doctest::Approx(23.912163676143751).epsilon(1e-12));
  CHECK(upper_incomplete_gamma(0.5, 2.0) ==
        doctest::Approx(0.080647117960317691).epsilon(1e-12));
  // large-argument values that exercise the log-space path
  CHECK(upper_incomplete_gamma(30.5, 20.0) ==
        doctest::Approx(4.7397127948725368e31).epsilon(1e-11));
  CHECK(upper_incomplete_gamma(150.0, 180.0) ==
        doctest::Approx(3.7746874972144662e258).epsilon(1e-11));
  CHECK(log_upper_incomplete_gamma(200.0, 0.0) ==
        doctest::Approx(857.93366982585744).epsilon(1e-13));
  CHECK(log_upper_incomplete_gamma(200.0, 700.0) ==
        doctest::Approx(603.99867277145540).epsilon(1e-13));
}

TEST_CASE("upper incomplete gamma rejects bad domains") {
  CHECK_THROWS_AS(upper_incomplete_gamma(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(upper_incomplete_gamma(-2.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(upper_incomplete_gamma(1.0, -0.1), std::domain_error);
  CHECK_THROWS_AS(upper_incomplete_gamma(std::nan(""), 1.0), std::domain_error);
  CHECK_THROWS_AS(
      upper_incomplete_gamma(1.0, std::numeric_limits<double>::infinity()),
      std::domain_error);
}

TEST_CASE("gamma recurrence holds on a random grid") {
  std::mt19937 gen(424242);
  std::uniform_real_distribution<double> s_dist(0.1, 60.0);
  std::uniform_real_distribution<double> x_dist(0.0, 120.0);
  for (int i = 0; i < 500; ++i) {
    const double s = s_dist(gen);
    const double x = x_dist(gen);
    const double lhs = upper_incomplete_gamma(s + 1.0, x);
    const double rhs =
        s * upper_incomplete_gamma(s, x) + std::exp(s * std::log(x) - x);
    CHECK(std::fabs(lhs - rhs) <= 1e-9 * lhs);
  }
}

TEST_CASE("integer Erlang B recursion") {
  CHECK(erlang_b_integer(2.0, 3) == doctest::Approx(4.0 / 19.0).epsilon(1e-14));
  CHECK(erlang_b_integer(0.3, 0) == 1.0);
  CHECK(erlang_b_integer(123.0, 0) == 1.0);
  CHECK(erlang_b_integer(1.0, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(erlang_b_integer(0.0, 3), std::domain_error);
  CHECK_THROWS_AS(erlang_b_integer(-1.0, 3), std::domain_error);
  CHECK_THROWS_AS(erlang_b_integer(1.0, -1), std::domain_error);
}

TEST_CASE("fractional Erlang B frozen references") {
  CHECK(erlang_b_fractional(1.0, 1.5) ==
        doctest::Approx(0.32590231333125914).epsilon(1e-10));
  CHECK(erlang_b_fractional(0.75, 1.5) ==
        doctest::Approx(0.25277309635227341).epsilon(1e-10));
  CHECK(erlang_b_fractional(2.25, 2.5) ==
        doctest::Approx(0.33415854515461337).epsilon(1e-10));
  CHECK(erlang_b_fractional(3.75, 3.125) ==
        doctest::Approx(0.40796796681904273).epsilon(1e-10));
  CHECK(erlang_b_fractional(4.0, 5.5) ==
        doctest::Approx(0.15445282491992947).epsilon(1e-10));
  CHECK(erlang_b_fractional(5.0 / 6.0, 1.25) ==
        doctest::Approx(0.35881502843286134).epsilon(1e-10));
  CHECK(erlang_b_fractional(7.7, 0.0) == 1.0);
  CHECK_THROWS_AS(erlang_b_fractional(1.0, -0.5), std::domain_error);
  CHECK_THROWS_AS(erlang_b_fractional(-1.0, 1.0), std::domain_error);
}

TEST_CASE("fractional formula agrees with the recursion at integers") {
  for (double load : {0.1, 1.0, 5.0, 20.0}) {
    for (int servers = 0; servers <= 50; ++servers) {
      const double reference = erlang_b_integer(load, servers);
      const double fractional = erlang_b_fractional(load, servers);
      CHECK(std::fabs(fractional - reference) <= 1e-10 * reference);
    }
  }
}

TEST_CASE("fractional Erlang B is monotone and bounded on a grid") {
  const double step = 0.25;
  for (double load = step; load <= 30.0 + 1e-9; load += step) {
    for (double servers = 0.0; servers <= 40.0 + 1e-9; servers += step) {
      const double here = erlang_b_fractional(load, servers);
      CHECK(here > 0.0);
      CHECK(here <= 1.0);
      if (servers > 0.0) {  // E(A, 0) is identically 1
        CHECK(erlang_b_fractional(load + step, servers) > here);
      }
      CHECK(erlang_b_fractional(load, servers + step) < here);
    }
  }
}

TEST_CASE("approximate loss on reference configurations") {
  const SystemConfig row2 = {2,
                             {{2.0, 1, ServiceLengthDistribution::exponential(1.0 / 3)},
                              {1.0, 2, ServiceLengthDistribution::exponential(1.0 / 3)}}};
  const ErlangBResult result = approximate_loss(row2);
  CHECK(result.load == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(result.servers == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(result.blocking == doctest::Approx(0.32590231333125914).epsilon(1e-10));

  // one class occupying the whole system reduces to one-server Erlang B
  const SystemConfig single = {2, {{2.0, 2, ServiceLengthDistribution::exponential(0.5)}}};
  CHECK(approximate_loss(single).blocking == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("approximation ignores the distribution shape given the mean") {
  SystemConfig config = {3,
                         {{1.0, 2, ServiceLengthDistribution::exponential(0.5)},
                          {1.0, 3, ServiceLengthDistribution::exponential(1.0 / 3)}}};
  const double base = approximate_loss(config).blocking;
  config.classes[1].service = ServiceLengthDistribution::erlang2(1.0 / 3);
  CHECK(approximate_loss(config).blocking == base);
  config.classes[1].service = ServiceLengthDistribution::balanced_hyperexp2(1.0 / 3, 9.0);
  CHECK(approximate_loss(config).blocking == base);
  config.classes[0].service = ServiceLengthDistribution::erlang2(0.5);
  CHECK(approximate_loss(config).blocking == base);
}
