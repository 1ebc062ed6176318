#include "capshare/erlang.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace capshare {

namespace {

constexpr int kMaxIterations = 500;
constexpr double kConvergence = 1e-15;

void check_domain(double s, double x) {
  if (!std::isfinite(s) || !std::isfinite(x) || s <= 0.0 || x < 0.0) {
    throw std::domain_error("upper_incomplete_gamma requires finite s > 0, x >= 0 (got s=" +
                            std::to_string(s) + ", x=" + std::to_string(x) + ")");
  }
}

// Regularized lower incomplete gamma P(s, x) by its power series; converges
// fast for x < s + 1.
double lower_regularized_series(double s, double x) {
  double ap = s;
  double term = 1.0 / s;
  double sum = term;
  for (int i = 0; i < kMaxIterations; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kConvergence) {
      return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
    }
  }
  throw std::runtime_error("incomplete gamma series did not converge");
}

// Modified Lentz continued fraction for x >= s + 1:
// Gamma(s, x) = e^(-x) x^s * h(s, x). Returns ln h.
double log_continued_fraction(double s, double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kConvergence) {
      return std::log(h);
    }
  }
  throw std::runtime_error("incomplete gamma continued fraction did not converge");
}

}  // namespace

double log_upper_incomplete_gamma(double s, double x) {
  check_domain(s, x);
  if (x == 0.0) {
    return std::lgamma(s);
  }
  if (x < s + 1.0) {
    const double p = lower_regularized_series(s, x);
    return std::lgamma(s) + std::log1p(-p);
  }
  return -x + s * std::log(x) + log_continued_fraction(s, x);
}

double upper_incomplete_gamma(double s, double x) {
  return std::exp(log_upper_incomplete_gamma(s, x));
}

double erlang_b_integer(double offered_load, int servers) {
  if (!std::isfinite(offered_load) || offered_load <= 0.0) {
    throw std::domain_error("erlang_b_integer requires finite offered load > 0");
  }
  if (servers < 0) {
    throw std::domain_error("erlang_b_integer requires servers >= 0");
  }
  double blocking = 1.0;
  for (int k = 1; k <= servers; ++k) {
    blocking = offered_load * blocking / (k + offered_load * blocking);
  }
  return blocking;
}

double erlang_b_fractional(double offered_load, double servers) {
  if (!std::isfinite(offered_load) || offered_load <= 0.0) {
    throw std::domain_error("erlang_b_fractional requires finite offered load > 0");
  }
  if (!std::isfinite(servers) || servers < 0.0) {
    throw std::domain_error("erlang_b_fractional requires finite servers >= 0");
  }
  if (servers == 0.0) {
    return 1.0;  // Gamma(1, A) = e^(-A) cancels the numerator
  }
  const double log_blocking = servers * std::log(offered_load) - offered_load -
                              log_upper_incomplete_gamma(servers + 1.0, offered_load);
  return std::min(std::exp(log_blocking), 1.0);
}

ErlangBResult approximate_loss(const SystemConfig& config) {
  const LoadSummary loads = offered_loads(config);
  ErlangBResult result;
  result.load = loads.total_load;
  result.servers = loads.equivalent_servers;
  result.blocking = erlang_b_fractional(result.load, result.servers);
  return result;
}

}  // namespace capshare
