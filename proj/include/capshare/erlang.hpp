#pragma once

#include "capshare/model.hpp"

namespace capshare {

// Upper incomplete gamma Gamma(s, x) = integral_x^inf y^(s-1) e^(-y) dy.
// Throws std::domain_error for s <= 0, x < 0 or non-finite input.
double upper_incomplete_gamma(double s, double x);

// ln Gamma(s, x); safe where the plain value overflows double range.
double log_upper_incomplete_gamma(double s, double x);

// First Erlang (loss) formula B(v, A) via the stable recursion
// B_0 = 1, B_k = A B_{k-1} / (k + A B_{k-1}).
double erlang_b_integer(double offered_load, int servers);

// Continuous-server extension E(A, v) = A^v e^(-A) / Gamma(v+1, A).
// Coincides with erlang_b_integer at integer v.
double erlang_b_fractional(double offered_load, double servers);

struct ErlangBResult {
  double blocking = 0.0;
  double load = 0.0;     // A handed to E(A, v)
  double servers = 0.0;  // v handed to E(A, v)
};

// Loss probability approximation for a capacity-sharing config: reduce the
// config with offered_loads, then evaluate E(A, v). Depends on the service
// distributions only through their means.
ErlangBResult approximate_loss(const SystemConfig& config);

}  // namespace capshare
