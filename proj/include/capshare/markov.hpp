#pragma once

#include <cstdint>
#include <iosfwd>

#include "capshare/model.hpp"

namespace capshare {

struct DegradedRequest {
  int class_index = 0;
  int phase_index = 0;
  int allocated = 0;  // k channels held, 1 <= k < d of the class

  bool operator==(const DegradedRequest&) const = default;
};

// Canonical chain state: per-(class, phase) counts of requests served at rate
// 1, plus at most one degraded request. Requests within a (class, phase) pair
// are interchangeable, so only counts are kept.
struct MarkovState {
  std::vector<std::uint16_t> full_counts;  // flattened by GeneratorMatrix::phase_offset
  std::optional<DegradedRequest> degraded;

  bool operator==(const MarkovState&) const = default;
};

class StateSpaceTooLarge : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class SingularSystem : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GeneratorMatrix {
  std::vector<MarkovState> states;  // index 0 is the empty state
  std::vector<double> rates;        // dense row-major generator, zero row sums
  std::vector<int> phase_offset;    // class index -> first flattened phase slot
  std::vector<std::vector<ServicePhase>> class_phases;
  std::vector<int> channels_required;  // d per class
  int channels = 0;                    // m

  std::size_t size() const { return states.size(); }
  double rate(std::size_t from, std::size_t to) const {
    return rates[from * states.size() + to];
  }
  int occupied(const MarkovState& state) const;
  int idle(const MarkovState& state) const { return channels - occupied(state); }
};

// Breadth-first enumeration of all states reachable from the empty system
// under the arrival / phase-advance / completion-with-reallocation rules.
// Throws StateSpaceTooLarge when the enumeration exceeds max_states.
GeneratorMatrix build_state_space(const SystemConfig& config,
                                  std::size_t max_states = 1'000'000);

// Solves pi Q = 0, sum(pi) = 1 by replacing one balance equation with the
// normalization row and factoring with partial pivoting. The residual
// ||pi Q||_inf must come out <= 1e-10, otherwise SingularSystem is thrown.
std::vector<double> stationary_distribution(const GeneratorMatrix& gen);

// P(idle = 0) under the stationary distribution. Arrivals are Poisson, so by
// PASTA this is the loss probability of every class: a request of any class
// is rejected exactly when no channel is idle.
double loss_probability_exact(const SystemConfig& config,
                              std::size_t max_states = 1'000'000);

// Plain-text adjacency listing, one state per line: counts, degraded
// descriptor, idle count, outgoing rates.
void dump_chain(const GeneratorMatrix& gen, std::ostream& out);

}  // namespace capshare
