#pragma once

#include <cstdint>
#include <iosfwd>

#include "capshare/model.hpp"

namespace capshare {

class InvalidParameters : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SimParams {
  long long arrivals_per_replication = 1'000'000;
  int replications = 20;
  double warmup_fraction = 0.1;  // leading fraction of arrivals discarded
  std::uint64_t seed = 1;
  bool parallel = true;           // replications on worker threads
  bool check_invariants = false;  // per-event conservation checks
  std::ostream* trace = nullptr;  // event trace (forces serial execution)
};

struct LossEstimate {
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::vector<double> per_class;         // mean per-class loss fraction
  std::vector<double> per_class_se;      // standard error over replications
  int replications = 0;
  long long arrivals_total = 0;          // counted (post warm-up) arrivals
  double time_average_blocked = 0.0;     // fraction of time with idle = 0
  std::vector<double> replication_means;
};

// Channel allocation state machine: full seizure when enough channels are
// idle, degraded admission on a partial remainder, reallocation of freed
// channels into the degraded request on departure. At most one degraded
// request can exist, and only while no channel is idle.
class ChannelPool {
 public:
  explicit ChannelPool(const SystemConfig& config);

  struct Admission {
    bool accepted = false;
    std::uint64_t id = 0;
    int allocated = 0;
  };
  Admission arrival(int class_index);

  struct Reallocation {
    std::uint64_t degraded_id = 0;
    int degraded_gain = 0;       // channels moved into the degraded request
    bool promoted_to_full = false;
    int to_idle = 0;             // channels returned to the idle pool
  };
  Reallocation depart(std::uint64_t id);

  int idle() const { return idle_; }
  int active_count() const { return active_count_; }
  int total_allocated() const { return total_allocated_; }
  std::optional<std::uint64_t> degraded() const { return degraded_; }
  bool contains(std::uint64_t id) const;
  int allocated(std::uint64_t id) const;
  int class_of(std::uint64_t id) const;

  // Request ids embed a reused slot index plus a generation stamp; the slot
  // index is stable for the lifetime of one request.
  static std::size_t slot_index(std::uint64_t id) { return id & 0xffffffffu; }
  std::size_t slot_count() const { return slots_.size(); }

 private:
  struct Slot {
    int class_index = 0;
    int allocated = 0;
    std::uint32_t generation = 0;
    bool active = false;
  };
  const Slot* find(std::uint64_t id) const;

  std::vector<int> channels_required_;
  std::vector<Slot> slots_;
  std::vector<std::uint32_t> free_slots_;
  std::optional<std::uint64_t> degraded_;
  int idle_ = 0;
  int total_allocated_ = 0;
  int active_count_ = 0;
};

// Monte Carlo estimate of the loss probability: independent replications,
// per-replication loss fractions over post-warm-up arrivals, Student-t 95%
// confidence interval over the replication means. Deterministic for a fixed
// (config, params) pair, including under parallel execution.
LossEstimate run_simulation(const SystemConfig& config, const SimParams& params);

}  // namespace capshare
