#include "capshare/simulate.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <queue>
#include <random>
#include <thread>

namespace capshare {

namespace {

std::uint64_t make_id(std::uint32_t slot, std::uint32_t generation) {
  return (static_cast<std::uint64_t>(generation) << 32) | slot;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, int replication) {
  std::uint64_t state = seed ^ (0x9e3779b97f4a7c15ull * (replication + 1u));
  splitmix64(state);
  return splitmix64(state);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() {  // [0, 1), 53 bits
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  std::mt19937_64 engine_;
};

struct ClassRuntime {
  DistKind kind;
  double lambda;
  int d;
  double p1;  // hyperexponential branch probability
  double r1;
  double r2;
};

double sample_length(const ClassRuntime& cls, Rng& rng) {
  switch (cls.kind) {
    case DistKind::Exponential:
      return rng.exponential(cls.r1);
    case DistKind::Erlang2:
      return rng.exponential(cls.r1) + rng.exponential(cls.r1);
    case DistKind::BalancedHyperexp2:
      return rng.uniform() < cls.p1 ? rng.exponential(cls.r1)
                                    : rng.exponential(cls.r2);
  }
  return 0.0;
}

struct Event {
  double time;
  std::uint64_t seq;  // deterministic tie-break for equal times
  enum Kind : std::uint8_t { Arrival, Completion } kind;
  int class_index;
  std::uint64_t request_id;
  std::uint32_t version;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

struct ReplicationResult {
  long long counted_arrivals = 0;
  long long counted_losses = 0;
  std::vector<long long> class_arrivals;
  std::vector<long long> class_losses;
  double loss_fraction = 0.0;
  double time_average_blocked = 0.0;
  long long events = 0;
};

// Per-request service-progress bookkeeping. remaining is the unit-rate work
// left at time last_update; it only needs refreshing when the allocation
// changes, since the rate is constant in between.
struct WorkState {
  double remaining = 0.0;
  double last_update = 0.0;
  std::uint32_t version = 0;
};

class Engine {
 public:
  Engine(const SystemConfig& config, long long arrivals, double warmup_fraction,
         std::uint64_t seed, bool check_invariants, std::ostream* trace)
      : pool_(config),
        rng_(seed),
        channels_(config.channels),
        arrivals_target_(arrivals),
        warmup_count_(static_cast<long long>(warmup_fraction * arrivals)),
        check_invariants_(check_invariants),
        trace_(trace) {
    for (const auto& cls : config.classes) {
      ClassRuntime rt{};
      rt.kind = cls.service.kind;
      rt.lambda = cls.arrival_rate;
      rt.d = cls.channels_required;
      const auto phases = phase_representation(cls.service);
      rt.p1 = phases[0].initial_prob;
      rt.r1 = phases[0].rate;
      rt.r2 = phases.size() > 1 ? phases[1].rate : phases[0].rate;
      classes_.push_back(rt);
    }
    result_.class_arrivals.assign(classes_.size(), 0);
    result_.class_losses.assign(classes_.size(), 0);
  }

  ReplicationResult run() {
    for (std::size_t i = 0; i < classes_.size(); ++i) {
      push_event({rng_.exponential(classes_[i].lambda), next_seq_++,
                  Event::Arrival, static_cast<int>(i), 0, 0});
    }
    long long arrival_count = 0;
    double clock = 0.0;
    double stats_start = 0.0;
    double blocked_time = 0.0;
    bool stats_active = warmup_count_ == 0;
    double last_time = 0.0;

    while (!events_.empty()) {
      const Event ev = events_.top();
      events_.pop();
      ++result_.events;
      if (stats_active && pool_.idle() == 0) {
        blocked_time += ev.time - last_time;
      }
      last_time = ev.time;
      clock = ev.time;

      if (ev.kind == Event::Arrival) {
        ++arrival_count;
        const bool counted = arrival_count > warmup_count_;
        const ClassRuntime& cls = classes_[ev.class_index];
        push_event({clock + rng_.exponential(cls.lambda), next_seq_++,
                    Event::Arrival, ev.class_index, 0, 0});

        const auto admission = pool_.arrival(ev.class_index);
        if (admission.accepted) {
          const double length = sample_length(cls, rng_);
          ensure_work_slots();
          WorkState& work = work_[ChannelPool::slot_index(admission.id)];
          work.remaining = length;
          work.last_update = clock;
          ++work.version;
          push_event({clock + length * cls.d / admission.allocated, next_seq_++,
                      Event::Completion, ev.class_index, admission.id,
                      work.version});
          trace_line(clock, "arrival", ev.class_index, admission.allocated);
        } else {
          if (counted) ++result_.counted_losses;
          if (counted) ++result_.class_losses[ev.class_index];
          trace_line(clock, "loss", ev.class_index, 0);
        }
        if (counted) {
          ++result_.counted_arrivals;
          ++result_.class_arrivals[ev.class_index];
        }
        if (check_invariants_) check_state();
        if (!stats_active && arrival_count == warmup_count_) {
          stats_active = true;
          stats_start = clock;
        }
        if (arrival_count == arrivals_target_) break;
      } else {
        if (!pool_.contains(ev.request_id)) continue;
        const std::size_t slot = ChannelPool::slot_index(ev.request_id);
        if (work_[slot].version != ev.version) continue;  // rescheduled

        WorkState& work = work_[slot];
        const ClassRuntime& cls = classes_[pool_.class_of(ev.request_id)];
        const int held = pool_.allocated(ev.request_id);
        work.remaining -= (clock - work.last_update) *
                          (static_cast<double>(held) / cls.d);
        work.last_update = clock;
        if (check_invariants_ && std::fabs(work.remaining) > 1e-9) {
          throw std::logic_error("service work drifted from the sampled length");
        }

        const auto realloc = pool_.depart(ev.request_id);
        trace_line(clock, "completion", ev.class_index, held);
        if (realloc.degraded_gain > 0) {
          reschedule_degraded(realloc, clock);
        }
        if (check_invariants_) check_state();
      }
    }

    result_.loss_fraction =
        result_.counted_arrivals > 0
            ? static_cast<double>(result_.counted_losses) / result_.counted_arrivals
            : 0.0;
    const double window = clock - stats_start;
    result_.time_average_blocked = window > 0.0 ? blocked_time / window : 0.0;
    return result_;
  }

 private:
  void push_event(const Event& ev) { events_.push(ev); }

  void ensure_work_slots() {
    if (work_.size() < pool_.slot_count()) {
      work_.resize(pool_.slot_count());
    }
  }

  // A departure handed channels to the degraded request: refresh its work at
  // the old rate, then schedule a new completion at the faster rate.
  void reschedule_degraded(const ChannelPool::Reallocation& realloc, double clock) {
    const std::size_t slot = ChannelPool::slot_index(realloc.degraded_id);
    const int cls_index = pool_.class_of(realloc.degraded_id);
    const ClassRuntime& cls = classes_[cls_index];
    const int new_allocation = pool_.allocated(realloc.degraded_id);
    const int old_allocation = new_allocation - realloc.degraded_gain;

    WorkState& work = work_[slot];
    work.remaining -= (clock - work.last_update) *
                      (static_cast<double>(old_allocation) / cls.d);
    work.remaining = std::max(work.remaining, 0.0);
    work.last_update = clock;
    ++work.version;
    push_event({clock + work.remaining * cls.d / new_allocation, next_seq_++,
                Event::Completion, cls_index, realloc.degraded_id, work.version});
    trace_line(clock, "reallocate", cls_index, new_allocation);
  }

  void check_state() const {
    if (pool_.total_allocated() + pool_.idle() != channels_) {
      throw std::logic_error("channel conservation violated");
    }
    if (pool_.degraded() && pool_.idle() != 0) {
      throw std::logic_error("degraded request coexists with idle channels");
    }
  }

  void trace_line(double time, const char* kind, int class_index, int allocation) {
    if (!trace_) return;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "t=%.9g kind=%s class=%d allocation=%d idle=%d\n",
                  time, kind, class_index, allocation, pool_.idle());
    *trace_ << buf;
  }

  ChannelPool pool_;
  Rng rng_;
  std::vector<ClassRuntime> classes_;
  std::priority_queue<Event, std::vector<Event>, EventLater> events_;
  std::vector<WorkState> work_;
  std::uint64_t next_seq_ = 0;
  int channels_ = 0;
  long long arrivals_target_;
  long long warmup_count_;
  bool check_invariants_;
  std::ostream* trace_;
  ReplicationResult result_;
};

ReplicationResult run_replication(const SystemConfig& config, const SimParams& params,
                                  int replication) {
  Engine engine(config, params.arrivals_per_replication, params.warmup_fraction,
                derive_seed(params.seed, replication), params.check_invariants,
                replication == 0 ? params.trace : nullptr);
  return engine.run();
}

}  // namespace

ChannelPool::ChannelPool(const SystemConfig& config) : idle_(config.channels) {
  validate_or_throw(config);
  for (const auto& cls : config.classes) {
    channels_required_.push_back(cls.channels_required);
  }
}

const ChannelPool::Slot* ChannelPool::find(std::uint64_t id) const {
  const std::size_t slot = slot_index(id);
  if (slot >= slots_.size()) return nullptr;
  const Slot& entry = slots_[slot];
  if (!entry.active || entry.generation != (id >> 32)) return nullptr;
  return &entry;
}

bool ChannelPool::contains(std::uint64_t id) const { return find(id) != nullptr; }

int ChannelPool::allocated(std::uint64_t id) const {
  const Slot* slot = find(id);
  if (!slot) throw std::out_of_range("unknown request id");
  return slot->allocated;
}

int ChannelPool::class_of(std::uint64_t id) const {
  const Slot* slot = find(id);
  if (!slot) throw std::out_of_range("unknown request id");
  return slot->class_index;
}

ChannelPool::Admission ChannelPool::arrival(int class_index) {
  const int required = channels_required_[class_index];
  Admission admission;
  if (idle_ == 0) {
    return admission;  // lost
  }
  const int granted = std::min(idle_, required);

  std::uint32_t slot_id;
  if (!free_slots_.empty()) {
    slot_id = free_slots_.back();
    free_slots_.pop_back();
  } else {
    slot_id = static_cast<std::uint32_t>(slots_.size());
    slots_.emplace_back();
  }
  Slot& slot = slots_[slot_id];
  slot.class_index = class_index;
  slot.allocated = granted;
  slot.active = true;
  ++slot.generation;

  admission.accepted = true;
  admission.id = make_id(slot_id, slot.generation);
  admission.allocated = granted;

  idle_ -= granted;
  total_allocated_ += granted;
  ++active_count_;
  if (granted < required) {
    // a degraded admission empties the idle pool, and idle channels can only
    // reappear after the previous degraded request was saturated
    if (degraded_) {
      throw std::logic_error("second degraded request requested");
    }
    degraded_ = admission.id;
  }
  return admission;
}

ChannelPool::Reallocation ChannelPool::depart(std::uint64_t id) {
  const Slot* entry = find(id);
  if (!entry) throw std::out_of_range("unknown request id");
  const std::size_t slot_id = slot_index(id);
  Slot& slot = slots_[slot_id];

  int freed = slot.allocated;
  total_allocated_ -= freed;
  --active_count_;
  slot.active = false;
  free_slots_.push_back(static_cast<std::uint32_t>(slot_id));

  Reallocation realloc;
  if (degraded_ && *degraded_ == id) {
    degraded_.reset();
  } else if (degraded_) {
    Slot& deg = slots_[slot_index(*degraded_)];
    const int wanted = channels_required_[deg.class_index] - deg.allocated;
    const int take = std::min(freed, wanted);
    deg.allocated += take;
    total_allocated_ += take;
    freed -= take;
    realloc.degraded_id = *degraded_;
    realloc.degraded_gain = take;
    if (deg.allocated == channels_required_[deg.class_index]) {
      realloc.promoted_to_full = true;
      degraded_.reset();
    }
  }
  idle_ += freed;
  realloc.to_idle = freed;
  return realloc;
}

LossEstimate run_simulation(const SystemConfig& config, const SimParams& params) {
  validate_or_throw(config);
  if (params.arrivals_per_replication < 1000) {
    throw InvalidParameters("arrivals_per_replication must be >= 1000");
  }
  if (params.replications < 2) {
    throw InvalidParameters("replications must be >= 2");
  }
  if (!(params.warmup_fraction >= 0.0 && params.warmup_fraction < 1.0)) {
    throw InvalidParameters("warmup_fraction must lie in [0, 1)");
  }

  const int reps = params.replications;
  std::vector<ReplicationResult> results(reps);
  const bool serial = !params.parallel || params.trace != nullptr;
  if (serial) {
    for (int r = 0; r < reps; ++r) {
      results[r] = run_replication(config, params, r);
    }
  } else {
    const unsigned workers =
        std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                           static_cast<unsigned>(reps));
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(reps);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      threads.emplace_back([&] {
        for (int r = next.fetch_add(1); r < reps; r = next.fetch_add(1)) {
          try {
            results[r] = run_replication(config, params, r);
          } catch (...) {
            errors[r] = std::current_exception();
          }
        }
      });
    }
    for (auto& thread : threads) thread.join();
    for (const auto& error : errors) {
      if (error) std::rethrow_exception(error);
    }
  }

  LossEstimate estimate;
  estimate.replications = reps;
  estimate.replication_means.reserve(reps);
  double mean = 0.0;
  for (const auto& result : results) {
    estimate.replication_means.push_back(result.loss_fraction);
    estimate.arrivals_total += result.counted_arrivals;
    estimate.time_average_blocked += result.time_average_blocked / reps;
    mean += result.loss_fraction / reps;
  }
  double variance = 0.0;
  for (double value : estimate.replication_means) {
    variance += (value - mean) * (value - mean);
  }
  variance /= reps - 1;
  const boost::math::students_t_distribution<double> student(reps - 1);
  const double half_width =
      boost::math::quantile(student, 0.975) * std::sqrt(variance / reps);

  estimate.point = mean;
  estimate.ci_low = std::max(0.0, mean - half_width);
  estimate.ci_high = std::min(1.0, mean + half_width);

  const std::size_t class_count = config.classes.size();
  estimate.per_class.assign(class_count, 0.0);
  estimate.per_class_se.assign(class_count, 0.0);
  for (std::size_t i = 0; i < class_count; ++i) {
    std::vector<double> fractions(reps, 0.0);
    double class_mean = 0.0;
    for (int r = 0; r < reps; ++r) {
      const auto& result = results[r];
      fractions[r] = result.class_arrivals[i] > 0
                         ? static_cast<double>(result.class_losses[i]) /
                               result.class_arrivals[i]
                         : 0.0;
      class_mean += fractions[r] / reps;
    }
    double class_var = 0.0;
    for (double value : fractions) {
      class_var += (value - class_mean) * (value - class_mean);
    }
    class_var /= reps - 1;
    estimate.per_class[i] = class_mean;
    estimate.per_class_se[i] = std::sqrt(class_var / reps);
  }
  return estimate;
}

}  // namespace capshare
