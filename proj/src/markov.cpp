#include "capshare/markov.hpp"

#include <Eigen/Dense>

#include <cassert>
#include <charconv>
#include <cmath>
#include <deque>
#include <ostream>
#include <unordered_map>

namespace capshare {

namespace {

// Byte-string key for state lookup during enumeration.
std::string state_key(const MarkovState& state) {
  std::string key;
  key.reserve(state.full_counts.size() * 2 + 7);
  auto push16 = [&key](int value) {
    key.push_back(static_cast<char>(value & 0xff));
    key.push_back(static_cast<char>((value >> 8) & 0xff));
  };
  for (std::uint16_t c : state.full_counts) {
    push16(c);
  }
  if (state.degraded) {
    key.push_back(1);
    push16(state.degraded->class_index);
    push16(state.degraded->phase_index);
    push16(state.degraded->allocated);
  } else {
    key.push_back(0);
  }
  return key;
}

struct Transition {
  std::size_t from;
  std::size_t to;
  double rate;
};

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

int GeneratorMatrix::occupied(const MarkovState& state) const {
  int occ = 0;
  for (std::size_t i = 0; i < class_phases.size(); ++i) {
    int count = 0;
    for (std::size_t j = 0; j < class_phases[i].size(); ++j) {
      count += state.full_counts[phase_offset[i] + j];
    }
    occ += channels_required[i] * count;
  }
  if (state.degraded) {
    occ += state.degraded->allocated;
  }
  return occ;
}

GeneratorMatrix build_state_space(const SystemConfig& config, std::size_t max_states) {
  validate_or_throw(config);

  GeneratorMatrix gen;
  gen.channels = config.channels;
  int offset = 0;
  for (const auto& cls : config.classes) {
    gen.channels_required.push_back(cls.channels_required);
    gen.class_phases.push_back(phase_representation(cls.service));
    gen.phase_offset.push_back(offset);
    offset += static_cast<int>(gen.class_phases.back().size());
  }
  const int total_phases = offset;
  const int class_count = static_cast<int>(config.classes.size());

  MarkovState empty;
  empty.full_counts.assign(total_phases, 0);

  std::unordered_map<std::string, std::size_t> index;
  std::deque<std::size_t> queue;
  std::vector<Transition> transitions;

  index.emplace(state_key(empty), 0);
  gen.states.push_back(empty);
  queue.push_back(0);

  auto intern = [&](MarkovState&& state) -> std::size_t {
    auto key = state_key(state);
    auto it = index.find(key);
    if (it != index.end()) {
      return it->second;
    }
    const std::size_t id = gen.states.size();
    if (id >= max_states) {
      throw StateSpaceTooLarge("state space exceeds " + std::to_string(max_states) +
                               " states");
    }
    index.emplace(std::move(key), id);
    gen.states.push_back(std::move(state));
    queue.push_back(id);
    return id;
  };

  while (!queue.empty()) {
    const std::size_t from = queue.front();
    queue.pop_front();
    // Copy: gen.states may reallocate while new states are interned.
    const MarkovState state = gen.states[from];
    const int idle = gen.idle(state);
    assert(idle >= 0);
    assert(!state.degraded || idle == 0);

    for (int i = 0; i < class_count; ++i) {
      const auto& phases = gen.class_phases[i];
      const int d = gen.channels_required[i];
      const double lambda = config.classes[i].arrival_rate;

      // (a) arrivals; an arrival finding idle = 0 is lost and leaves the
      // state unchanged, so it contributes no transition.
      if (idle >= d) {
        for (std::size_t j = 0; j < phases.size(); ++j) {
          if (phases[j].initial_prob <= 0.0) continue;
          MarkovState next = state;
          ++next.full_counts[gen.phase_offset[i] + j];
          transitions.push_back({from, intern(std::move(next)),
                                 lambda * phases[j].initial_prob});
        }
      } else if (idle >= 1) {
        for (std::size_t j = 0; j < phases.size(); ++j) {
          if (phases[j].initial_prob <= 0.0) continue;
          MarkovState next = state;
          next.degraded = DegradedRequest{i, static_cast<int>(j), idle};
          transitions.push_back({from, intern(std::move(next)),
                                 lambda * phases[j].initial_prob});
        }
      }

      // (b) phase events of fully served requests
      for (std::size_t j = 0; j < phases.size(); ++j) {
        const int count = state.full_counts[gen.phase_offset[i] + j];
        if (count == 0) continue;
        const double rate = count * phases[j].rate;
        MarkovState next = state;
        --next.full_counts[gen.phase_offset[i] + j];
        if (phases[j].next) {
          ++next.full_counts[gen.phase_offset[i] + *phases[j].next];
        } else if (next.degraded) {
          // Completion frees d channels; the degraded request absorbs
          // min(d, d' - k) of them and becomes full once it holds d'.
          const auto deg = *next.degraded;
          const int d_deg = gen.channels_required[deg.class_index];
          const int take = std::min(d, d_deg - deg.allocated);
          if (deg.allocated + take == d_deg) {
            ++next.full_counts[gen.phase_offset[deg.class_index] + deg.phase_index];
            next.degraded.reset();
          } else {
            next.degraded->allocated += take;
          }
        }
        transitions.push_back({from, intern(std::move(next)), rate});
      }
    }

    // (c) phase events of the degraded request, time-dilated by k/d
    if (state.degraded) {
      const auto deg = *state.degraded;
      const auto& phase = gen.class_phases[deg.class_index][deg.phase_index];
      const int d = gen.channels_required[deg.class_index];
      const double rate = phase.rate * deg.allocated / d;
      MarkovState next = state;
      if (phase.next) {
        next.degraded->phase_index = *phase.next;
      } else {
        next.degraded.reset();
      }
      transitions.push_back({from, intern(std::move(next)), rate});
    }
  }

  const std::size_t n = gen.states.size();
  gen.rates.assign(n * n, 0.0);
  for (const auto& t : transitions) {
    gen.rates[t.from * n + t.to] += t.rate;
  }
  for (std::size_t s = 0; s < n; ++s) {
    double out = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      if (t != s) out += gen.rates[s * n + t];
    }
    gen.rates[s * n + s] = -out;
  }
  return gen;
}

std::vector<double> stationary_distribution(const GeneratorMatrix& gen) {
  const auto n = static_cast<Eigen::Index>(gen.size());
  Eigen::MatrixXd system(n, n);
  for (Eigen::Index to = 0; to < n; ++to) {
    for (Eigen::Index from = 0; from < n; ++from) {
      system(to, from) = gen.rates[static_cast<std::size_t>(from) * n + to];
    }
  }
  system.row(n - 1).setOnes();  // normalization replaces one balance equation
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;

  Eigen::VectorXd pi = system.partialPivLu().solve(rhs);

  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(pi(i)) || pi(i) < -1e-10) {
      throw SingularSystem("stationary solve produced an invalid distribution");
    }
    pi(i) = std::max(pi(i), 0.0);
    sum += pi(i);
  }
  pi /= sum;

  double residual = 0.0;
  for (Eigen::Index to = 0; to < n; ++to) {
    double flow = 0.0;
    for (Eigen::Index from = 0; from < n; ++from) {
      flow += pi(from) * gen.rates[static_cast<std::size_t>(from) * n + to];
    }
    residual = std::max(residual, std::fabs(flow));
  }
  if (residual > 1e-10) {
    throw SingularSystem("stationary residual " + std::to_string(residual) +
                         " exceeds 1e-10; generator is likely malformed");
  }
  return {pi.data(), pi.data() + n};
}

double loss_probability_exact(const SystemConfig& config, std::size_t max_states) {
  const GeneratorMatrix gen = build_state_space(config, max_states);
  const std::vector<double> pi = stationary_distribution(gen);
  double loss = 0.0;
  for (std::size_t s = 0; s < gen.size(); ++s) {
    if (gen.idle(gen.states[s]) == 0) {
      loss += pi[s];
    }
  }
  return loss;
}

void dump_chain(const GeneratorMatrix& gen, std::ostream& out) {
  const std::size_t n = gen.size();
  for (std::size_t s = 0; s < n; ++s) {
    const auto& state = gen.states[s];
    out << s << ": counts=[";
    for (std::size_t j = 0; j < state.full_counts.size(); ++j) {
      if (j) out << ',';
      out << state.full_counts[j];
    }
    out << "] degraded=";
    if (state.degraded) {
      out << "(class=" << state.degraded->class_index
          << ",phase=" << state.degraded->phase_index
          << ",k=" << state.degraded->allocated << ")";
    } else {
      out << "none";
    }
    out << " idle=" << gen.idle(state) << " out:";
    for (std::size_t t = 0; t < n; ++t) {
      if (t != s && gen.rate(s, t) > 0.0) {
        out << ' ' << t << '@' << format_double(gen.rate(s, t));
      }
    }
    out << '\n';
  }
}

}  // namespace capshare
