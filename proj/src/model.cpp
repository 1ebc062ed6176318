#include "capshare/model.hpp"

#include <cmath>
#include <sstream>

namespace capshare {

namespace {

std::string issue_text(const std::vector<ValidationIssue>& issues) {
  std::ostringstream out;
  out << "invalid configuration (" << issues.size() << " issue"
      << (issues.size() == 1 ? "" : "s") << "):";
  for (const auto& issue : issues) {
    out << "\n  - " << issue.message;
  }
  return out.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : std::runtime_error(issue_text(issues)), issues_(std::move(issues)) {}

const char* to_string(ConfigViolation code) {
  switch (code) {
    case ConfigViolation::NonPositiveRate: return "NonPositiveRate";
    case ConfigViolation::NonPositiveMean: return "NonPositiveMean";
    case ConfigViolation::InvalidScv: return "InvalidScv";
    case ConfigViolation::NonPositiveChannels: return "NonPositiveChannels";
    case ConfigViolation::NonPositiveChannelsRequired: return "NonPositiveChannelsRequired";
    case ConfigViolation::ChannelsRequiredExceedsTotal: return "ChannelsRequiredExceedsTotal";
    case ConfigViolation::EmptyClassList: return "EmptyClassList";
  }
  return "Unknown";
}

const char* to_string(DistKind kind) {
  switch (kind) {
    case DistKind::Exponential: return "exponential";
    case DistKind::Erlang2: return "erlang2";
    case DistKind::BalancedHyperexp2: return "hyperexp2_balanced";
  }
  return "unknown";
}

std::vector<ValidationIssue> validate(const SystemConfig& config) {
  std::vector<ValidationIssue> issues;
  auto add = [&](ConfigViolation code, int idx, const std::string& msg) {
    issues.push_back({code, idx, msg});
  };

  if (config.channels < 1) {
    add(ConfigViolation::NonPositiveChannels, -1,
        "channels must be >= 1, got " + std::to_string(config.channels));
  }
  if (config.classes.empty()) {
    add(ConfigViolation::EmptyClassList, -1, "class list must not be empty");
  }
  for (std::size_t i = 0; i < config.classes.size(); ++i) {
    const auto& cls = config.classes[i];
    const std::string where = "classes[" + std::to_string(i) + "]";
    if (!(cls.arrival_rate > 0.0) || !std::isfinite(cls.arrival_rate)) {
      add(ConfigViolation::NonPositiveRate, static_cast<int>(i),
          where + ".arrival_rate must be positive and finite");
    }
    if (cls.channels_required < 1) {
      add(ConfigViolation::NonPositiveChannelsRequired, static_cast<int>(i),
          where + ".channels_required must be >= 1, got " +
              std::to_string(cls.channels_required));
    } else if (config.channels >= 1 && cls.channels_required > config.channels) {
      add(ConfigViolation::ChannelsRequiredExceedsTotal, static_cast<int>(i),
          where + ".channels_required (" + std::to_string(cls.channels_required) +
              ") exceeds channels (" + std::to_string(config.channels) + ")");
    }
    if (!(cls.service.mean > 0.0) || !std::isfinite(cls.service.mean)) {
      add(ConfigViolation::NonPositiveMean, static_cast<int>(i),
          where + ".service.mean must be positive and finite");
    }
    if (cls.service.kind == DistKind::BalancedHyperexp2 &&
        (!(cls.service.scv >= 1.0) || !std::isfinite(cls.service.scv))) {
      add(ConfigViolation::InvalidScv, static_cast<int>(i),
          where + ".service.scv must be >= 1 for the balanced hyperexponential");
    }
  }
  return issues;
}

const SystemConfig& validate_or_throw(const SystemConfig& config) {
  auto issues = validate(config);
  if (!issues.empty()) {
    throw ValidationError(std::move(issues));
  }
  return config;
}

LoadSummary offered_loads(const SystemConfig& config) {
  validate_or_throw(config);
  LoadSummary summary;
  summary.per_class_load.reserve(config.classes.size());
  double weighted_channels = 0.0;
  for (const auto& cls : config.classes) {
    const double load = cls.arrival_rate * cls.service.mean;
    summary.per_class_load.push_back(load);
    summary.total_load += load;
    weighted_channels += load * cls.channels_required;
  }
  summary.mean_channels = weighted_channels / summary.total_load;
  summary.equivalent_servers = config.channels / summary.mean_channels;
  return summary;
}

std::vector<ServicePhase> phase_representation(const ServiceLengthDistribution& dist) {
  if (!(dist.mean > 0.0) || !std::isfinite(dist.mean)) {
    throw std::domain_error("service mean must be positive and finite");
  }
  switch (dist.kind) {
    case DistKind::Exponential:
      return {{1.0, 1.0 / dist.mean, std::nullopt}};
    case DistKind::Erlang2: {
      const double rate = 2.0 / dist.mean;
      return {{1.0, rate, 1}, {0.0, rate, std::nullopt}};
    }
    case DistKind::BalancedHyperexp2: {
      if (!(dist.scv >= 1.0) || !std::isfinite(dist.scv)) {
        throw std::domain_error("balanced hyperexponential requires scv >= 1");
      }
      // Balance condition alpha_1/mu_1 = alpha_2/mu_2 plus mean and scv
      // matching pin the four parameters.
      const double delta = std::sqrt((dist.scv - 1.0) / (dist.scv + 1.0));
      const double alpha1 = 0.5 * (1.0 + delta);
      const double alpha2 = 1.0 - alpha1;
      return {{alpha1, 2.0 * alpha1 / dist.mean, std::nullopt},
              {alpha2, 2.0 * alpha2 / dist.mean, std::nullopt}};
    }
  }
  throw std::domain_error("unknown distribution kind");
}

double phase_mean(const std::vector<ServicePhase>& phases) {
  // Expected time to absorption from each phase; structures are acyclic.
  std::vector<double> to_absorb(phases.size(), 0.0);
  for (std::size_t j = phases.size(); j-- > 0;) {
    to_absorb[j] = 1.0 / phases[j].rate;
    if (phases[j].next) {
      to_absorb[j] += to_absorb[*phases[j].next];
    }
  }
  double mean = 0.0;
  for (std::size_t j = 0; j < phases.size(); ++j) {
    mean += phases[j].initial_prob * to_absorb[j];
  }
  return mean;
}

double phase_scv(const std::vector<ServicePhase>& phases) {
  std::vector<double> m1(phases.size(), 0.0);
  std::vector<double> m2(phases.size(), 0.0);
  for (std::size_t j = phases.size(); j-- > 0;) {
    const double mu = phases[j].rate;
    double next_m1 = 0.0, next_m2 = 0.0;
    if (phases[j].next) {
      next_m1 = m1[*phases[j].next];
      next_m2 = m2[*phases[j].next];
    }
    m1[j] = 1.0 / mu + next_m1;
    // E[(X + T)^2] with X ~ Exp(mu) independent of the remaining time T
    m2[j] = 2.0 / (mu * mu) + 2.0 * next_m1 / mu + next_m2;
  }
  double mean = 0.0, second = 0.0;
  for (std::size_t j = 0; j < phases.size(); ++j) {
    mean += phases[j].initial_prob * m1[j];
    second += phases[j].initial_prob * m2[j];
  }
  return second / (mean * mean) - 1.0;
}

}  // namespace capshare
