#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace capshare {

enum class DistKind { Exponential, Erlang2, BalancedHyperexp2 };

// One exponential stage of a phase-type service representation. Service
// starts in phase j with probability initial_prob[j]; after an Exp(rate)
// sojourn it moves to phase *next, or completes if next is empty.
struct ServicePhase {
  double initial_prob = 0.0;
  double rate = 0.0;
  std::optional<int> next;
};

// Service-length distribution of one request class, parameterized by the mean
// length b (in unit-rate service time). scv is the squared coefficient of
// variation and applies to BalancedHyperexp2 only.
struct ServiceLengthDistribution {
  DistKind kind = DistKind::Exponential;
  double mean = 1.0;
  double scv = 2.0;

  static ServiceLengthDistribution exponential(double mean) {
    return {DistKind::Exponential, mean, 2.0};
  }
  static ServiceLengthDistribution erlang2(double mean) {
    return {DistKind::Erlang2, mean, 2.0};
  }
  static ServiceLengthDistribution balanced_hyperexp2(double mean, double scv = 2.0) {
    return {DistKind::BalancedHyperexp2, mean, scv};
  }

  bool operator==(const ServiceLengthDistribution&) const = default;
};

struct RequestClass {
  double arrival_rate = 0.0;  // lambda
  int channels_required = 1;  // d, channels needed for unit-rate service
  ServiceLengthDistribution service;

  bool operator==(const RequestClass&) const = default;
};

struct SystemConfig {
  int channels = 1;  // m
  std::vector<RequestClass> classes;

  bool operator==(const SystemConfig&) const = default;
};

struct LoadSummary {
  std::vector<double> per_class_load;  // A_i = lambda_i * b_i
  double total_load = 0.0;             // A = sum A_i
  double mean_channels = 0.0;          // load-weighted mean of d_i
  double equivalent_servers = 0.0;     // v = m / mean_channels
};

enum class ConfigViolation {
  NonPositiveRate,
  NonPositiveMean,
  InvalidScv,
  NonPositiveChannels,
  NonPositiveChannelsRequired,
  ChannelsRequiredExceedsTotal,
  EmptyClassList,
};

struct ValidationIssue {
  ConfigViolation code;
  int class_index;  // -1 for config-level issues
  std::string message;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<ValidationIssue> issues);
  const std::vector<ValidationIssue>& issues() const { return issues_; }

 private:
  std::vector<ValidationIssue> issues_;
};

// Complete list of invariant violations; empty means the config is valid.
std::vector<ValidationIssue> validate(const SystemConfig& config);

// Returns config unchanged when valid, otherwise throws ValidationError
// carrying every violation.
const SystemConfig& validate_or_throw(const SystemConfig& config);

// Per-class offered loads A_i = lambda_i * b_i, their total A, the
// load-weighted mean channel requirement, and the equivalent server count
// v = m / mean_channels.
LoadSummary offered_loads(const SystemConfig& config);

// Phase-type representation: Exponential -> one phase of rate 1/b;
// Erlang2 -> two sequential phases of rate 2/b; BalancedHyperexp2 -> two
// parallel phases with alpha_1 = (1 + sqrt((scv-1)/(scv+1)))/2,
// alpha_2 = 1 - alpha_1, mu_j = 2*alpha_j/b. Throws std::domain_error for
// mean <= 0 or scv < 1.
std::vector<ServicePhase> phase_representation(const ServiceLengthDistribution& dist);

// Analytic first moment and squared coefficient of variation of a phase
// structure; used to cross-check representations against their parameters.
double phase_mean(const std::vector<ServicePhase>& phases);
double phase_scv(const std::vector<ServicePhase>& phases);

const char* to_string(ConfigViolation code);
const char* to_string(DistKind kind);

}  // namespace capshare
