#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "physim/hilbert.hpp"
#include "physim/physication.hpp"

namespace physim {

// An interaction switched on over a time window; its generator is added to
// the free Hamiltonian while the window is active.
struct CouplingSpec {
  double start = 0.0;
  double end = 0.0;
  Matrix interaction;  // Hermitian, full dimension
};

// Pointer field of an axis event: which factor records the outcome before the
// observation, via a controlled flip in the observable's eigenbasis.
inline constexpr int kNoPointer = -1;    // measure the observable directly
inline constexpr int kAutoPointer = -2;  // take the next never-used factor

// One scheduled observation, before lowering: either an explicit candidate
// set, or a single-qubit observable cos(theta) sigma_z + sin(theta) sigma_x
// on one factor (theta measured from the z axis, in degrees).
struct EventSpec {
  double time = 0.0;
  std::optional<CandidateSet> candidates;
  double axis_deg = 0.0;
  std::size_t target = 0;
  int pointer = kNoPointer;
  std::vector<std::string> names;  // axis outcome names, default {"+", "-"}
};

enum class ScenarioKind {
  kGeneric,
  kFreshSpin,
  kPrepareMeasure,
  kEpr,
  kSequentialChain,
  kConservation,
};

struct ScenarioConfig {
  std::string name = "custom";
  ScenarioKind kind = ScenarioKind::kGeneric;
  std::vector<Eigen::Index> factor_dims;
  Vector initial_state;
  Matrix hamiltonian;  // defaults to zero when empty
  std::vector<CouplingSpec> couplings;
  std::vector<EventSpec> events;
  AssignmentMode mode = AssignmentMode::kFree;
  std::size_t trials = 10000;
  std::uint64_t seed = 42;
  double definite_tol = tol::kDefinite;

  std::optional<Matrix> conserved_observable;      // <Q> tracked across the run
  std::optional<Matrix> collapse_foil_observable;  // textbook-collapse contrast
  // Detector angles (degrees) a, a', b, b'; each maps to the Bloch axis at
  // twice the angle. Present only on the CHSH preset.
  std::optional<std::array<double, 4>> chsh_angles;
  int schmidt_cut = -1;  // product check across first `cut` factors; -1 = off

  Eigen::Index dim() const;
};

struct RunStatistics {
  std::map<std::string, double> exact_chain;
  std::map<std::string, long long> empirical_counts;
  double tvd_vs_oracle = 0.0;
  double conserved_drift = 0.0;
  std::map<std::string, double> correlation_estimates;
  double wall_time = 0.0;  // seconds; reported but never serialized to files
  std::map<std::string, double> diagnostics;
};

// Exact single-world chain via forced-label enumeration through step(),
// with the per-path health checks accumulated along the way.
struct ExactChainResult {
  std::map<std::string, double> chain;
  std::size_t path_count = 0;
  std::size_t ledger_failures = 0;
  double max_norm_deviation = 0.0;
  double max_unitarity_defect = 0.0;
  double max_conserved_drift = 0.0;
  double max_q_commutator = 0.0;
  double max_schmidt_residual = 0.0;
};

std::vector<std::string> builtin_scenarios();
ScenarioConfig make_builtin(const std::string& name);

// Expands axis events into embedded projectors, assigns pointer factors and
// their controlled-flip couplings, splits inter-event evolution into cached
// unitary segments, and validates the whole schedule.
std::vector<ScheduledEvent> lower_schedule(const ScenarioConfig& config);

ExactChainResult physication_exact_chain(const ScenarioConfig& config,
                                         const std::vector<ScheduledEvent>& lowered,
                                         std::size_t cap = 1000000);

// Invoked once per completed trial. Under PHYSIM_THREADS > 1 the calls come
// from worker threads concurrently (trial indices are disjoint).
using TrialCallback = std::function<void(
    std::size_t trial, const World& world, const std::vector<PhysicationOutcome>&)>;

RunStatistics run_scenario(const ScenarioConfig& config,
                           const TrialCallback& on_trial = {});
RunStatistics run_fresh_spin(const ScenarioConfig& config,
                             const TrialCallback& on_trial = {});
RunStatistics run_prepare_measure(const ScenarioConfig& config,
                                  const TrialCallback& on_trial = {});
RunStatistics run_epr_chsh(const ScenarioConfig& config,
                           const TrialCallback& on_trial = {});
RunStatistics run_sequential_chain(const ScenarioConfig& config,
                                   const TrialCallback& on_trial = {});

// Dispatches on config.kind.
RunStatistics run(const ScenarioConfig& config, const TrialCallback& on_trial = {});

// Deterministic invariant suite (no sampling): physication/oracle chain
// equality, per-path ledger replay, unitarity, order independence, conserved
// drift, marginal consistency. Returns human-readable violations, empty if
// everything holds.
std::vector<std::string> verify_scenario(const ScenarioConfig& config);

// Event schedule in human-readable form, for the explain subcommand.
std::string describe_schedule(const ScenarioConfig& config);

// Worker count: PHYSIM_THREADS when set (positive integer), else 1.
std::size_t worker_count();

}  // namespace physim
