#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "physim/hilbert.hpp"
#include "physim/macrostate.hpp"
#include "physim/physication.hpp"
#include "physim/rng.hpp"

// Textbook projection-postulate reference. Deliberately minimal arithmetic
// (project, renormalize, multiply weights) so it shares no machinery with the
// assignment-unitary engine it is used to cross-check.
namespace physim {

struct ScenarioConfig;  // scenarios.hpp

inline constexpr std::size_t kEnumerationCap = 1000000;

// Born weights ||P_a psi||^2, aligned with the decomposition order.
std::vector<double> outcome_distribution(const StateVector& state,
                                         const MacrostateDecomposition& decomp);
std::vector<double> outcome_distribution(const StateVector& state,
                                         const std::vector<Matrix>& projectors);

struct CollapseOutcome {
  std::size_t index = 0;
  StateVector state;  // P_a psi / ||P_a psi||
  double weight = 0.0;
};

CollapseOutcome measure_collapse(const StateVector& state,
                                 const MacrostateDecomposition& decomp, RngStream& rng);
CollapseOutcome measure_collapse(const StateVector& state,
                                 const std::vector<Matrix>& projectors, RngStream& rng);

// Outcome-sequence key (candidate names joined by ",") -> exact probability.
using ChainDistribution = std::map<std::string, double>;

// Breadth-first enumeration of collapse branches through a lowered schedule.
// Branches whose accumulated probability falls below tol::kZeroWeight are
// dropped without renormalizing.
ChainDistribution enumerate_collapse_chain(const StateVector& initial,
                                           const HermitianOperator& hamiltonian,
                                           const std::vector<ScheduledEvent>& events,
                                           std::size_t cap = kEnumerationCap);

// Convenience form: lowers the scenario's schedule first.
ChainDistribution chain_distribution(const ScenarioConfig& scenario,
                                     std::size_t cap = kEnumerationCap);

}  // namespace physim
