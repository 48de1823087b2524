#include "physim/collapse_oracle.hpp"

#include <cmath>
#include <utility>

#include "physim/scenarios.hpp"

namespace physim {

std::vector<double> outcome_distribution(const StateVector& state,
                                         const std::vector<Matrix>& projectors) {
  std::vector<double> weights;
  weights.reserve(projectors.size());
  for (const Matrix& p : projectors) {
    if (p.rows() != state.dim() || p.cols() != state.dim()) {
      throw DimensionError("projector dimension does not match the state");
    }
    weights.push_back((p * state.amplitudes()).squaredNorm());
  }
  return weights;
}

std::vector<double> outcome_distribution(const StateVector& state,
                                         const MacrostateDecomposition& decomp) {
  return outcome_distribution(state, decomp.projectors);
}

CollapseOutcome measure_collapse(const StateVector& state,
                                 const std::vector<Matrix>& projectors, RngStream& rng) {
  std::vector<double> weights = outcome_distribution(state, projectors);
  std::vector<double> support = weights;
  for (double& w : support) {
    if (w <= tol::kZeroWeight) {
      w = 0.0;
    }
  }
  const std::size_t index = rng.sample_index(support);
  Vector projected = projectors[index] * state.amplitudes();
  return {index, make_state(std::move(projected)), weights[index]};
}

CollapseOutcome measure_collapse(const StateVector& state,
                                 const MacrostateDecomposition& decomp, RngStream& rng) {
  return measure_collapse(state, decomp.projectors, rng);
}

namespace {

struct Branch {
  Vector amplitudes;  // unit norm; the path probability rides separately
  double probability;
  std::string key;
};

}  // namespace

ChainDistribution enumerate_collapse_chain(const StateVector& initial,
                                           const HermitianOperator& hamiltonian,
                                           const std::vector<ScheduledEvent>& events,
                                           std::size_t cap) {
  const Eigen::Index dim = initial.dim();
  double now = 0.0;
  std::vector<Branch> branches;
  branches.push_back({initial.amplitudes(), 1.0, ""});

  for (const ScheduledEvent& event : events) {
    if (branches.size() * event.candidates.size() > cap) {
      throw EnumerationCapError("outcome-sequence space exceeds the cap of " +
                                std::to_string(cap));
    }

    // One propagator per event, shared by every branch.
    Matrix u = identity_matrix(dim);
    if (event.segments.empty()) {
      const double gap = event.time - now;
      if (gap > 0.0) {
        u = evolution_operator(hamiltonian, gap).matrix();
      }
    } else {
      for (const EvolutionSegment& segment : event.segments) {
        u = segment.op.matrix() * u;
      }
    }

    std::vector<Branch> next;
    next.reserve(branches.size() * event.candidates.size());
    for (const Branch& branch : branches) {
      const Vector evolved = u * branch.amplitudes;
      for (std::size_t a = 0; a < event.candidates.size(); ++a) {
        Vector projected = event.candidates.projectors[a] * evolved;
        const double weight = projected.squaredNorm();
        const double probability = branch.probability * weight;
        if (probability < tol::kZeroWeight) {
          continue;
        }
        projected /= std::sqrt(weight);
        std::string key = branch.key.empty()
                              ? event.candidates.names[a]
                              : branch.key + "," + event.candidates.names[a];
        next.push_back({std::move(projected), probability, std::move(key)});
      }
    }
    branches = std::move(next);
    now = event.time;
  }

  ChainDistribution chain;
  for (Branch& branch : branches) {
    chain[std::move(branch.key)] += branch.probability;
  }
  return chain;
}

ChainDistribution chain_distribution(const ScenarioConfig& scenario, std::size_t cap) {
  return enumerate_collapse_chain(make_state(scenario.initial_state),
                                  HermitianOperator::from_matrix(scenario.hamiltonian),
                                  lower_schedule(scenario), cap);
}

}  // namespace physim
