#include "physim/physication.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace physim {

namespace {

std::string format_label(const MacroLabel& label) {
  std::string out = "(";
  char buf[48];
  for (std::size_t i = 0; i < label.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g", label[i]);
    out += buf;
    if (i + 1 < label.size()) {
      out += ",";
    }
  }
  return out + ")";
}

}  // namespace

CandidateSet CandidateSet::from_decomposition(const MacrostateDecomposition& decomp,
                                              std::vector<std::string> names) {
  CandidateSet set;
  set.labels = decomp.labels;
  set.projectors = decomp.projectors;
  if (names.empty()) {
    for (const MacroLabel& label : decomp.labels) {
      set.names.push_back(format_label(label));
    }
  } else {
    if (names.size() != decomp.size()) {
      throw DecompositionError("got " + std::to_string(names.size()) + " names for " +
                               std::to_string(decomp.size()) + " macrostates");
    }
    set.names = std::move(names);
  }
  return set;
}

World make_world(StateVector initial_state, HermitianOperator hamiltonian,
                 AssignmentMode mode, double definite_tol) {
  if (initial_state.dim() != hamiltonian.dim()) {
    throw DimensionError("initial state and hamiltonian dimensions differ");
  }
  World world{std::move(initial_state),
              0.0,
              std::move(hamiltonian),
              mode,
              definite_tol,
              {},
              {},
              {},
              {}};
  world.initial_macrostate =
      world.state.amplitudes() * world.state.amplitudes().adjoint();
  world.accumulated_unitary = identity_matrix(world.state.dim());
  return world;
}

World make_world(StateVector initial_state, HermitianOperator hamiltonian,
                 const MacrostateDecomposition& initial_decomposition,
                 std::size_t designated_index, AssignmentMode mode, double definite_tol) {
  if (designated_index >= initial_decomposition.size()) {
    throw IndexError("designated macrostate index out of range");
  }
  const Classification cls = classify(initial_state, initial_decomposition, definite_tol);
  if (!cls.definite || cls.label_index != designated_index) {
    throw DecompositionError(
        "initial state is not definite in the designated macrostate");
  }
  const double designated_entropy = entropy(initial_decomposition, designated_index);
  for (std::size_t a = 0; a < initial_decomposition.size(); ++a) {
    if (entropy(initial_decomposition, a) < designated_entropy) {
      throw DecompositionError(
          "designated initial macrostate does not have minimal entropy");
    }
  }
  World world = make_world(std::move(initial_state), std::move(hamiltonian), mode,
                           definite_tol);
  world.initial_macrostate = initial_decomposition.projectors[designated_index];
  return world;
}

// -- assignment unitary -----------------------------------------------------------

UnitaryOperator construct_assignment_unitary(
    const StateVector& psi, const StateVector& phi,
    const std::vector<Matrix>& protected_projectors,
    const HermitianOperator* strict_hamiltonian) {
  const Eigen::Index dim = psi.dim();
  if (phi.dim() != dim) {
    throw DimensionError("psi and phi dimensions differ");
  }
  for (std::size_t k = 0; k < protected_projectors.size(); ++k) {
    const Matrix& p = protected_projectors[k];
    if (p.rows() != dim || p.cols() != dim) {
      throw DimensionError("protected projector " + std::to_string(k) +
                           " has the wrong dimension");
    }
    const double psi_overlap = (p * psi.amplitudes()).norm();
    const double phi_overlap = (p * phi.amplitudes()).norm();
    if (psi_overlap > tol::kProtectedOverlap || phi_overlap > tol::kProtectedOverlap) {
      throw ProtectedSectorViolation("state overlaps protected sector " +
                                     std::to_string(k) + " by " +
                                     std::to_string(std::max(psi_overlap, phi_overlap)));
    }
  }

  const Vector& a = psi.amplitudes();
  const Vector& b = phi.amplitudes();
  const Complex c = a.dot(b);  // <psi|phi>
  const Vector residual = b - c * a;
  const double s = residual.norm();

  Matrix v;
  if (s <= 1e-9) {
    // Colinear: rotate the phase of the psi ray only.
    const Complex phase = (std::abs(c) > 0.0) ? c / std::abs(c) : Complex(1.0, 0.0);
    v = identity_matrix(dim) + (phase - 1.0) * (a * a.adjoint());
  } else {
    // Rotate inside span{e1 = psi, e2}: e1 -> (c, s), completed unitarily.
    const Vector e2 = residual / s;
    const Complex gamma = (std::abs(c) > 1e-15) ? c / std::abs(c) : Complex(1.0, 0.0);
    Eigen::Matrix2cd m;
    m << c, -s * gamma, s, std::conj(c) * gamma;
    Matrix frame(dim, 2);
    frame.col(0) = a;
    frame.col(1) = e2;
    v = identity_matrix(dim) +
        frame * (m - Eigen::Matrix2cd::Identity()) * frame.adjoint();
  }

  UnitaryOperator result = UnitaryOperator::from_matrix(std::move(v));

  if (strict_hamiltonian != nullptr) {
    const double defect =
        frobenius(commutator(result.matrix(), strict_hamiltonian->matrix()));
    if (defect > tol::kStrictCommutator) {
      throw StrictModeUnsatisfiable("assignment unitary fails to commute with the "
                                    "hamiltonian: defect " +
                                    std::to_string(defect));
    }
  }
  return result;
}

// -- fresh observables --------------------------------------------------------------

HermitianOperator fresh_observable(const StateVector& state,
                                   const std::vector<double>& spectrum) {
  const Eigen::Index dim = state.dim();
  const std::size_t m = spectrum.size();
  if (m == 0) {
    throw SpectrumError("spectrum must contain at least one value");
  }
  if (static_cast<Eigen::Index>(m) > dim) {
    throw DimensionError("spectrum longer than the state dimension");
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (spectrum[i] == spectrum[j]) {
        throw SpectrumError("spectrum values must be distinct");
      }
    }
  }

  Matrix op = spectrum[0] * (state.amplitudes() * state.amplitudes().adjoint());
  if (dim > 1) {
    Eigen::HouseholderQR<Matrix> qr(Matrix(state.amplitudes()));
    const Matrix q = qr.householderQ();
    const Matrix completion = q.rightCols(dim - 1);  // orthonormal complement of the ray

    if (m == 1) {
      op += spectrum[0] * (completion * completion.adjoint());
    } else {
      // Distribute the complement over the remaining values, near-evenly.
      const Eigen::Index rest = dim - 1;
      const Eigen::Index groups = static_cast<Eigen::Index>(m) - 1;
      Eigen::Index offset = 0;
      for (Eigen::Index g = 0; g < groups; ++g) {
        const Eigen::Index size = rest / groups + (g < rest % groups ? 1 : 0);
        if (size > 0) {
          const Matrix block = completion.middleCols(offset, size);
          op += spectrum[static_cast<std::size_t>(g) + 1] * (block * block.adjoint());
          offset += size;
        }
      }
    }
  }
  return HermitianOperator::symmetrized(std::move(op));
}

// -- stepping ---------------------------------------------------------------------------

namespace {

void validate_candidates(const CandidateSet& candidates, Eigen::Index dim) {
  const std::size_t n = candidates.size();
  if (n == 0) {
    throw DecompositionError("event offers no candidate macrostates");
  }
  if (candidates.labels.size() != n || candidates.names.size() != n) {
    throw DecompositionError("candidate labels, names and projectors differ in count");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix& p = candidates.projectors[i];
    if (p.rows() != dim || p.cols() != dim) {
      throw DecompositionError("candidate projector " + std::to_string(i) +
                               " has the wrong dimension");
    }
    if (max_abs(p - p.adjoint()) > tol::kProjector ||
        max_abs(p * p - p) > tol::kProjector) {
      throw DecompositionError("candidate projector " + std::to_string(i) +
                               " is not an orthogonal projector");
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (candidates.labels[i] == candidates.labels[j]) {
        throw DecompositionError("candidate labels must be distinct");
      }
      if (candidates.names[i] == candidates.names[j]) {
        throw DecompositionError("candidate names must be distinct");
      }
      if (max_abs(p * candidates.projectors[j]) > tol::kProjector) {
        throw DecompositionError("candidate projectors " + std::to_string(i) + " and " +
                                 std::to_string(j) + " are not orthogonal");
      }
    }
  }
}

void append_records(World& world, const ScheduledEvent& event, std::size_t event_index,
                    std::size_t chosen) {
  for (std::size_t a = 0; a < event.candidates.size(); ++a) {
    world.assigned.push_back({event.candidates.labels[a], event.candidates.names[a],
                              event.candidates.projectors[a], event_index, a == chosen});
  }
}

}  // namespace

PhysicationOutcome step(World& world, const ScheduledEvent& event, RngStream& rng) {
  const Eigen::Index dim = world.state.dim();
  if (event.time < world.time - 1e-12) {
    throw ConfigError("event at t=" + std::to_string(event.time) +
                      " precedes the world time " + std::to_string(world.time));
  }

  // (1) unitary evolution up to the event time.
  const double gap = event.time - world.time;
  if (event.segments.empty()) {
    if (gap > 0.0) {
      const UnitaryOperator u = evolution_operator(world.hamiltonian, gap);
      world.state = StateVector::assume_normalized(u.matrix() * world.state.amplitudes());
      world.accumulated_unitary = u.matrix() * world.accumulated_unitary;
    }
  } else {
    double covered = 0.0;
    for (const EvolutionSegment& segment : event.segments) {
      covered += segment.duration;
    }
    if (std::abs(covered - gap) > 1e-9) {
      throw ConfigError("evolution segments cover " + std::to_string(covered) +
                        " of a " + std::to_string(gap) + " gap");
    }
    for (const EvolutionSegment& segment : event.segments) {
      if (segment.op.dim() != dim) {
        throw DimensionError("evolution segment dimension mismatch");
      }
      world.state =
          StateVector::assume_normalized(segment.op.matrix() * world.state.amplitudes());
      world.accumulated_unitary = segment.op.matrix() * world.accumulated_unitary;
    }
  }
  world.time = event.time;

  // (2) classification against the offered candidates.
  validate_candidates(event.candidates, dim);
  const std::vector<double> weights =
      membership_weights(world.state, event.candidates.projectors);
  const double reachable = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(reachable - 1.0) > 1e-9) {
    throw DecompositionError("candidates are incomplete on the reachable sector: "
                             "weights sum to " +
                             std::to_string(reachable));
  }

  const std::size_t event_index = world.ledger.size();
  const std::size_t top = static_cast<std::size_t>(
      std::max_element(weights.begin(), weights.end()) - weights.begin());

  if (weights[top] >= 1.0 - world.definite_tol) {
    // Already definite: trivial event, no assignment needed.
    world.ledger.push_back({event.time, event.candidates, weights, top,
                            identity_matrix(dim), world.state.amplitudes(),
                            world.state.amplitudes(), true});
    append_records(world, event, event_index, top);
    return {top, event.candidates.labels[top], event.candidates.names[top], 1.0,
            event_index};
  }

  // (3) sample a branch over the pruned support.
  std::vector<double> support = weights;
  for (double& w : support) {
    if (w <= tol::kZeroWeight) {
      w = 0.0;
    }
  }
  const std::size_t chosen = rng.sample_index(support);
  const StateVector phi =
      make_state(Vector(event.candidates.projectors[chosen] * world.state.amplitudes()));

  // (4) protect every dead branch recorded so far.
  std::vector<Matrix> protected_ranges;
  for (const AssignedRecord& record : world.assigned) {
    const double membership = (record.projector * world.state.amplitudes()).squaredNorm();
    if (membership < 0.5) {
      protected_ranges.push_back(record.projector);
    }
  }

  const HermitianOperator* strict =
      (world.mode == AssignmentMode::kStrict) ? &world.hamiltonian : nullptr;
  const UnitaryOperator v =
      construct_assignment_unitary(world.state, phi, protected_ranges, strict);

  // (5) realize the branch.
  const Vector pre = world.state.amplitudes();
  Vector post = v.matrix() * pre;
  const double fidelity = std::abs(phi.amplitudes().dot(post));
  if (fidelity < 1.0 - tol::kAssignmentFidelity) {
    throw NumericalError("assignment fidelity " + std::to_string(fidelity) +
                         " fell below 1 - " + std::to_string(tol::kAssignmentFidelity));
  }
  world.state = StateVector::assume_normalized(std::move(post));
  world.accumulated_unitary = v.matrix() * world.accumulated_unitary;

  const double realized =
      (event.candidates.projectors[chosen] * world.state.amplitudes()).squaredNorm();
  if (realized < 1.0 - world.definite_tol) {
    throw NumericalError("post-assignment state is not definite in the chosen "
                         "macrostate: weight " +
                         std::to_string(realized));
  }

  world.ledger.push_back({event.time, event.candidates, weights, chosen, v.matrix(), pre,
                          world.state.amplitudes(), false});
  append_records(world, event, event_index, chosen);
  return {chosen, event.candidates.labels[chosen], event.candidates.names[chosen],
          weights[chosen], event_index};
}

// -- ledger replay ------------------------------------------------------------------------

namespace {

LedgerVerification fail(std::size_t event_index, std::string detail) {
  return {false, event_index, std::move(detail)};
}

}  // namespace

LedgerVerification verify_ledger(const World& world) {
  const Eigen::Index dim = world.state.dim();
  const Matrix eye = identity_matrix(dim);

  for (std::size_t e = 0; e < world.ledger.size(); ++e) {
    const LedgerEvent& event = world.ledger[e];

    if (e > 0 && !(event.time > world.ledger[e - 1].time)) {
      return fail(e, "event times are not strictly increasing");
    }

    // Classification replay against the recorded candidates.
    const StateVector pre = StateVector::assume_normalized(event.pre_state);
    const std::vector<double> weights =
        membership_weights(pre, event.candidates.projectors);
    for (std::size_t a = 0; a < weights.size(); ++a) {
      if (std::abs(weights[a] - event.born_weights[a]) > tol::kLedgerReplay) {
        return fail(e, "recorded weight " + std::to_string(a) +
                           " deviates from the replayed classification");
      }
    }
    const double top = *std::max_element(weights.begin(), weights.end());
    const bool definite = top >= 1.0 - world.definite_tol;
    if (definite != event.trivial) {
      return fail(e, "recorded trivial flag contradicts the replayed classification");
    }
    const double total = std::accumulate(event.born_weights.begin(),
                                         event.born_weights.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-10) {
      return fail(e, "born weights sum to " + std::to_string(total));
    }

    // The recorded unitary must be unitary and map pre to post.
    const Matrix& v = event.assignment_unitary;
    if (v.rows() != dim || v.cols() != dim ||
        max_abs(v * v.adjoint() - eye) > tol::kUnitary) {
      return fail(e, "recorded assignment unitary is not unitary");
    }
    if ((v * event.pre_state - event.post_state).norm() > tol::kLedgerReplay) {
      return fail(e, "recorded unitary does not map pre_state to post_state");
    }

    // Immutability: no later unitary may disturb this event's records.
    for (std::size_t l = e + 1; l < world.ledger.size(); ++l) {
      const Matrix& later = world.ledger[l].assignment_unitary;
      for (std::size_t a = 0; a < event.candidates.size(); ++a) {
        if (max_abs(commutator(later, event.candidates.projectors[a])) >
            tol::kLedgerReplay) {
          return fail(l, "assignment unitary fails to commute with the records of "
                         "event " +
                             std::to_string(e));
        }
      }
      const Matrix& chosen_p = event.candidates.projectors[event.chosen_index];
      const Vector moved = later * event.post_state;
      if ((moved - chosen_p * moved).norm() > tol::kLedgerReplay) {
        return fail(l, "assignment unitary moves the post-state of event " +
                           std::to_string(e) + " out of its macrostate");
      }
    }
  }
  return {};
}

}  // namespace physim
