#pragma once

#include <optional>
#include <string>
#include <vector>

#include "physim/hilbert.hpp"
#include "physim/macrostate.hpp"
#include "physim/rng.hpp"

namespace physim {

// free: any assignment unitary is admissible at an event.
// strict: the assignment must also commute with the world Hamiltonian;
//         otherwise the event raises StrictModeUnsatisfiable instead of
//         silently degrading.
enum class AssignmentMode { kFree, kStrict };

// The candidate macrostates offered at one measurement event. Unlike a full
// MacrostateDecomposition this family may cover only the reachable sector;
// step() validates orthogonality and completeness against the live state.
struct CandidateSet {
  std::vector<MacroLabel> labels;
  std::vector<std::string> names;  // outcome names used in reports
  std::vector<Matrix> projectors;

  static CandidateSet from_decomposition(const MacrostateDecomposition& decomp,
                                         std::vector<std::string> names = {});
  std::size_t size() const { return projectors.size(); }
};

// One stretch of unitary evolution with its precomputed propagator. Scenario
// lowering builds these once per run so that every trial reuses identical
// matrices (determinism) instead of re-exponentiating per trial.
struct EvolutionSegment {
  UnitaryOperator op;
  double duration = 0.0;
};

// A scheduled observation: when it happens, what may be seen, and how the
// state gets from the previous event to this one. Empty segments mean plain
// evolution under the world Hamiltonian across the gap.
struct ScheduledEvent {
  double time = 0.0;
  CandidateSet candidates;
  std::vector<EvolutionSegment> segments;
};

// Append-only record of one event: enough to replay the classification, the
// sampled branch and the assignment unitary independently later.
struct LedgerEvent {
  double time = 0.0;
  CandidateSet candidates;
  std::vector<double> born_weights;  // raw <psi|P_a|psi>, aligned with candidates
  std::size_t chosen_index = 0;
  Matrix assignment_unitary;
  Vector pre_state;
  Vector post_state;
  bool trivial = false;  // state was already definite: weight 1, V = I
};

// A candidate projector that has acquired physical meaning at some event,
// either as the realized macrostate (chosen) or as a dead branch the state
// permanently left. Dead branches are protected: no later assignment may
// touch them.
struct AssignedRecord {
  MacroLabel label;
  std::string name;
  Matrix projector;
  std::size_t event_index = 0;
  bool chosen = false;
};

// Single-history simulation state. A World value is confined to one logical
// thread per trial; all cross-module types it holds are immutable values.
struct World {
  StateVector state;
  double time = 0.0;
  HermitianOperator hamiltonian;
  AssignmentMode mode = AssignmentMode::kFree;
  double definite_tol = tol::kDefinite;

  // Designated initial macrostate (minimal entropy). Not a measurement
  // record: the first assignment may move the state out of it.
  Matrix initial_macrostate;

  std::vector<AssignedRecord> assigned;
  std::vector<LedgerEvent> ledger;

  // Running product of every evolution and assignment unitary applied so far.
  Matrix accumulated_unitary;
};

// Fresh world with the rank-1 initial macrostate |psi0><psi0| (entropy 0).
World make_world(StateVector initial_state, HermitianOperator hamiltonian,
                 AssignmentMode mode = AssignmentMode::kFree,
                 double definite_tol = tol::kDefinite);

// Same, but with an explicit initial decomposition and a designated initial
// macrostate. The state must be definite there and the designated entropy
// must be minimal over the decomposition (DecompositionError otherwise).
World make_world(StateVector initial_state, HermitianOperator hamiltonian,
                 const MacrostateDecomposition& initial_decomposition,
                 std::size_t designated_index,
                 AssignmentMode mode = AssignmentMode::kFree,
                 double definite_tol = tol::kDefinite);

// What step() reports back: which branch was realized and with what weight.
struct PhysicationOutcome {
  std::size_t label_index = 0;  // index into the event's candidate set
  MacroLabel label;
  std::string name;
  double weight = 1.0;          // raw Born weight of the realized branch
  std::size_t event_index = 0;  // index into world.ledger
};

// Advances the world to the event time, classifies the state against the
// candidates, samples a branch if superposed, and applies the assignment
// unitary that realizes it. Appends one ledger event either way.
PhysicationOutcome step(World& world, const ScheduledEvent& event, RngStream& rng);

// Observable assigned to a first observation: `state` becomes an exact
// eigenvector with the leading spectrum value; the remaining values fill the
// orthogonal complement (grouped when dim exceeds the spectrum length).
HermitianOperator fresh_observable(const StateVector& state,
                                   const std::vector<double>& spectrum);

// Minimal two-plane rotation taking psi to phi: differs from identity only on
// span{psi, phi}, acts as identity on every protected range, and fixes the
// global phase so that <phi|V psi> is real positive. If strict_hamiltonian is
// given the result must commute with it (StrictModeUnsatisfiable otherwise).
UnitaryOperator construct_assignment_unitary(
    const StateVector& psi, const StateVector& phi,
    const std::vector<Matrix>& protected_projectors,
    const HermitianOperator* strict_hamiltonian = nullptr);

// Replays the whole ledger against its recorded states and unitaries.
struct LedgerVerification {
  bool ok = true;
  std::size_t event_index = 0;  // first violated event when !ok
  std::string detail;

  explicit operator bool() const { return ok; }
};

LedgerVerification verify_ledger(const World& world);

}  // namespace physim
