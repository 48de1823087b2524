#pragma once

#include <vector>

#include "physim/hilbert.hpp"

namespace physim {

// A macrostate label is the tuple of eigenvalues (one per generating operator)
// attached to a joint eigenspace. Tuples compare lexicographically.
using MacroLabel = std::vector<double>;

// Orthogonal projector family resolving the identity, one projector per joint
// eigenspace, labels sorted lexicographically. Immutable after construction.
struct MacrostateDecomposition {
  std::vector<MacroLabel> labels;
  std::vector<Matrix> projectors;
  std::vector<Eigen::Index> ranks;
  Eigen::Index dim = 0;

  std::size_t size() const { return labels.size(); }
};

// True iff every pairwise commutator of the family has Frobenius norm below tol.
bool check_compatible(const std::vector<HermitianOperator>& ops, double tol);

// Finest joint eigenspace decomposition of a commuting family. Labels carry the
// grouped eigenvalue of each operator in family order.
// Non-commuting input -> NotCommutingError.
MacrostateDecomposition joint_eigenspace_decomposition(
    const std::vector<HermitianOperator>& ops,
    double group_tol = tol::kSpectralGroup, double commute_tol = tol::kCommuting);

// Wraps an externally built projector family (sorted by label, validated:
// Hermitian, idempotent, pairwise orthogonal, complete). Validation failure
// -> DecompositionError.
MacrostateDecomposition decomposition_from_projectors(std::vector<MacroLabel> labels,
                                                      std::vector<Matrix> projectors);

// Reassembles the j-th generating operator: sum over labels of label[j] * P.
HermitianOperator macro_operator(const MacrostateDecomposition& decomp, std::size_t j);

// Where a state sits relative to a decomposition: Definite in one macrostate
// (weight >= 1 - definite_tol) or Superposed with the full weight vector.
struct Classification {
  bool definite = false;
  std::size_t label_index = 0;     // meaningful when definite
  std::vector<double> weights;     // <psi|P_a|psi>, aligned with decomp labels
};

Classification classify(const StateVector& state, const MacrostateDecomposition& decomp,
                        double definite_tol = tol::kDefinite);

// ||P_a psi||^2 for an arbitrary projector family (no completeness assumed).
std::vector<double> membership_weights(const StateVector& state,
                                       const std::vector<Matrix>& projectors);

// Macrostate entropy: log2 of the projector rank. The designated initial
// macrostate of a run must take the minimal value in its decomposition.
double entropy(const MacrostateDecomposition& decomp, std::size_t label_index);

}  // namespace physim
