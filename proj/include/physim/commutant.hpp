#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "physim/hilbert.hpp"

namespace physim {

// Real dimension of the unitary commutant manifold of H: the sum of squared
// eigenvalue multiplicities. Always between dim and dim^2.
Eigen::Index commutant_dimension(const HermitianOperator& hamiltonian,
                                 double group_tol = tol::kSpectralGroup);

// Draws a Haar-distributed unitary from the commutant of H: one independent
// Haar block per eigenspace, assembled back in the original basis.
// Deterministic for a fixed seed.
UnitaryOperator sample_commuting_unitary(const HermitianOperator& hamiltonian,
                                         std::uint64_t seed,
                                         double group_tol = tol::kSpectralGroup);

// The frame-changed family S A_i S^dagger, elementwise.
std::vector<HermitianOperator> equivalent_assignment(
    const std::vector<HermitianOperator>& ops, const UnitaryOperator& frame);

// Builds one Hermitian operator out of an operator family; clause (iv) of
// verify_relation_preservation checks that the frame change commutes with it.
using HamiltonianFunctional =
    std::function<Matrix(const std::vector<HermitianOperator>&)>;

// Plain family sum: the simplest functional that any frame change preserves.
Matrix sum_functional(const std::vector<HermitianOperator>& ops);

// Largest deviation seen in each clause of the equivalence check.
struct RelationReport {
  double conjugation_defect = 0.0;  // primed_i vs S ops_i S^dagger
  double spectrum_defect = 0.0;     // sorted eigenvalues, elementwise
  double commutator_defect = 0.0;   // [primed_i, primed_j] vs S [ops_i, ops_j] S^dagger
  double functional_defect = 0.0;   // functional(primed) vs S functional(ops) S^dagger

  double max_defect() const;
};

// Checks that `primed` really is the S-frame image of `ops`: conjugation,
// spectra, commutators and the supplied functional all preserved within
// `tolerance`. Throws RelationViolation naming the first failed clause.
RelationReport verify_relation_preservation(
    const std::vector<HermitianOperator>& ops,
    const std::vector<HermitianOperator>& primed, const UnitaryOperator& frame,
    double tolerance, const HamiltonianFunctional& functional = sum_functional);

}  // namespace physim
