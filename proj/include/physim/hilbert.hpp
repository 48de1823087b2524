#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "physim/errors.hpp"

namespace physim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Hilbert-space dimensions are capped: dense storage only, desk-scale runs.
inline constexpr Eigen::Index kMaxDimension = 4096;

// Natural units throughout: hbar = 1, so exp(-i H t) generates time evolution.
namespace tol {
inline constexpr double kStateNorm = 1e-12;        // |norm - 1| bound for states
inline constexpr double kHermitian = 1e-12;        // entrywise A vs A^dagger
inline constexpr double kUnitary = 1e-10;          // entrywise U U^dagger vs I
inline constexpr double kSpectralGroup = 1e-9;     // eigenvalue grouping (relative)
inline constexpr double kReconstruction = 1e-9;    // sum lambda_k P_k vs H
inline constexpr double kProjector = 1e-10;        // orthogonality / completeness
inline constexpr double kExpectationDiscard = 1e-10;  // imaginary part silently dropped
inline constexpr double kExpectationError = 1e-8;     // imaginary part -> NumericalError
inline constexpr double kDefinite = 1e-9;          // macrostate membership weight
inline constexpr double kZeroWeight = 1e-15;       // branch weights excluded from support
inline constexpr double kAssignmentFidelity = 1e-10;  // |<phi|V psi>| vs 1
inline constexpr double kProtectedOverlap = 1e-9;  // state overlap with protected ranges
inline constexpr double kStrictCommutator = 1e-9;  // ||V H - H V|| in strict mode
inline constexpr double kLedgerReplay = 1e-9;      // verify_ledger tolerances
inline constexpr double kCommuting = 1e-9;         // default pairwise commutator bound
}  // namespace tol

// -- value types --------------------------------------------------------------

// Unit-norm ket. Immutable after construction.
class StateVector {
 public:
  // Checks the unit-norm invariant instead of normalizing.
  static StateVector assume_normalized(Vector amplitudes);

  Eigen::Index dim() const { return amp_.size(); }
  const Vector& amplitudes() const { return amp_; }

 private:
  explicit StateVector(Vector amplitudes) : amp_(std::move(amplitudes)) {}
  Vector amp_;
};

// Dense Hermitian matrix, validated entrywise against its adjoint.
class HermitianOperator {
 public:
  static HermitianOperator from_matrix(Matrix m);
  // For operators computed from other validated pieces: averages away the
  // float-level asymmetry of (m + m^dagger)/2 before validating.
  static HermitianOperator symmetrized(Matrix m);

  Eigen::Index dim() const { return mat_.rows(); }
  const Matrix& matrix() const { return mat_; }

 private:
  explicit HermitianOperator(Matrix m) : mat_(std::move(m)) {}
  Matrix mat_;
};

// Dense unitary matrix, validated against U U^dagger = I.
class UnitaryOperator {
 public:
  static UnitaryOperator from_matrix(Matrix m);
  static UnitaryOperator identity(Eigen::Index dim);

  Eigen::Index dim() const { return mat_.rows(); }
  const Matrix& matrix() const { return mat_; }

 private:
  explicit UnitaryOperator(Matrix m) : mat_(std::move(m)) {}
  Matrix mat_;
};

// One degenerate eigenvalue of a Hermitian operator: the grouped value, its
// multiplicity, an orthonormal basis of the eigenspace (columns) and the
// eigenspace projector basis * basis^dagger.
struct EigenGroup {
  double value = 0.0;
  Eigen::Index multiplicity = 0;
  Matrix basis;
  Matrix projector;
};

// Eigenvalue groups in ascending order; multiplicities sum to dim.
struct SpectralDecomposition {
  std::vector<EigenGroup> groups;
  Eigen::Index dim = 0;

  std::size_t group_count() const { return groups.size(); }
};

// -- operations ----------------------------------------------------------------

// Normalizes the amplitudes into a state. Zero vector -> ZeroStateError,
// empty -> DimensionError, dim > kMaxDimension -> DimensionError.
StateVector make_state(Vector amplitudes);
StateVector make_state(const std::vector<Complex>& amplitudes);

// Applies exp(-i H t) computed by spectral decomposition (never a power series).
StateVector evolve(const StateVector& state, const HermitianOperator& hamiltonian,
                   double duration);

// The unitary exp(-i H t) itself, for callers that reuse one propagator.
UnitaryOperator evolution_operator(const HermitianOperator& hamiltonian, double duration);

// Groups eigenvalues that sit within group_tol * max(1, |lambda|) of each other.
SpectralDecomposition spectral_decompose(const HermitianOperator& op,
                                         double group_tol = tol::kSpectralGroup);

// S A S^dagger for unitary S (spectrum-preserving frame change).
HermitianOperator conjugate(const HermitianOperator& op, const UnitaryOperator& frame);
Matrix conjugate_matrix(const Matrix& op, const Matrix& frame);

// Kronecker products; the leftmost factor owns the slowest-varying index.
StateVector tensor(const std::vector<StateVector>& factors);
HermitianOperator tensor(const std::vector<HermitianOperator>& factors);
UnitaryOperator tensor(const std::vector<UnitaryOperator>& factors);
Matrix kronecker(const Matrix& a, const Matrix& b);

// Lifts a factor-local operator to the full space: I x ... x op x ... x I.
Matrix embed(const Matrix& op, std::size_t factor_index,
             const std::vector<Eigen::Index>& factor_dims);

// <psi| A |psi>. Imaginary residue above tol::kExpectationError -> NumericalError.
double expectation(const StateVector& state, const HermitianOperator& op);

// -- small helpers ---------------------------------------------------------------

Matrix identity_matrix(Eigen::Index dim);
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }
inline double frobenius(const Matrix& m) { return m.norm(); }

}  // namespace physim
