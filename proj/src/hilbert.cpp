#include "physim/hilbert.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace physim {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + ": expected a nonempty square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  if (m.rows() > kMaxDimension) {
    throw DimensionError(std::string(what) + ": dimension " + std::to_string(m.rows()) +
                         " exceeds the cap of " + std::to_string(kMaxDimension));
  }
}

}  // namespace

// -- value types --------------------------------------------------------------

StateVector StateVector::assume_normalized(Vector amplitudes) {
  if (amplitudes.size() == 0) {
    throw DimensionError("state requires at least one amplitude");
  }
  if (amplitudes.size() > kMaxDimension) {
    throw DimensionError("state dimension " + std::to_string(amplitudes.size()) +
                         " exceeds the cap of " + std::to_string(kMaxDimension));
  }
  const double norm = amplitudes.stableNorm();
  if (std::abs(norm - 1.0) > tol::kStateNorm) {
    throw NumericalError("state norm " + std::to_string(norm) + " deviates from 1 beyond " +
                         std::to_string(tol::kStateNorm));
  }
  return StateVector(std::move(amplitudes));
}

HermitianOperator HermitianOperator::from_matrix(Matrix m) {
  require_square(m, "hermitian operator");
  const double defect = max_abs(m - m.adjoint());
  if (defect > tol::kHermitian) {
    throw NotHermitianError("matrix deviates from its adjoint by " + std::to_string(defect));
  }
  return HermitianOperator(std::move(m));
}

HermitianOperator HermitianOperator::symmetrized(Matrix m) {
  require_square(m, "hermitian operator");
  Matrix h = 0.5 * (m + m.adjoint().eval());
  return HermitianOperator(std::move(h));
}

UnitaryOperator UnitaryOperator::from_matrix(Matrix m) {
  require_square(m, "unitary operator");
  const Matrix gram = m * m.adjoint();
  const double defect = max_abs(gram - Matrix::Identity(m.rows(), m.cols()));
  if (defect > tol::kUnitary) {
    throw NumericalError("matrix deviates from unitarity by " + std::to_string(defect));
  }
  return UnitaryOperator(std::move(m));
}

UnitaryOperator UnitaryOperator::identity(Eigen::Index dim) {
  return UnitaryOperator(Matrix::Identity(dim, dim));
}

// -- construction and evolution -------------------------------------------------

StateVector make_state(Vector amplitudes) {
  if (amplitudes.size() == 0) {
    throw DimensionError("state requires at least one amplitude");
  }
  if (amplitudes.size() > kMaxDimension) {
    throw DimensionError("state dimension " + std::to_string(amplitudes.size()) +
                         " exceeds the cap of " + std::to_string(kMaxDimension));
  }
  const double norm = amplitudes.stableNorm();
  if (norm == 0.0) {
    throw ZeroStateError("cannot normalize the zero vector");
  }
  return StateVector::assume_normalized(amplitudes / norm);
}

StateVector make_state(const std::vector<Complex>& amplitudes) {
  Vector v(static_cast<Eigen::Index>(amplitudes.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = amplitudes[static_cast<std::size_t>(i)];
  }
  return make_state(std::move(v));
}

namespace {

struct EigenSystem {
  Eigen::VectorXd values;
  Matrix vectors;
};

EigenSystem solve_hermitian(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("hermitian eigensolver failed to converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace

StateVector evolve(const StateVector& state, const HermitianOperator& hamiltonian,
                   double duration) {
  if (state.dim() != hamiltonian.dim()) {
    throw DimensionError("state dimension " + std::to_string(state.dim()) +
                         " does not match hamiltonian dimension " +
                         std::to_string(hamiltonian.dim()));
  }
  const EigenSystem sys = solve_hermitian(hamiltonian.matrix());
  Vector in_eigenbasis = sys.vectors.adjoint() * state.amplitudes();
  for (Eigen::Index k = 0; k < in_eigenbasis.size(); ++k) {
    in_eigenbasis(k) *= std::exp(Complex(0.0, -sys.values(k) * duration));
  }
  return StateVector::assume_normalized(sys.vectors * in_eigenbasis);
}

UnitaryOperator evolution_operator(const HermitianOperator& hamiltonian, double duration) {
  const EigenSystem sys = solve_hermitian(hamiltonian.matrix());
  Vector phases(sys.values.size());
  for (Eigen::Index k = 0; k < phases.size(); ++k) {
    phases(k) = std::exp(Complex(0.0, -sys.values(k) * duration));
  }
  return UnitaryOperator::from_matrix(sys.vectors * phases.asDiagonal() *
                                      sys.vectors.adjoint());
}

SpectralDecomposition spectral_decompose(const HermitianOperator& op, double group_tol) {
  const EigenSystem sys = solve_hermitian(op.matrix());
  const Eigen::Index dim = op.dim();

  SpectralDecomposition decomp;
  decomp.dim = dim;
  Eigen::Index start = 0;
  while (start < dim) {
    Eigen::Index stop = start + 1;
    while (stop < dim &&
           sys.values(stop) - sys.values(stop - 1) <=
               group_tol * std::max(1.0, std::abs(sys.values(stop)))) {
      ++stop;
    }
    EigenGroup group;
    group.multiplicity = stop - start;
    group.value = sys.values.segment(start, group.multiplicity).mean();
    group.basis = sys.vectors.middleCols(start, group.multiplicity);
    group.projector = group.basis * group.basis.adjoint();
    decomp.groups.push_back(std::move(group));
    start = stop;
  }

  Matrix rebuilt = Matrix::Zero(dim, dim);
  for (const EigenGroup& g : decomp.groups) {
    rebuilt += g.value * g.projector;
  }
  const double defect = max_abs(rebuilt - op.matrix());
  if (defect > tol::kReconstruction) {
    throw NumericalError("spectral reconstruction deviates from the operator by " +
                         std::to_string(defect));
  }
  return decomp;
}

// -- frame changes ---------------------------------------------------------------

Matrix conjugate_matrix(const Matrix& op, const Matrix& frame) {
  return frame * op * frame.adjoint();
}

HermitianOperator conjugate(const HermitianOperator& op, const UnitaryOperator& frame) {
  if (op.dim() != frame.dim()) {
    throw DimensionError("operator dimension " + std::to_string(op.dim()) +
                         " does not match frame dimension " + std::to_string(frame.dim()));
  }
  return HermitianOperator::symmetrized(conjugate_matrix(op.matrix(), frame.matrix()));
}

// -- tensor structure --------------------------------------------------------------

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

namespace {

template <typename Wrapped, typename Unwrap>
Matrix fold_kronecker(const std::vector<Wrapped>& factors, Unwrap unwrap) {
  if (factors.empty()) {
    throw DimensionError("tensor product requires at least one factor");
  }
  Matrix acc = unwrap(factors.front());
  for (std::size_t k = 1; k < factors.size(); ++k) {
    if (acc.rows() * unwrap(factors[k]).rows() > kMaxDimension) {
      throw DimensionError("tensor product dimension exceeds the cap of " +
                           std::to_string(kMaxDimension));
    }
    acc = kronecker(acc, unwrap(factors[k]));
  }
  return acc;
}

}  // namespace

StateVector tensor(const std::vector<StateVector>& factors) {
  Matrix joint = fold_kronecker(factors, [](const StateVector& s) -> Matrix {
    return s.amplitudes();
  });
  return StateVector::assume_normalized(joint.col(0));
}

HermitianOperator tensor(const std::vector<HermitianOperator>& factors) {
  return HermitianOperator::from_matrix(
      fold_kronecker(factors, [](const HermitianOperator& h) { return h.matrix(); }));
}

UnitaryOperator tensor(const std::vector<UnitaryOperator>& factors) {
  return UnitaryOperator::from_matrix(
      fold_kronecker(factors, [](const UnitaryOperator& u) { return u.matrix(); }));
}

Matrix embed(const Matrix& op, std::size_t factor_index,
             const std::vector<Eigen::Index>& factor_dims) {
  if (factor_index >= factor_dims.size()) {
    throw IndexError("factor index " + std::to_string(factor_index) +
                     " out of range for " + std::to_string(factor_dims.size()) + " factors");
  }
  if (op.rows() != factor_dims[factor_index] || op.cols() != factor_dims[factor_index]) {
    throw DimensionError("operator dimension " + std::to_string(op.rows()) +
                         " does not match factor dimension " +
                         std::to_string(factor_dims[factor_index]));
  }
  Eigen::Index before = 1;
  Eigen::Index after = 1;
  for (std::size_t k = 0; k < factor_dims.size(); ++k) {
    if (k < factor_index) {
      before *= factor_dims[k];
    } else if (k > factor_index) {
      after *= factor_dims[k];
    }
  }
  return kronecker(kronecker(identity_matrix(before), op), identity_matrix(after));
}

// -- scalars -------------------------------------------------------------------------

double expectation(const StateVector& state, const HermitianOperator& op) {
  if (state.dim() != op.dim()) {
    throw DimensionError("state dimension " + std::to_string(state.dim()) +
                         " does not match operator dimension " + std::to_string(op.dim()));
  }
  const Complex value = state.amplitudes().dot(op.matrix() * state.amplitudes());
  if (std::abs(value.imag()) > tol::kExpectationError) {
    throw NumericalError("expectation value has imaginary residue " +
                         std::to_string(value.imag()));
  }
  return value.real();
}

Matrix identity_matrix(Eigen::Index dim) { return Matrix::Identity(dim, dim); }

Matrix pauli_x() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(1, 0), Complex(1, 0), Complex(0, 0);
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(-1, 0);
  return m;
}

}  // namespace physim
