#include "physim/commutant.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace physim {

Eigen::Index commutant_dimension(const HermitianOperator& hamiltonian, double group_tol) {
  const SpectralDecomposition decomp = spectral_decompose(hamiltonian, group_tol);
  Eigen::Index total = 0;
  for (const EigenGroup& g : decomp.groups) {
    total += g.multiplicity * g.multiplicity;
  }
  return total;
}

namespace {

// Haar-distributed unitary of size n: QR of a complex Ginibre matrix with the
// R-diagonal phases folded into Q.
Matrix haar_unitary(Eigen::Index n, std::mt19937_64& engine) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix ginibre(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      ginibre(i, j) = Complex(gauss(engine), gauss(engine));
    }
  }
  Eigen::HouseholderQR<Matrix> qr(ginibre);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex d = r(k, k);
    q.col(k) *= (std::abs(d) > 0.0) ? d / std::abs(d) : Complex(1.0, 0.0);
  }
  return q;
}

}  // namespace

UnitaryOperator sample_commuting_unitary(const HermitianOperator& hamiltonian,
                                         std::uint64_t seed, double group_tol) {
  const SpectralDecomposition decomp = spectral_decompose(hamiltonian, group_tol);
  std::mt19937_64 engine(seed);

  Matrix u = Matrix::Zero(hamiltonian.dim(), hamiltonian.dim());
  for (const EigenGroup& g : decomp.groups) {
    u += g.basis * haar_unitary(g.multiplicity, engine) * g.basis.adjoint();
  }

  UnitaryOperator result = UnitaryOperator::from_matrix(std::move(u));
  const double defect =
      frobenius(commutator(result.matrix(), hamiltonian.matrix()));
  if (defect > tol::kCommuting) {
    throw NumericalError("sampled unitary fails to commute: defect " +
                         std::to_string(defect));
  }
  return result;
}

std::vector<HermitianOperator> equivalent_assignment(
    const std::vector<HermitianOperator>& ops, const UnitaryOperator& frame) {
  std::vector<HermitianOperator> primed;
  primed.reserve(ops.size());
  for (const HermitianOperator& op : ops) {
    primed.push_back(conjugate(op, frame));
  }
  return primed;
}

Matrix sum_functional(const std::vector<HermitianOperator>& ops) {
  if (ops.empty()) {
    throw DimensionError("functional requires at least one operator");
  }
  Matrix acc = ops.front().matrix();
  for (std::size_t k = 1; k < ops.size(); ++k) {
    acc += ops[k].matrix();
  }
  return acc;
}

double RelationReport::max_defect() const {
  return std::max({conjugation_defect, spectrum_defect, commutator_defect,
                   functional_defect});
}

namespace {

Eigen::VectorXd sorted_spectrum(const Matrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigensolver failed while comparing spectra");
  }
  return solver.eigenvalues();  // already ascending
}

}  // namespace

RelationReport verify_relation_preservation(
    const std::vector<HermitianOperator>& ops,
    const std::vector<HermitianOperator>& primed, const UnitaryOperator& frame,
    double tolerance, const HamiltonianFunctional& functional) {
  if (ops.size() != primed.size() || ops.empty()) {
    throw DimensionError("operator families must be nonempty and equally sized");
  }
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (ops[i].dim() != frame.dim() || primed[i].dim() != frame.dim()) {
      throw DimensionError("family member " + std::to_string(i) +
                           " does not match the frame dimension");
    }
  }

  RelationReport report;

  // (i) conjugation
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const double defect = max_abs(primed[i].matrix() -
                                  conjugate_matrix(ops[i].matrix(), frame.matrix()));
    report.conjugation_defect = std::max(report.conjugation_defect, defect);
  }
  if (report.conjugation_defect > tolerance) {
    throw RelationViolation("clause (i) conjugation: defect " +
                            std::to_string(report.conjugation_defect));
  }

  // (ii) spectra
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const Eigen::VectorXd a = sorted_spectrum(ops[i].matrix());
    const Eigen::VectorXd b = sorted_spectrum(primed[i].matrix());
    report.spectrum_defect =
        std::max(report.spectrum_defect, (a - b).cwiseAbs().maxCoeff());
  }
  if (report.spectrum_defect > tolerance) {
    throw RelationViolation("clause (ii) spectra: defect " +
                            std::to_string(report.spectrum_defect));
  }

  // (iii) commutators
  for (std::size_t i = 0; i < ops.size(); ++i) {
    for (std::size_t j = i + 1; j < ops.size(); ++j) {
      const Matrix lhs = commutator(primed[i].matrix(), primed[j].matrix());
      const Matrix rhs = conjugate_matrix(
          commutator(ops[i].matrix(), ops[j].matrix()), frame.matrix());
      report.commutator_defect = std::max(report.commutator_defect, max_abs(lhs - rhs));
    }
  }
  if (report.commutator_defect > tolerance) {
    throw RelationViolation("clause (iii) commutators: defect " +
                            std::to_string(report.commutator_defect));
  }

  // (iv) supplied Hamiltonian functional
  const Matrix lhs = functional(primed);
  const Matrix rhs = conjugate_matrix(functional(ops), frame.matrix());
  report.functional_defect = max_abs(lhs - rhs);
  if (report.functional_defect > tolerance) {
    throw RelationViolation("clause (iv) functional: defect " +
                            std::to_string(report.functional_defect));
  }

  return report;
}

}  // namespace physim
