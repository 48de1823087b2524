#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "physim/hilbert.hpp"

using namespace physim;

namespace {
constexpr double kTight = 1e-12;
constexpr double kLoose = 1e-9;
}  // namespace

TEST_CASE("make_state normalizes and validates") {
  Vector raw(2);
  raw << Complex(3.0, 0.0), Complex(4.0, 0.0);
  const StateVector psi = make_state(raw);
  CHECK(psi.amplitudes().norm() == doctest::Approx(1.0).epsilon(kTight));
  CHECK(std::abs(psi.amplitudes()(0) - Complex(0.6, 0.0)) < kTight);
  CHECK(std::abs(psi.amplitudes()(1) - Complex(0.8, 0.0)) < kTight);

  CHECK_THROWS_AS(make_state(Vector::Zero(3)), ZeroStateError);
  CHECK_THROWS_AS(make_state(Vector(0)), DimensionError);
  CHECK_THROWS_AS(make_state(Vector::Ones(kMaxDimension + 1)), DimensionError);
}

TEST_CASE("assume_normalized rejects unnormalized input") {
  Vector good(2);
  good << Complex(1.0, 0.0), Complex(0.0, 0.0);
  CHECK_NOTHROW(StateVector::assume_normalized(good));
  Vector bad(2);
  bad << Complex(1.0, 0.0), Complex(0.5, 0.0);
  CHECK_THROWS_AS(StateVector::assume_normalized(bad), NumericalError);
}

TEST_CASE("hermitian validation and symmetrization") {
  Matrix h(2, 2);
  h << Complex(1.0, 0.0), Complex(0.0, 1.0), Complex(0.0, -1.0), Complex(-1.0, 0.0);
  CHECK_NOTHROW(HermitianOperator::from_matrix(h));

  Matrix bad = h;
  bad(0, 1) = Complex(0.5, 0.0);
  CHECK_THROWS_AS(HermitianOperator::from_matrix(bad), NotHermitianError);

  // Float-level asymmetry is repaired by symmetrized but rejected by from_matrix
  // when it exceeds the entrywise bound.
  Matrix nearly = h;
  nearly(0, 1) += Complex(0.0, 1e-11);
  const HermitianOperator fixed = HermitianOperator::symmetrized(nearly);
  CHECK(max_abs(fixed.matrix() - fixed.matrix().adjoint()) == 0.0);
}

TEST_CASE("unitary validation") {
  CHECK_NOTHROW(UnitaryOperator::from_matrix(pauli_x()));
  Matrix bad = pauli_x();
  bad(0, 1) = Complex(0.9, 0.0);
  CHECK_THROWS_AS(UnitaryOperator::from_matrix(bad), NumericalError);
  CHECK(max_abs(UnitaryOperator::identity(3).matrix() - identity_matrix(3)) == 0.0);
}

TEST_CASE("evolution matches the closed form for a qubit") {
  // exp(-i sigma_z t) |+> = (e^{-it}|0> + e^{it}|1>)/sqrt(2)
  const HermitianOperator h = HermitianOperator::from_matrix(pauli_z());
  Vector plus(2);
  plus << Complex(1.0, 0.0), Complex(1.0, 0.0);
  const StateVector psi = make_state(plus);
  const double t = 0.7;
  const StateVector out = evolve(psi, h, t);
  const Complex expected0 = std::exp(Complex(0.0, -t)) / std::sqrt(2.0);
  const Complex expected1 = std::exp(Complex(0.0, t)) / std::sqrt(2.0);
  CHECK(std::abs(out.amplitudes()(0) - expected0) < kTight);
  CHECK(std::abs(out.amplitudes()(1) - expected1) < kTight);
}

TEST_CASE("evolution composes over time and preserves norm") {
  std::mt19937_64 gen(11);
  const Matrix hm = testing_oracles::random_hermitian(5, gen);
  const HermitianOperator h = HermitianOperator::symmetrized(hm);
  const StateVector psi = make_state(testing_oracles::random_state_vector(5, gen));

  const StateVector one_shot = evolve(psi, h, 1.3);
  const StateVector two_step = evolve(evolve(psi, h, 0.5), h, 0.8);
  CHECK((one_shot.amplitudes() - two_step.amplitudes()).norm() < kLoose);
  CHECK(std::abs(one_shot.amplitudes().norm() - 1.0) < kTight);

  const UnitaryOperator u = evolution_operator(h, 1.3);
  CHECK((u.matrix() * psi.amplitudes() - one_shot.amplitudes()).norm() < kLoose);
  CHECK(max_abs(u.matrix() * u.matrix().adjoint() - identity_matrix(5)) < 1e-10);
}

TEST_CASE("zero duration evolution is the identity") {
  const HermitianOperator h = HermitianOperator::from_matrix(pauli_y());
  const UnitaryOperator u = evolution_operator(h, 0.0);
  CHECK(max_abs(u.matrix() - identity_matrix(2)) < kTight);
}

TEST_CASE("spectral decomposition groups degenerate eigenvalues") {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = 2.0;
  m(1, 1) = 2.0;
  m(2, 2) = -1.0;
  m(3, 3) = 5.0;
  const SpectralDecomposition dec = spectral_decompose(HermitianOperator::from_matrix(m));
  REQUIRE(dec.group_count() == 3);
  CHECK(dec.groups[0].value == doctest::Approx(-1.0));
  CHECK(dec.groups[1].value == doctest::Approx(2.0));
  CHECK(dec.groups[2].value == doctest::Approx(5.0));
  CHECK(dec.groups[0].multiplicity == 1);
  CHECK(dec.groups[1].multiplicity == 2);
  CHECK(dec.groups[2].multiplicity == 1);

  // Reconstruction and projector algebra.
  Matrix rebuilt = Matrix::Zero(4, 4);
  Matrix total = Matrix::Zero(4, 4);
  for (const EigenGroup& g : dec.groups) {
    rebuilt += g.value * g.projector;
    total += g.projector;
    CHECK(max_abs(g.projector * g.projector - g.projector) < 1e-10);
  }
  CHECK(max_abs(rebuilt - m) < kLoose);
  CHECK(max_abs(total - identity_matrix(4)) < 1e-10);
  CHECK(max_abs(dec.groups[1].projector * dec.groups[2].projector) < 1e-10);
}

TEST_CASE("spectral decomposition of a random hermitian reconstructs it") {
  std::mt19937_64 gen(23);
  for (int rep = 0; rep < 5; ++rep) {
    const HermitianOperator h =
        HermitianOperator::symmetrized(testing_oracles::random_hermitian(6, gen));
    const SpectralDecomposition dec = spectral_decompose(h);
    Matrix rebuilt = Matrix::Zero(6, 6);
    Eigen::Index mult_sum = 0;
    for (const EigenGroup& g : dec.groups) {
      rebuilt += g.value * g.projector;
      mult_sum += g.multiplicity;
    }
    CHECK(mult_sum == 6);
    CHECK(max_abs(rebuilt - h.matrix()) < tol::kReconstruction);
    for (std::size_t k = 1; k < dec.group_count(); ++k) {
      CHECK(dec.groups[k].value > dec.groups[k - 1].value);
    }
  }
}

TEST_CASE("conjugation preserves the spectrum") {
  std::mt19937_64 gen(31);
  const HermitianOperator h =
      HermitianOperator::symmetrized(testing_oracles::random_hermitian(4, gen));
  const UnitaryOperator s =
      UnitaryOperator::from_matrix(testing_oracles::random_unitary(4, gen));
  const HermitianOperator moved = conjugate(h, s);

  Eigen::SelfAdjointEigenSolver<Matrix> before(h.matrix(), Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Matrix> after(moved.matrix(), Eigen::EigenvaluesOnly);
  CHECK((before.eigenvalues() - after.eigenvalues()).cwiseAbs().maxCoeff() < kLoose);
  CHECK(max_abs(conjugate_matrix(h.matrix(), s.matrix()) - moved.matrix()) < kTight);
}

TEST_CASE("kronecker product against a hand-computed case") {
  const Matrix k = kronecker(pauli_z(), pauli_x());
  Matrix expected = Matrix::Zero(4, 4);
  expected(0, 1) = 1.0;
  expected(1, 0) = 1.0;
  expected(2, 3) = -1.0;
  expected(3, 2) = -1.0;
  CHECK(max_abs(k - expected) == 0.0);
}

TEST_CASE("tensor of states uses the leftmost-slowest convention") {
  Vector a(2), b(2);
  a << Complex(0.6, 0.0), Complex(0.8, 0.0);
  b << Complex(0.0, 0.0), Complex(1.0, 0.0);
  const StateVector joint = tensor({make_state(a), make_state(b)});
  REQUIRE(joint.dim() == 4);
  CHECK(std::abs(joint.amplitudes()(1) - Complex(0.6, 0.0)) < kTight);  // |0>|1>
  CHECK(std::abs(joint.amplitudes()(3) - Complex(0.8, 0.0)) < kTight);  // |1>|1>
}

TEST_CASE("embed places a factor operator with identities elsewhere") {
  const std::vector<Eigen::Index> dims = {2, 2};
  CHECK(max_abs(embed(pauli_x(), 0, dims) - kronecker(pauli_x(), identity_matrix(2))) ==
        0.0);
  CHECK(max_abs(embed(pauli_x(), 1, dims) - kronecker(identity_matrix(2), pauli_x())) ==
        0.0);
  CHECK_THROWS_AS(embed(pauli_x(), 2, dims), IndexError);
  CHECK_THROWS_AS(embed(identity_matrix(3), 0, dims), DimensionError);
}

TEST_CASE("tensor of operators distributes over the factors") {
  const HermitianOperator a = HermitianOperator::from_matrix(pauli_z());
  const HermitianOperator b = HermitianOperator::from_matrix(pauli_y());
  const HermitianOperator joint = tensor(std::vector<HermitianOperator>{a, b});
  CHECK(max_abs(joint.matrix() - kronecker(pauli_z(), pauli_y())) < kTight);

  const UnitaryOperator ua = UnitaryOperator::from_matrix(pauli_x());
  const UnitaryOperator ub = UnitaryOperator::identity(2);
  const UnitaryOperator ujoint = tensor(std::vector<UnitaryOperator>{ua, ub});
  CHECK(max_abs(ujoint.matrix() - kronecker(pauli_x(), identity_matrix(2))) < kTight);
}

TEST_CASE("expectation values on known states") {
  Vector zero(2), plus(2);
  zero << Complex(1.0, 0.0), Complex(0.0, 0.0);
  plus << Complex(1.0, 0.0), Complex(1.0, 0.0);
  const HermitianOperator z = HermitianOperator::from_matrix(pauli_z());
  CHECK(expectation(make_state(zero), z) == doctest::Approx(1.0).epsilon(kTight));
  CHECK(expectation(make_state(plus), z) == doctest::Approx(0.0).epsilon(kTight));
}
