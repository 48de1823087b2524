#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "physim/macrostate.hpp"

using namespace physim;

namespace {

HermitianOperator diag_op(const std::vector<double>& values) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(values.size()),
                          static_cast<Eigen::Index>(values.size()));
  for (std::size_t k = 0; k < values.size(); ++k) {
    m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = values[k];
  }
  return HermitianOperator::from_matrix(m);
}

}  // namespace

TEST_CASE("single-operator decomposition sorts labels ascending") {
  const auto dec =
      joint_eigenspace_decomposition({HermitianOperator::from_matrix(pauli_z())});
  REQUIRE(dec.size() == 2);
  CHECK(dec.labels[0] == MacroLabel{-1.0});
  CHECK(dec.labels[1] == MacroLabel{1.0});
  CHECK(dec.ranks[0] == 1);
  CHECK(dec.ranks[1] == 1);
  // sigma_z has -1 on |1><1|.
  CHECK(std::abs(dec.projectors[0](1, 1) - Complex(1.0, 0.0)) < 1e-12);
  CHECK(std::abs(dec.projectors[1](0, 0) - Complex(1.0, 0.0)) < 1e-12);
}

TEST_CASE("joint decomposition refines degenerate factors") {
  // A alone cannot split {e0, e1}; B refines it. Finest decomposition is
  // three rank-1 spaces with lexicographically sorted labels.
  const HermitianOperator a = diag_op({1.0, 1.0, 2.0});
  const HermitianOperator b = diag_op({3.0, 4.0, 5.0});
  const auto dec = joint_eigenspace_decomposition({a, b});
  REQUIRE(dec.size() == 3);
  CHECK(dec.labels[0] == MacroLabel{1.0, 3.0});
  CHECK(dec.labels[1] == MacroLabel{1.0, 4.0});
  CHECK(dec.labels[2] == MacroLabel{2.0, 5.0});
  for (std::size_t k = 0; k < dec.size(); ++k) {
    CHECK(dec.ranks[k] == 1);
  }
}

TEST_CASE("two-qubit commuting family yields the product decomposition") {
  const HermitianOperator za =
      HermitianOperator::from_matrix(kronecker(pauli_z(), identity_matrix(2)));
  const HermitianOperator zb =
      HermitianOperator::from_matrix(kronecker(identity_matrix(2), pauli_z()));
  const auto dec = joint_eigenspace_decomposition({za, zb});
  REQUIRE(dec.size() == 4);
  CHECK(dec.labels[0] == MacroLabel{-1.0, -1.0});
  CHECK(dec.labels[3] == MacroLabel{1.0, 1.0});
  Matrix total = Matrix::Zero(4, 4);
  for (const Matrix& p : dec.projectors) {
    total += p;
  }
  CHECK(max_abs(total - identity_matrix(4)) < 1e-10);
}

TEST_CASE("partial family keeps degenerate blocks together") {
  const HermitianOperator za =
      HermitianOperator::from_matrix(kronecker(pauli_z(), identity_matrix(2)));
  const auto dec = joint_eigenspace_decomposition({za});
  REQUIRE(dec.size() == 2);
  CHECK(dec.ranks[0] == 2);
  CHECK(dec.ranks[1] == 2);
  CHECK(entropy(dec, 0) == doctest::Approx(1.0));  // log2(2)
}

TEST_CASE("non-commuting generators are rejected") {
  CHECK_THROWS_AS(
      joint_eigenspace_decomposition({HermitianOperator::from_matrix(pauli_z()),
                                      HermitianOperator::from_matrix(pauli_x())}),
      NotCommutingError);
  CHECK(check_compatible({HermitianOperator::from_matrix(pauli_z()),
                          HermitianOperator::from_matrix(pauli_x())},
                         1e-9) == false);
  CHECK(check_compatible({HermitianOperator::from_matrix(pauli_z()),
                          HermitianOperator::from_matrix(identity_matrix(2))},
                         1e-9) == true);
}

TEST_CASE("macro_operator reassembles each generator") {
  const HermitianOperator a = diag_op({1.0, 1.0, 2.0});
  const HermitianOperator b = diag_op({3.0, 4.0, 5.0});
  const auto dec = joint_eigenspace_decomposition({a, b});
  CHECK(max_abs(macro_operator(dec, 0).matrix() - a.matrix()) < 1e-9);
  CHECK(max_abs(macro_operator(dec, 1).matrix() - b.matrix()) < 1e-9);
  CHECK_THROWS_AS(macro_operator(dec, 2), IndexError);
}

TEST_CASE("external projector families are validated") {
  Matrix p0 = Matrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  Matrix p1 = Matrix::Zero(2, 2);
  p1(1, 1) = 1.0;

  const auto dec = decomposition_from_projectors({{1.0}, {2.0}}, {p0, p1});
  CHECK(dec.size() == 2);
  CHECK(dec.labels[0] == MacroLabel{1.0});  // sorted by label

  // Incomplete family.
  CHECK_THROWS_AS(decomposition_from_projectors({{1.0}}, {p0}), DecompositionError);
  // Not idempotent.
  Matrix half = 0.5 * identity_matrix(2);
  CHECK_THROWS_AS(decomposition_from_projectors({{1.0}, {2.0}}, {half, half}),
                  DecompositionError);
  // Overlapping (not orthogonal).
  CHECK_THROWS_AS(decomposition_from_projectors(
                      {{1.0}, {2.0}}, {identity_matrix(2), identity_matrix(2)}),
                  DecompositionError);
  // Duplicate labels.
  CHECK_THROWS_AS(decomposition_from_projectors({{1.0}, {1.0}}, {p0, p1}),
                  DecompositionError);
}

TEST_CASE("classification against a decomposition") {
  const auto dec =
      joint_eigenspace_decomposition({HermitianOperator::from_matrix(pauli_z())});

  Vector up(2);
  up << Complex(1.0, 0.0), Complex(0.0, 0.0);
  const Classification definite = classify(make_state(up), dec);
  CHECK(definite.definite);
  CHECK(dec.labels[definite.label_index] == MacroLabel{1.0});

  Vector tilted(2);
  tilted << Complex(0.6, 0.0), Complex(0.8, 0.0);
  const Classification superposed = classify(make_state(tilted), dec);
  CHECK(!superposed.definite);
  REQUIRE(superposed.weights.size() == 2);
  CHECK(superposed.weights[0] == doctest::Approx(0.64).epsilon(1e-12));  // label -1
  CHECK(superposed.weights[1] == doctest::Approx(0.36).epsilon(1e-12));  // label +1

  // Definiteness is a tolerance call: an admixture of weight 1e-8 passes a
  // 1e-6 tolerance but fails the default 1e-9 one.
  Vector nearly(2);
  nearly << Complex(1.0, 0.0), Complex(1e-4, 0.0);
  nearly.normalize();
  const StateVector near_up = StateVector::assume_normalized(nearly);
  CHECK(classify(near_up, dec, 1e-6).definite == true);
  CHECK(classify(near_up, dec, 1e-9).definite == false);
}

TEST_CASE("membership weights match projector norms") {
  std::mt19937_64 gen(909);
  const StateVector psi = make_state(testing_oracles::random_state_vector(4, gen));
  const auto dec = joint_eigenspace_decomposition(
      {HermitianOperator::from_matrix(kronecker(pauli_z(), identity_matrix(2)))});
  const std::vector<double> weights = membership_weights(psi, dec.projectors);
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double direct = (dec.projectors[k] * psi.amplitudes()).squaredNorm();
    CHECK(weights[k] == doctest::Approx(direct).epsilon(1e-12));
    total += weights[k];
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
}
