#include "physim/macrostate.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace physim {

bool check_compatible(const std::vector<HermitianOperator>& ops, double tol) {
  if (ops.empty()) {
    throw DimensionError("compatibility check requires at least one operator");
  }
  for (const HermitianOperator& op : ops) {
    if (op.dim() != ops.front().dim()) {
      throw DimensionError("operator family members differ in dimension");
    }
  }
  for (std::size_t i = 0; i < ops.size(); ++i) {
    for (std::size_t j = i + 1; j < ops.size(); ++j) {
      if (frobenius(commutator(ops[i].matrix(), ops[j].matrix())) >= tol) {
        return false;
      }
    }
  }
  return true;
}

namespace {

struct Block {
  Matrix basis;      // orthonormal columns spanning the block
  MacroLabel label;  // eigenvalues of the operators refined so far
};

void validate_decomposition(const MacrostateDecomposition& decomp) {
  Matrix total = Matrix::Zero(decomp.dim, decomp.dim);
  for (std::size_t a = 0; a < decomp.size(); ++a) {
    const Matrix& p = decomp.projectors[a];
    if (p.rows() != decomp.dim || p.cols() != decomp.dim) {
      throw DecompositionError("projector " + std::to_string(a) + " has wrong shape");
    }
    if (max_abs(p - p.adjoint()) > tol::kProjector) {
      throw DecompositionError("projector " + std::to_string(a) + " is not Hermitian");
    }
    if (max_abs(p * p - p) > tol::kProjector) {
      throw DecompositionError("projector " + std::to_string(a) + " is not idempotent");
    }
    for (std::size_t b = a + 1; b < decomp.size(); ++b) {
      if (max_abs(p * decomp.projectors[b]) > tol::kProjector) {
        throw DecompositionError("projectors " + std::to_string(a) + " and " +
                                 std::to_string(b) + " are not orthogonal");
      }
    }
    total += p;
  }
  if (max_abs(total - identity_matrix(decomp.dim)) > tol::kProjector) {
    throw DecompositionError("projector family does not resolve the identity");
  }
  for (std::size_t a = 1; a < decomp.size(); ++a) {
    if (decomp.labels[a].size() != decomp.labels.front().size()) {
      throw DecompositionError("labels differ in tuple length");
    }
    if (!(decomp.labels[a - 1] < decomp.labels[a])) {
      throw DecompositionError("labels are not strictly increasing");
    }
  }
}

void sort_by_label(MacrostateDecomposition& decomp) {
  std::vector<std::size_t> order(decomp.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return decomp.labels[a] < decomp.labels[b];
  });
  MacrostateDecomposition sorted;
  sorted.dim = decomp.dim;
  for (std::size_t a : order) {
    sorted.labels.push_back(std::move(decomp.labels[a]));
    sorted.projectors.push_back(std::move(decomp.projectors[a]));
    sorted.ranks.push_back(decomp.ranks[a]);
  }
  decomp = std::move(sorted);
}

}  // namespace

MacrostateDecomposition joint_eigenspace_decomposition(
    const std::vector<HermitianOperator>& ops, double group_tol, double commute_tol) {
  if (!check_compatible(ops, commute_tol)) {
    throw NotCommutingError("operator family is not pairwise commuting within " +
                            std::to_string(commute_tol));
  }
  const Eigen::Index dim = ops.front().dim();

  std::vector<Block> blocks;
  blocks.push_back({identity_matrix(dim), {}});

  for (const HermitianOperator& op : ops) {
    std::vector<Block> refined;
    for (Block& block : blocks) {
      // Restrict the operator to the block and split along its eigenspaces.
      const Matrix restricted =
          0.5 * ((block.basis.adjoint() * op.matrix() * block.basis).eval() +
                 (block.basis.adjoint() * op.matrix() * block.basis).adjoint().eval());
      Eigen::SelfAdjointEigenSolver<Matrix> solver(restricted);
      if (solver.info() != Eigen::Success) {
        throw NumericalError("eigensolver failed during joint decomposition");
      }
      const Eigen::VectorXd values = solver.eigenvalues();
      const Matrix vectors = solver.eigenvectors();

      Eigen::Index start = 0;
      while (start < values.size()) {
        Eigen::Index stop = start + 1;
        while (stop < values.size() &&
               values(stop) - values(stop - 1) <=
                   group_tol * std::max(1.0, std::abs(values(stop)))) {
          ++stop;
        }
        Block sub;
        sub.basis = block.basis * vectors.middleCols(start, stop - start);
        sub.label = block.label;
        sub.label.push_back(values.segment(start, stop - start).mean());
        refined.push_back(std::move(sub));
        start = stop;
      }
    }
    blocks = std::move(refined);
  }

  MacrostateDecomposition decomp;
  decomp.dim = dim;
  for (Block& block : blocks) {
    decomp.labels.push_back(std::move(block.label));
    Matrix p = block.basis * block.basis.adjoint();
    decomp.projectors.push_back(0.5 * (p + p.adjoint().eval()));
    decomp.ranks.push_back(block.basis.cols());
  }
  sort_by_label(decomp);
  validate_decomposition(decomp);
  return decomp;
}

MacrostateDecomposition decomposition_from_projectors(std::vector<MacroLabel> labels,
                                                      std::vector<Matrix> projectors) {
  if (labels.empty() || labels.size() != projectors.size()) {
    throw DecompositionError("need equally many labels and projectors, at least one");
  }
  MacrostateDecomposition decomp;
  decomp.dim = projectors.front().rows();
  decomp.labels = std::move(labels);
  decomp.projectors = std::move(projectors);
  for (const Matrix& p : decomp.projectors) {
    decomp.ranks.push_back(static_cast<Eigen::Index>(std::llround(p.trace().real())));
  }
  sort_by_label(decomp);
  validate_decomposition(decomp);
  return decomp;
}

HermitianOperator macro_operator(const MacrostateDecomposition& decomp, std::size_t j) {
  if (decomp.size() == 0) {
    throw DecompositionError("empty decomposition");
  }
  if (j >= decomp.labels.front().size()) {
    throw IndexError("operator index " + std::to_string(j) + " out of range for tuples of " +
                     std::to_string(decomp.labels.front().size()) + " eigenvalues");
  }
  Matrix acc = Matrix::Zero(decomp.dim, decomp.dim);
  for (std::size_t a = 0; a < decomp.size(); ++a) {
    acc += decomp.labels[a][j] * decomp.projectors[a];
  }
  return HermitianOperator::symmetrized(std::move(acc));
}

std::vector<double> membership_weights(const StateVector& state,
                                       const std::vector<Matrix>& projectors) {
  std::vector<double> weights;
  weights.reserve(projectors.size());
  for (const Matrix& p : projectors) {
    if (p.rows() != state.dim()) {
      throw DimensionError("projector dimension does not match the state");
    }
    weights.push_back((p * state.amplitudes()).squaredNorm());
  }
  return weights;
}

Classification classify(const StateVector& state, const MacrostateDecomposition& decomp,
                        double definite_tol) {
  if (state.dim() != decomp.dim) {
    throw DimensionError("state dimension does not match the decomposition");
  }
  Classification result;
  result.weights = membership_weights(state, decomp.projectors);

  const double total = std::accumulate(result.weights.begin(), result.weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-10) {
    throw NumericalError("membership weights sum to " + std::to_string(total));
  }

  const auto top = std::max_element(result.weights.begin(), result.weights.end());
  if (*top >= 1.0 - definite_tol) {
    result.definite = true;
    result.label_index = static_cast<std::size_t>(top - result.weights.begin());
  }
  return result;
}

double entropy(const MacrostateDecomposition& decomp, std::size_t label_index) {
  if (label_index >= decomp.size()) {
    throw IndexError("label index " + std::to_string(label_index) + " out of range");
  }
  return std::log2(static_cast<double>(decomp.ranks[label_index]));
}

}  // namespace physim
