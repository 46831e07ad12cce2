#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "tdg/errors.hpp"

namespace tdg {

/// Triplet-assembled sparse matrix; duplicate entries are summed on
/// finalize(), after which the matrix is immutable.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols) {}

  void add(int row, int col, double value) {
    if (finalized_) throw std::logic_error("SparseMatrix: finalized matrices are immutable");
    triplets_.emplace_back(row, col, value);
  }
  void add_block(int row0, int col0, const Eigen::MatrixXd& block);

  void finalize();
  bool finalized() const { return finalized_; }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  const Eigen::SparseMatrix<double>& matrix() const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return matrix() * x; }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<Eigen::Triplet<double>> triplets_;
  Eigen::SparseMatrix<double> mat_;
  bool finalized_ = false;
};

/// Direct sparse solve; checks the relative residual against 1e-12 and
/// throws SolverError(SingularSystem) on factorization failure.
Eigen::VectorXd solve_direct(const SparseMatrix& A, const Eigen::VectorXd& rhs);
Eigen::VectorXd solve_direct(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& rhs);

/// Reusable sparse LU with pattern analysis done once.
class DirectSolver {
 public:
  void factorize(const Eigen::SparseMatrix<double>& A);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  bool ready() const { return ready_; }

 private:
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  bool analyzed_ = false;
  bool ready_ = false;
};

/// Uniform-block-diagonal preconditioner; block k is rows/cols
/// [k*block_size, (k+1)*block_size).
class BlockJacobiPreconditioner {
 public:
  BlockJacobiPreconditioner() = default;
  BlockJacobiPreconditioner(const Eigen::SparseMatrix<double>& A, int block_size);

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  int block_size() const { return block_size_; }

 private:
  int block_size_ = 0;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> blocks_;
};

struct GmresResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
  double relative_residual = 0.0;
  std::vector<double> residual_history;
};

/// Left-preconditioned restarted GMRES. `apply` is the operator action;
/// `precond` may be empty (identity). Converged when the preconditioned
/// relative residual drops below rel_tol. A zero right-hand side returns
/// zero in zero iterations.
GmresResult gmres(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
                  const Eigen::VectorXd& rhs,
                  const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& precond = {},
                  double rel_tol = 1e-12, int restart = 60, int max_iter = 5000);

GmresResult gmres(const SparseMatrix& A, const Eigen::VectorXd& rhs,
                  const BlockJacobiPreconditioner* precond = nullptr, double rel_tol = 1e-12,
                  int restart = 60, int max_iter = 5000);

}  // namespace tdg
