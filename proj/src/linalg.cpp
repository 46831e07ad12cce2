#include "tdg/linalg.hpp"

#include <cmath>
#include <limits>

namespace tdg {

void SparseMatrix::add_block(int row0, int col0, const Eigen::MatrixXd& block) {
  if (finalized_) throw std::logic_error("SparseMatrix: finalized matrices are immutable");
  for (int i = 0; i < block.rows(); ++i)
    for (int j = 0; j < block.cols(); ++j)
      if (block(i, j) != 0.0) triplets_.emplace_back(row0 + i, col0 + j, block(i, j));
}

void SparseMatrix::finalize() {
  mat_.resize(rows_, cols_);
  mat_.setFromTriplets(triplets_.begin(), triplets_.end());
  mat_.makeCompressed();
  triplets_.clear();
  triplets_.shrink_to_fit();
  finalized_ = true;
}

const Eigen::SparseMatrix<double>& SparseMatrix::matrix() const {
  if (!finalized_) throw std::logic_error("SparseMatrix: finalize() before use");
  return mat_;
}

Eigen::VectorXd solve_direct(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& rhs) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw SolverError(SolverFailure::SingularSystem, "sparse LU factorization failed");
  Eigen::VectorXd x = lu.solve(rhs);
  const double rhs_norm = rhs.norm();
  if (rhs_norm > 0.0) {
    double rel = (A * x - rhs).norm() / rhs_norm;
    if (rel > 1e-12) {  // one step of iterative refinement
      x += lu.solve(rhs - A * x);
      rel = (A * x - rhs).norm() / rhs_norm;
    }
    if (!(rel <= 1e-12))
      throw SolverError(SolverFailure::SingularSystem, "direct solve residual too large");
  }
  return x;
}

Eigen::VectorXd solve_direct(const SparseMatrix& A, const Eigen::VectorXd& rhs) {
  return solve_direct(A.matrix(), rhs);
}

void DirectSolver::factorize(const Eigen::SparseMatrix<double>& A) {
  if (!analyzed_) {
    lu_.analyzePattern(A);
    analyzed_ = true;
  }
  lu_.factorize(A);
  if (lu_.info() != Eigen::Success)
    throw SolverError(SolverFailure::SingularSystem, "sparse LU factorization failed");
  ready_ = true;
}

Eigen::VectorXd DirectSolver::solve(const Eigen::VectorXd& rhs) const {
  if (!ready_) throw std::logic_error("DirectSolver: factorize() before solve()");
  return lu_.solve(rhs);
}

BlockJacobiPreconditioner::BlockJacobiPreconditioner(const Eigen::SparseMatrix<double>& A,
                                                     int block_size)
    : block_size_(block_size) {
  const int n = static_cast<int>(A.rows());
  if (block_size <= 0 || n % block_size != 0)
    throw std::invalid_argument("BlockJacobiPreconditioner: dimension not divisible by block size");
  const int num_blocks = n / block_size;
  blocks_.reserve(num_blocks);
  for (int b = 0; b < num_blocks; ++b) {
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(block_size, block_size);
    for (int j = 0; j < block_size; ++j) {
      const int col = b * block_size + j;
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it) {
        const int row = static_cast<int>(it.row());
        if (row >= b * block_size && row < (b + 1) * block_size)
          block(row - b * block_size, j) = it.value();
      }
    }
    blocks_.emplace_back(block);
  }
}

Eigen::VectorXd BlockJacobiPreconditioner::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y(x.size());
  for (size_t b = 0; b < blocks_.size(); ++b)
    y.segment(b * block_size_, block_size_) = blocks_[b].solve(x.segment(b * block_size_, block_size_));
  return y;
}

GmresResult gmres(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
                  const Eigen::VectorXd& rhs,
                  const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& precond,
                  double rel_tol, int restart, int max_iter) {
  GmresResult result;
  const int n = static_cast<int>(rhs.size());
  result.x = Eigen::VectorXd::Zero(n);

  auto M = [&](const Eigen::VectorXd& v) { return precond ? precond(v) : v; };

  const double b_norm = M(rhs).norm();
  if (b_norm == 0.0) {
    result.converged = true;
    return result;
  }

  Eigen::VectorXd x = result.x;
  double best_res = std::numeric_limits<double>::max();
  Eigen::VectorXd best_x = x;
  int total_iters = 0;

  while (total_iters < max_iter) {
    Eigen::VectorXd r = M(rhs - apply(x));
    double beta = r.norm();
    const double rel0 = beta / b_norm;
    if (rel0 < best_res) {
      best_res = rel0;
      best_x = x;
    }
    if (rel0 <= rel_tol) {
      result.x = x;
      result.converged = true;
      result.relative_residual = rel0;
      result.iterations = total_iters;
      return result;
    }

    const int m = std::min(restart, max_iter - total_iters);
    Eigen::MatrixXd V(n, m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs = Eigen::VectorXd::Zero(m), sn = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
    V.col(0) = r / beta;
    g(0) = beta;

    int j = 0;
    for (; j < m; ++j) {
      Eigen::VectorXd w = M(apply(V.col(j)));
      for (int i = 0; i <= j; ++i) {
        H(i, j) = V.col(i).dot(w);
        w -= H(i, j) * V.col(i);
      }
      // one re-orthogonalization pass keeps the basis clean near convergence
      for (int i = 0; i <= j; ++i) {
        const double corr = V.col(i).dot(w);
        H(i, j) += corr;
        w -= corr * V.col(i);
      }
      H(j + 1, j) = w.norm();
      if (H(j + 1, j) > 0.0) V.col(j + 1) = w / H(j + 1, j);

      for (int i = 0; i < j; ++i) {
        const double t = cs(i) * H(i, j) + sn(i) * H(i + 1, j);
        H(i + 1, j) = -sn(i) * H(i, j) + cs(i) * H(i + 1, j);
        H(i, j) = t;
      }
      const double denom = std::hypot(H(j, j), H(j + 1, j));
      if (denom == 0.0) {
        ++j;
        break;
      }
      cs(j) = H(j, j) / denom;
      sn(j) = H(j + 1, j) / denom;
      H(j, j) = denom;
      H(j + 1, j) = 0.0;
      g(j + 1) = -sn(j) * g(j);
      g(j) = cs(j) * g(j);

      ++total_iters;
      const double rel = std::abs(g(j + 1)) / b_norm;
      result.residual_history.push_back(rel);
      if (rel <= rel_tol || H(j + 1, j) == 0.0 || total_iters >= max_iter) {
        ++j;
        break;
      }
    }

    // solve the j x j triangular system and update x
    Eigen::VectorXd y = Eigen::VectorXd::Zero(j);
    for (int i = j - 1; i >= 0; --i) {
      double s = g(i);
      for (int l = i + 1; l < j; ++l) s -= H(i, l) * y(l);
      y(i) = s / H(i, i);
    }
    x += V.leftCols(j) * y;

    const double rel_now = (M(rhs - apply(x))).norm() / b_norm;
    if (rel_now < best_res) {
      best_res = rel_now;
      best_x = x;
    }
    if (rel_now <= rel_tol) {
      result.x = x;
      result.converged = true;
      result.relative_residual = rel_now;
      result.iterations = total_iters;
      return result;
    }
  }

  result.x = best_x;
  result.converged = false;
  result.relative_residual = best_res;
  result.iterations = total_iters;
  return result;
}

GmresResult gmres(const SparseMatrix& A, const Eigen::VectorXd& rhs,
                  const BlockJacobiPreconditioner* precond, double rel_tol, int restart,
                  int max_iter) {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> M;
  if (precond) M = [precond](const Eigen::VectorXd& v) { return precond->apply(v); };
  return gmres([&A](const Eigen::VectorXd& v) { return A.apply(v); }, rhs, M, rel_tol, restart,
               max_iter);
}

}  // namespace tdg
