#include <doctest.h>

#include <random>

#include "tdg/linalg.hpp"

using namespace tdg;

namespace {

SparseMatrix random_spd(int n, std::mt19937& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = gauss(rng);
  Eigen::MatrixXd A = B * B.transpose() + n * Eigen::MatrixXd::Identity(n, n);
  SparseMatrix S(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) S.add(i, j, A(i, j));
  S.finalize();
  return S;
}

}  // namespace

TEST_CASE("solve_direct: identity and 2x2 closed form") {
  SparseMatrix I(3, 3);
  for (int i = 0; i < 3; ++i) I.add(i, i, 1.0);
  I.finalize();
  Eigen::VectorXd rhs(3);
  rhs << 1.0, -2.0, 0.5;
  CHECK((solve_direct(I, rhs) - rhs).norm() < 1e-15);

  SparseMatrix A(2, 2);
  A.add(0, 0, 2.0);
  A.add(0, 1, 1.0);
  A.add(1, 0, 1.0);
  A.add(1, 1, 2.0);
  A.finalize();
  Eigen::VectorXd b(2);
  b << 3.0, 3.0;
  const Eigen::VectorXd x = solve_direct(A, b);
  CHECK(x(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(x(1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("solve_direct matches dense oracle on random SPD 50x50") {
  std::mt19937 rng(123);
  SparseMatrix A = random_spd(50, rng);
  Eigen::VectorXd b(50);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < 50; ++i) b(i) = gauss(rng);

  const Eigen::MatrixXd dense = Eigen::MatrixXd(A.matrix());
  const Eigen::VectorXd oracle = dense.partialPivLu().solve(b);
  const Eigen::VectorXd x = solve_direct(A, b);
  CHECK((x - oracle).norm() / oracle.norm() < 1e-10);
}

TEST_CASE("solve_direct throws SingularSystem on a singular matrix") {
  SparseMatrix A(2, 2);
  A.add(0, 0, 1.0);
  A.add(0, 1, 1.0);
  A.add(1, 0, 1.0);
  A.add(1, 1, 1.0);
  A.finalize();
  Eigen::VectorXd b(2);
  b << 1.0, 2.0;
  CHECK_THROWS_AS(solve_direct(A, b), SolverError);
}

TEST_CASE("duplicate triplets are summed on finalize") {
  SparseMatrix A(1, 1);
  A.add(0, 0, 1.5);
  A.add(0, 0, 2.5);
  A.finalize();
  CHECK(A.matrix().coeff(0, 0) == doctest::Approx(4.0));
}

TEST_CASE("gmres: zero rhs returns zero in zero iterations") {
  std::mt19937 rng(5);
  SparseMatrix A = random_spd(10, rng);
  const GmresResult r = gmres(A, Eigen::VectorXd::Zero(10));
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  CHECK(r.x.norm() == 0.0);
}

TEST_CASE("gmres: identity operator converges in one iteration") {
  SparseMatrix I(8, 8);
  for (int i = 0; i < 8; ++i) I.add(i, i, 1.0);
  I.finalize();
  Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(8, 1.0, 8.0);
  const GmresResult r = gmres(I, b);
  CHECK(r.converged);
  CHECK(r.iterations <= 1);
  CHECK((r.x - b).norm() < 1e-12);
}

TEST_CASE("gmres matches solve_direct with and without preconditioning") {
  std::mt19937 rng(99);
  SparseMatrix A = random_spd(48, rng);
  Eigen::VectorXd b(48);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < 48; ++i) b(i) = gauss(rng);
  const Eigen::VectorXd direct = solve_direct(A, b);

  const GmresResult plain = gmres(A, b);
  CHECK(plain.converged);
  CHECK((plain.x - direct).norm() / direct.norm() < 1e-9);

  const BlockJacobiPreconditioner M(A.matrix(), 8);
  const GmresResult pre = gmres(A, b, &M);
  CHECK(pre.converged);
  CHECK((pre.x - direct).norm() / direct.norm() < 1e-9);
}

TEST_CASE("gmres residual history is monotone within a restart cycle") {
  std::mt19937 rng(7);
  SparseMatrix A = random_spd(40, rng);
  Eigen::VectorXd b(40);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < 40; ++i) b(i) = gauss(rng);
  const GmresResult r = gmres(A, b, nullptr, 1e-12, 40, 200);
  for (size_t i = 1; i < r.residual_history.size(); ++i)
    CHECK(r.residual_history[i] <= r.residual_history[i - 1] * (1.0 + 1e-12));
}

TEST_CASE("block-jacobi applied to its own block-diagonal part is the identity") {
  std::mt19937 rng(21);
  SparseMatrix A = random_spd(24, rng);
  const BlockJacobiPreconditioner M(A.matrix(), 6);

  // build the block-diagonal part
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(24, 24);
  const Eigen::MatrixXd dense = Eigen::MatrixXd(A.matrix());
  for (int blk = 0; blk < 4; ++blk)
    D.block(blk * 6, blk * 6, 6, 6) = dense.block(blk * 6, blk * 6, 6, 6);

  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(24);
  for (int i = 0; i < 24; ++i) v(i) = gauss(rng);
  CHECK((M.apply(D * v) - v).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sparse matrices are immutable after finalize") {
  SparseMatrix A(2, 2);
  A.add(0, 0, 1.0);
  CHECK_THROWS_AS(A.matrix(), std::logic_error);  // not finalized yet
  A.finalize();
  CHECK(A.finalized());
  CHECK_THROWS_AS(A.add(1, 1, 2.0), std::logic_error);
}
