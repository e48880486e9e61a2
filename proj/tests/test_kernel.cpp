#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "gpmpc/kernel.hpp"
#include "gpmpc/rng.hpp"
#include "support/oracles.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace gpmpc;
using namespace gpmpc::gp;

namespace {

VectorXd scalar(double v) {
  VectorXd x(1);
  x << v;
  return x;
}

Kernel composite() {
  SumKernel sum;
  sum.children.push_back(Kernel(LinearKernel{3.0}));
  sum.children.push_back(Kernel(PeriodicKernel{1.4, 25.0, 0.8}));
  sum.children.push_back(Kernel(ConstantKernel{0.7}));
  sum.children.push_back(Kernel(RbfKernel{1.1, 6.0}));
  return Kernel(sum);
}

MatrixXd random_grid(Rng& rng, int n, int dim) {
  MatrixXd x(n, dim);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) x(i, j) = rng.uniform(-20.0, 20.0);
  }
  return x;
}

Kernel random_atom(Rng& rng, int which) {
  switch (which % 4) {
    case 0:
      return Kernel(RbfKernel{rng.uniform(0.2, 3.0), rng.uniform(0.5, 15.0)});
    case 1:
      return Kernel(LinearKernel{rng.uniform(0.3, 10.0)});
    case 2:
      return Kernel(
          PeriodicKernel{rng.uniform(0.2, 3.0), rng.uniform(2.0, 40.0),
                         rng.uniform(0.3, 2.5)});
    default:
      return Kernel(ConstantKernel{rng.uniform(0.0, 4.0)});
  }
}

}  // namespace

TEST_CASE("kernel_eval matches the defining formulas") {
  CHECK(kernel_eval(Kernel(RbfKernel{2.0, 1.0}), scalar(3.7), scalar(3.7)) ==
        doctest::Approx(4.0));
  CHECK(kernel_eval(Kernel(LinearKernel{1.0}), scalar(2.0), scalar(3.0)) ==
        doctest::Approx(6.0));
  CHECK(kernel_eval(Kernel(PeriodicKernel{1.5, 10.0, 1.0}), scalar(0.0),
                    scalar(10.0)) == doctest::Approx(2.25));
  CHECK(kernel_eval(Kernel(ConstantKernel{3.0}), scalar(-5.0), scalar(9.0)) ==
        doctest::Approx(3.0));
}

TEST_CASE("kernel_eval rejects dimension mismatches") {
  VectorXd x(2);
  x << 1.0, 2.0;
  CHECK_THROWS_AS((void)kernel_eval(Kernel(RbfKernel{}), x, scalar(1.0)),
                  std::invalid_argument);
}

TEST_CASE("validate rejects bad parameters and nesting") {
  CHECK_THROWS_AS(validate(Kernel(RbfKernel{-1.0, 1.0})), std::invalid_argument);
  CHECK_THROWS_AS(validate(Kernel(RbfKernel{1.0, 0.0})), std::invalid_argument);
  CHECK_THROWS_AS(validate(Kernel(LinearKernel{0.0})), std::invalid_argument);
  CHECK_THROWS_AS(validate(Kernel(PeriodicKernel{1.0, -2.0, 1.0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate(Kernel(ConstantKernel{-0.1})), std::invalid_argument);
  CHECK_NOTHROW(validate(Kernel(ConstantKernel{0.0})));  // level may be zero

  SumKernel empty;
  CHECK_THROWS_AS(validate(Kernel(empty)), std::invalid_argument);
  SumKernel nested;
  SumKernel inner;
  inner.children.push_back(Kernel(RbfKernel{}));
  nested.children.push_back(Kernel(inner));
  CHECK_THROWS_AS(validate(Kernel(nested)), std::invalid_argument);
}

TEST_CASE("gram_matrix examples") {
  MatrixXd grid(2, 1);
  grid << 0.0, 7.0;
  const MatrixXd g = gram_matrix(Kernel(ConstantKernel{3.0}), grid, grid);
  CHECK((g.array() == 3.0).all());

  Rng rng(7);
  const MatrixXd x = random_grid(rng, 5, 1);
  const MatrixXd k = gram_matrix(Kernel(RbfKernel{1.3, 4.0}), x, x);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(k);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10);

  SumKernel sum;
  sum.children.push_back(Kernel(RbfKernel{1.2, 3.0}));
  sum.children.push_back(Kernel(LinearKernel{2.0}));
  const MatrixXd y = random_grid(rng, 3, 1);
  const MatrixXd both = gram_matrix(Kernel(sum), y, y);
  const MatrixXd split = gram_matrix(Kernel(RbfKernel{1.2, 3.0}), y, y) +
                         gram_matrix(Kernel(LinearKernel{2.0}), y, y);
  CHECK((both - split).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("kernel symmetry over random pairs and variants") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = 1 + static_cast<int>(rng.uniform() * 3.0);
    VectorXd x(dim), y(dim);
    for (int i = 0; i < dim; ++i) {
      x[i] = rng.uniform(-30.0, 30.0);
      y[i] = rng.uniform(-30.0, 30.0);
    }
    const Kernel k = random_atom(rng, trial);
    CHECK(kernel_eval(k, x, y) == doctest::Approx(kernel_eval(k, y, x)).epsilon(1e-14));
    CHECK(kernel_eval(composite(), x, y) ==
          doctest::Approx(kernel_eval(composite(), y, x)).epsilon(1e-14));
  }
}

TEST_CASE("random gram matrices are PSD") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 19.0);
    SumKernel sum;
    const int atoms = 1 + static_cast<int>(rng.uniform() * 3.0);
    bool has_periodic = false;
    for (int a = 0; a < atoms; ++a) {
      const int which = static_cast<int>(rng.next_u64() % 4);
      has_periodic = has_periodic || (which % 4 == 2);
      sum.children.push_back(random_atom(rng, which));
    }
    // The periodic atom warps the Euclidean distance through sin^2, which is
    // positive semidefinite on scalar inputs (its domain here: time) but not
    // on higher-dimensional ones, so those draws stay one-dimensional.
    const int dim =
        has_periodic ? 1 : 1 + static_cast<int>(rng.uniform() * 2.0);
    const MatrixXd x = random_grid(rng, n, dim);
    const MatrixXd k = gram_matrix(Kernel(sum), x, x);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(k);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-9 * std::max(1.0, k.trace()));
  }
}

TEST_CASE("gram agrees with the extended-precision oracle") {
  Rng rng(31);
  const MatrixXd x = random_grid(rng, 6, 1);
  const Kernel k = composite();
  const MatrixXd g = gram_matrix(k, x, x);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const double ref = static_cast<double>(
          oracles::kernel_value(k, x.row(i).transpose(), x.row(j).transpose()));
      CHECK(g(i, j) == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("log-parameter packing round-trips") {
  const Kernel k = composite();
  const VectorXd packed = pack_log_params(k);
  CHECK(packed.size() == param_count(k));
  CHECK(param_count(k) == 7);  // linear 1 + periodic 3 + constant 1 + rbf 2
  const Kernel back = unpack_log_params(k, packed);
  const VectorXd repacked = pack_log_params(back);
  CHECK((packed - repacked).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("analytic gram gradients match finite differences") {
  Rng rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd x = random_grid(rng, 4, 1);
    const PairwiseStats stats = build_pairwise(x, x);
    Kernel k = trial % 2 == 0 ? composite()
                              : random_atom(rng, static_cast<int>(rng.next_u64() % 4));
    // Constant level 0 is valid but not differentiable in log space; nudge.
    VectorXd theta = pack_log_params(k);
    for (int i = 0; i < theta.size(); ++i) {
      theta[i] += rng.uniform(-0.3, 0.3);
      if (!std::isfinite(theta[i])) theta[i] = -1.0;
    }
    k = unpack_log_params(k, theta);

    const auto grads = gram_log_param_gradients(k, stats);
    REQUIRE(static_cast<int>(grads.size()) == theta.size());
    const double h = 1e-5;
    for (int p = 0; p < theta.size(); ++p) {
      VectorXd tp = theta, tm = theta;
      tp[p] += h;
      tm[p] -= h;
      const MatrixXd fd = (gram_from_stats(unpack_log_params(k, tp), stats) -
                           gram_from_stats(unpack_log_params(k, tm), stats)) /
                          (2.0 * h);
      const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
      CHECK((grads[static_cast<std::size_t>(p)] - fd).cwiseAbs().maxCoeff() /
                scale <
            1e-4);
    }
  }
}
