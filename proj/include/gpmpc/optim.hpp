#pragma once

#include <functional>

#include <Eigen/Dense>

namespace gpmpc::optim {

/// Objective callback. When `grad` is non-null it must be filled with the
/// gradient at `x`. Non-finite return values mark infeasible points; the
/// line search backs away from them.
using Objective =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct Options {
  int max_iterations = 200;
  double gradient_tolerance = 1e-6;  // inf-norm of the projected gradient
  double value_tolerance = 1e-10;    // relative decrease between iterations
  int history = 8;                   // L-BFGS memory
};

struct Result {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  long evaluations = 0;
  bool converged = false;  // a tolerance was met within the budget
};

/// Minimizes `f` over the box [lower, upper] with projected L-BFGS and an
/// Armijo backtracking line search. Accepted iterates decrease f
/// monotonically, so the result never exceeds f at the start point.
Result minimize_box(const Objective& f, Eigen::VectorXd x0,
                    const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                    const Options& options = {});

/// Wraps a value-only function with central finite differences.
Objective with_central_differences(std::function<double(const Eigen::VectorXd&)> f,
                                   double relative_step = 1e-6);

}  // namespace gpmpc::optim
