#pragma once

#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace gpmpc::gp {

// Covariance functions over real-vector inputs. Inputs are matrices with one
// point per row; time-indexed data uses single-column matrices.

struct RbfKernel {
  double output_scale = 1.0;  // signal scale
  double length_scale = 1.0;  // seconds for time inputs
};

struct LinearKernel {
  double scale = 1.0;
};

struct PeriodicKernel {
  double output_scale = 1.0;
  double period = 1.0;  // seconds
  double roughness = 1.0;
};

struct ConstantKernel {
  double level = 1.0;  // may be zero
};

struct Kernel;

/// Additive composition. Children must be atoms (no nested sums).
struct SumKernel {
  std::vector<Kernel> children;
};

struct Kernel {
  using Node =
      std::variant<RbfKernel, LinearKernel, PeriodicKernel, ConstantKernel, SumKernel>;
  Node node;

  Kernel() : node(RbfKernel{}) {}
  Kernel(RbfKernel k) : node(k) {}
  Kernel(LinearKernel k) : node(k) {}
  Kernel(PeriodicKernel k) : node(k) {}
  Kernel(ConstantKernel k) : node(k) {}
  Kernel(SumKernel k) : node(std::move(k)) {}
};

/// Throws std::invalid_argument when a parameter violates its positivity
/// constraint or a sum is empty/nested.
void validate(const Kernel& kernel);

/// k(x, y). Throws std::invalid_argument on dimension mismatch.
double kernel_eval(const Kernel& kernel, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y);

/// Pairwise geometry between two point sets, independent of hyperparameters.
/// Precomputing it makes repeated Gram evaluations during training cheap.
struct PairwiseStats {
  Eigen::ArrayXXd sqdist;   // ||x_i - y_j||^2
  Eigen::ArrayXXd dist;     // ||x_i - y_j||
  Eigen::ArrayXXd dot;      // x_i . y_j
};

PairwiseStats build_pairwise(const Eigen::MatrixXd& x_rows,
                             const Eigen::MatrixXd& y_rows);

Eigen::MatrixXd gram_from_stats(const Kernel& kernel, const PairwiseStats& stats);

/// [i,j] = k(X_i, Y_j).
Eigen::MatrixXd gram_matrix(const Kernel& kernel, const Eigen::MatrixXd& x_rows,
                            const Eigen::MatrixXd& y_rows);

/// Number of scalar hyperparameters in the kernel tree.
int param_count(const Kernel& kernel);

/// Depth-first packing of kernel parameters into log space (and back).
Eigen::VectorXd pack_log_params(const Kernel& kernel);
Kernel unpack_log_params(const Kernel& structure, const Eigen::VectorXd& log_params);

/// Derivative of the Gram matrix with respect to each log-parameter, in
/// packing order.
std::vector<Eigen::MatrixXd> gram_log_param_gradients(const Kernel& kernel,
                                                      const PairwiseStats& stats);

}  // namespace gpmpc::gp
