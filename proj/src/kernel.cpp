#include "gpmpc/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace gpmpc::gp {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("kernel parameter ") + name +
                                " must be positive and finite");
  }
}

void validate_atom(const Kernel::Node& node) {
  if (const auto* rbf = std::get_if<RbfKernel>(&node)) {
    require_positive(rbf->output_scale, "rbf.output_scale");
    require_positive(rbf->length_scale, "rbf.length_scale");
  } else if (const auto* lin = std::get_if<LinearKernel>(&node)) {
    require_positive(lin->scale, "linear.scale");
  } else if (const auto* per = std::get_if<PeriodicKernel>(&node)) {
    require_positive(per->output_scale, "periodic.output_scale");
    require_positive(per->period, "periodic.period");
    require_positive(per->roughness, "periodic.roughness");
  } else if (const auto* c = std::get_if<ConstantKernel>(&node)) {
    if (!(c->level >= 0.0) || !std::isfinite(c->level)) {
      throw std::invalid_argument("kernel parameter constant.level must be >= 0");
    }
  }
}

double eval_atom(const Kernel::Node& node, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& y) {
  if (const auto* rbf = std::get_if<RbfKernel>(&node)) {
    const double r2 = (x - y).squaredNorm();
    const double l = rbf->length_scale;
    return rbf->output_scale * rbf->output_scale *
           std::exp(-r2 / (2.0 * l * l));
  }
  if (const auto* lin = std::get_if<LinearKernel>(&node)) {
    return x.dot(y) / (lin->scale * lin->scale);
  }
  if (const auto* per = std::get_if<PeriodicKernel>(&node)) {
    const double r = (x - y).norm();
    const double s = std::sin(kPi * r / per->period);
    const double p = per->roughness;
    return per->output_scale * per->output_scale *
           std::exp(-2.0 * s * s / (p * p));
  }
  return std::get<ConstantKernel>(node).level;
}

Eigen::MatrixXd atom_gram(const Kernel::Node& node, const PairwiseStats& st) {
  if (const auto* rbf = std::get_if<RbfKernel>(&node)) {
    const double d2 = rbf->output_scale * rbf->output_scale;
    const double l2 = rbf->length_scale * rbf->length_scale;
    return (d2 * (-st.sqdist / (2.0 * l2)).exp()).matrix();
  }
  if (const auto* lin = std::get_if<LinearKernel>(&node)) {
    return (st.dot / (lin->scale * lin->scale)).matrix();
  }
  if (const auto* per = std::get_if<PeriodicKernel>(&node)) {
    const double t2 = per->output_scale * per->output_scale;
    const double p2 = per->roughness * per->roughness;
    const Eigen::ArrayXXd s = (kPi / per->period * st.dist).sin();
    return (t2 * (-2.0 / p2 * s.square()).exp()).matrix();
  }
  const double level = std::get<ConstantKernel>(node).level;
  return Eigen::MatrixXd::Constant(st.sqdist.rows(), st.sqdist.cols(), level);
}

// d gram / d log(theta_j) for one atom, appended to `out` in packing order.
void atom_log_gradients(const Kernel::Node& node, const PairwiseStats& st,
                        std::vector<Eigen::MatrixXd>& out) {
  if (const auto* rbf = std::get_if<RbfKernel>(&node)) {
    const Eigen::MatrixXd k = atom_gram(node, st);
    out.push_back(2.0 * k);
    const double l2 = rbf->length_scale * rbf->length_scale;
    out.push_back((k.array() * (st.sqdist / l2)).matrix());
  } else if (std::get_if<LinearKernel>(&node) != nullptr) {
    out.push_back(-2.0 * atom_gram(node, st));
  } else if (const auto* per = std::get_if<PeriodicKernel>(&node)) {
    const Eigen::MatrixXd k = atom_gram(node, st);
    const double p2 = per->roughness * per->roughness;
    const Eigen::ArrayXXd phase = kPi / per->period * st.dist;
    out.push_back(2.0 * k);
    // d/d(log tau): K * (2 / psi^2) * phase * sin(2 phase)
    out.push_back(
        (k.array() * (2.0 / p2 * phase * (2.0 * phase).sin())).matrix());
    out.push_back((k.array() * (4.0 / p2 * phase.sin().square())).matrix());
  } else {
    const double level = std::get<ConstantKernel>(node).level;
    out.push_back(Eigen::MatrixXd::Constant(st.sqdist.rows(), st.sqdist.cols(),
                                            level));
  }
}

int atom_param_count(const Kernel::Node& node) {
  if (std::holds_alternative<RbfKernel>(node)) return 2;
  if (std::holds_alternative<LinearKernel>(node)) return 1;
  if (std::holds_alternative<PeriodicKernel>(node)) return 3;
  return 1;
}

void pack_atom(const Kernel::Node& node, Eigen::VectorXd& v, int& pos) {
  if (const auto* rbf = std::get_if<RbfKernel>(&node)) {
    v[pos++] = std::log(rbf->output_scale);
    v[pos++] = std::log(rbf->length_scale);
  } else if (const auto* lin = std::get_if<LinearKernel>(&node)) {
    v[pos++] = std::log(lin->scale);
  } else if (const auto* per = std::get_if<PeriodicKernel>(&node)) {
    v[pos++] = std::log(per->output_scale);
    v[pos++] = std::log(per->period);
    v[pos++] = std::log(per->roughness);
  } else {
    v[pos++] = std::log(std::get<ConstantKernel>(node).level);
  }
}

Kernel::Node unpack_atom(const Kernel::Node& structure, const Eigen::VectorXd& v,
                         int& pos) {
  if (std::holds_alternative<RbfKernel>(structure)) {
    RbfKernel k;
    k.output_scale = std::exp(v[pos++]);
    k.length_scale = std::exp(v[pos++]);
    return k;
  }
  if (std::holds_alternative<LinearKernel>(structure)) {
    LinearKernel k;
    k.scale = std::exp(v[pos++]);
    return k;
  }
  if (std::holds_alternative<PeriodicKernel>(structure)) {
    PeriodicKernel k;
    k.output_scale = std::exp(v[pos++]);
    k.period = std::exp(v[pos++]);
    k.roughness = std::exp(v[pos++]);
    return k;
  }
  ConstantKernel k;
  k.level = std::exp(v[pos++]);
  return k;
}

}  // namespace

void validate(const Kernel& kernel) {
  if (const auto* sum = std::get_if<SumKernel>(&kernel.node)) {
    if (sum->children.empty()) {
      throw std::invalid_argument("sum kernel needs at least one child");
    }
    for (const Kernel& child : sum->children) {
      if (std::holds_alternative<SumKernel>(child.node)) {
        throw std::invalid_argument("sum kernels cannot nest");
      }
      validate_atom(child.node);
    }
    return;
  }
  validate_atom(kernel.node);
}

double kernel_eval(const Kernel& kernel, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("kernel_eval: input dimension mismatch");
  }
  if (const auto* sum = std::get_if<SumKernel>(&kernel.node)) {
    double total = 0.0;
    for (const Kernel& child : sum->children) total += eval_atom(child.node, x, y);
    return total;
  }
  return eval_atom(kernel.node, x, y);
}

PairwiseStats build_pairwise(const Eigen::MatrixXd& x_rows,
                             const Eigen::MatrixXd& y_rows) {
  if (x_rows.rows() == 0 || y_rows.rows() == 0) {
    throw std::invalid_argument("build_pairwise: empty grid");
  }
  if (x_rows.cols() != y_rows.cols()) {
    throw std::invalid_argument("build_pairwise: input dimension mismatch");
  }
  PairwiseStats st;
  st.dot = (x_rows * y_rows.transpose()).array();
  const Eigen::ArrayXd xn = x_rows.rowwise().squaredNorm().array();
  const Eigen::ArrayXd yn = y_rows.rowwise().squaredNorm().array();
  st.sqdist = (-2.0 * st.dot).colwise() + xn;
  st.sqdist.rowwise() += yn.transpose();
  st.sqdist = st.sqdist.max(0.0);
  st.dist = st.sqdist.sqrt();
  return st;
}

Eigen::MatrixXd gram_from_stats(const Kernel& kernel, const PairwiseStats& stats) {
  if (const auto* sum = std::get_if<SumKernel>(&kernel.node)) {
    Eigen::MatrixXd g = atom_gram(sum->children.front().node, stats);
    for (std::size_t i = 1; i < sum->children.size(); ++i) {
      g += atom_gram(sum->children[i].node, stats);
    }
    return g;
  }
  return atom_gram(kernel.node, stats);
}

Eigen::MatrixXd gram_matrix(const Kernel& kernel, const Eigen::MatrixXd& x_rows,
                            const Eigen::MatrixXd& y_rows) {
  return gram_from_stats(kernel, build_pairwise(x_rows, y_rows));
}

int param_count(const Kernel& kernel) {
  if (const auto* sum = std::get_if<SumKernel>(&kernel.node)) {
    int n = 0;
    for (const Kernel& child : sum->children) n += atom_param_count(child.node);
    return n;
  }
  return atom_param_count(kernel.node);
}

Eigen::VectorXd pack_log_params(const Kernel& kernel) {
  Eigen::VectorXd v(param_count(kernel));
  int pos = 0;
  if (const auto* sum = std::get_if<SumKernel>(&kernel.node)) {
    for (const Kernel& child : sum->children) pack_atom(child.node, v, pos);
  } else {
    pack_atom(kernel.node, v, pos);
  }
  return v;
}

Kernel unpack_log_params(const Kernel& structure, const Eigen::VectorXd& log_params) {
  if (log_params.size() != param_count(structure)) {
    throw std::invalid_argument("unpack_log_params: parameter count mismatch");
  }
  int pos = 0;
  if (const auto* sum = std::get_if<SumKernel>(&structure.node)) {
    SumKernel out;
    out.children.reserve(sum->children.size());
    for (const Kernel& child : sum->children) {
      out.children.push_back(Kernel{});
      out.children.back().node = unpack_atom(child.node, log_params, pos);
    }
    return Kernel(std::move(out));
  }
  Kernel out;
  out.node = unpack_atom(structure.node, log_params, pos);
  return out;
}

std::vector<Eigen::MatrixXd> gram_log_param_gradients(const Kernel& kernel,
                                                      const PairwiseStats& stats) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(param_count(kernel));
  if (const auto* sum = std::get_if<SumKernel>(&kernel.node)) {
    for (const Kernel& child : sum->children) {
      atom_log_gradients(child.node, stats, out);
    }
  } else {
    atom_log_gradients(kernel.node, stats, out);
  }
  return out;
}

}  // namespace gpmpc::gp
