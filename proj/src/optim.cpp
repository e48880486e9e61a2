#include "gpmpc/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace gpmpc::optim {

namespace {

Eigen::VectorXd clamp_to_box(Eigen::VectorXd x, const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

// Gradient components pointing out of the box at an active bound do not
// count towards stationarity.
Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& g,
                                   const Eigen::VectorXd& lower,
                                   const Eigen::VectorXd& upper) {
  Eigen::VectorXd pg = g;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] <= lower[i] && g[i] > 0.0) pg[i] = 0.0;
    if (x[i] >= upper[i] && g[i] < 0.0) pg[i] = 0.0;
  }
  return pg;
}

struct Pair {
  Eigen::VectorXd s, y;
  double rho;
};

Eigen::VectorXd lbfgs_direction(const std::deque<Pair>& memory,
                                const Eigen::VectorXd& g) {
  Eigen::VectorXd q = -g;
  if (memory.empty()) return q;
  std::vector<double> alpha(memory.size());
  for (int i = static_cast<int>(memory.size()) - 1; i >= 0; --i) {
    alpha[i] = memory[i].rho * memory[i].s.dot(q);
    q -= alpha[i] * memory[i].y;
  }
  const Pair& last = memory.back();
  const double gamma = last.s.dot(last.y) / last.y.squaredNorm();
  q *= gamma;
  for (std::size_t i = 0; i < memory.size(); ++i) {
    const double beta = memory[i].rho * memory[i].y.dot(q);
    q += (alpha[i] - beta) * memory[i].s;
  }
  return q;
}

}  // namespace

Result minimize_box(const Objective& f, Eigen::VectorXd x0,
                    const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                    const Options& options) {
  const Eigen::Index n = x0.size();
  if (lower.size() != n || upper.size() != n) {
    throw std::invalid_argument("minimize_box: bound size mismatch");
  }
  if ((lower.array() > upper.array()).any()) {
    throw std::invalid_argument("minimize_box: lower bound exceeds upper");
  }

  Result result;
  Eigen::VectorXd x = clamp_to_box(std::move(x0), lower, upper);
  Eigen::VectorXd g(n);
  double fx = f(x, &g);
  ++result.evaluations;
  result.x = x;
  result.value = fx;
  if (!std::isfinite(fx)) return result;

  std::deque<Pair> memory;
  constexpr double kArmijo = 1e-4;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    result.iterations = iter + 1;
    const Eigen::VectorXd pg = projected_gradient(x, g, lower, upper);
    if (pg.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd d = lbfgs_direction(memory, g);
    if (!d.allFinite() || d.dot(g) >= 0.0) d = -g;  // fall back to steepest descent

    double alpha = memory.empty()
                       ? std::min(1.0, 1.0 / std::max(1e-12, g.lpNorm<Eigen::Infinity>()))
                       : 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new, g_new(n);
    double f_new = fx;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = clamp_to_box(x + alpha * d, lower, upper);
      const Eigen::VectorXd step = x_new - x;
      if (step.lpNorm<Eigen::Infinity>() < 1e-16) break;
      const double trial = f(x_new, nullptr);
      ++result.evaluations;
      if (std::isfinite(trial) && trial <= fx + kArmijo * g.dot(step)) {
        f_new = f(x_new, &g_new);  // re-evaluate with gradient at the accepted point
        ++result.evaluations;
        accepted = std::isfinite(f_new) && g_new.allFinite();
        if (accepted) break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      result.converged = true;  // no acceptable step left: treat as stationary
      break;
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      memory.push_back({s, yv, 1.0 / sy});
      if (static_cast<int>(memory.size()) > options.history) memory.pop_front();
    }

    const double decrease = fx - f_new;
    x = x_new;
    g = g_new;
    fx = f_new;
    result.x = x;
    result.value = fx;
    if (decrease <= options.value_tolerance * std::max(1.0, std::abs(fx))) {
      result.converged = true;
      break;
    }
  }
  return result;
}

Objective with_central_differences(std::function<double(const Eigen::VectorXd&)> f,
                                   double relative_step) {
  return [f = std::move(f), relative_step](const Eigen::VectorXd& x,
                                           Eigen::VectorXd* grad) {
    const double fx = f(x);
    if (grad != nullptr) {
      grad->resize(x.size());
      Eigen::VectorXd probe = x;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = relative_step * std::max(1.0, std::abs(x[i]));
        probe[i] = x[i] + h;
        const double fp = f(probe);
        probe[i] = x[i] - h;
        const double fm = f(probe);
        probe[i] = x[i];
        (*grad)[i] = (fp - fm) / (2.0 * h);
      }
    }
    return fx;
  };
}

}  // namespace gpmpc::optim
