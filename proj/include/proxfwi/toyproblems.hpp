#pragma once

#include "proxfwi/optim.hpp"

#include <Eigen/Dense>

namespace proxfwi::toy {

struct RosenbrockEval {
    double value = 0.0;
    Eigen::Vector2d gradient;
    Eigen::Matrix2d hessian;
};

/// M(m) = 75 (m2 - m1^2)^2 + (1 - m1)^2 with exact derivatives.
RosenbrockEval rosenbrock_value_grad_hess(const Eigen::Vector2d& m);

/// Minimizer of M(m) + lambda (|m1| + |m2|).
Eigen::Vector2d rosenbrock_l1_argmin(double lambda);

/// Rosenbrock misfit with exact dense Hessian. `scale` multiplies M.
class RosenbrockOracle : public optim::MisfitOracle {
  public:
    explicit RosenbrockOracle(double scale = 1.0) : scale_(scale) {}

    [[nodiscard]] Eigen::Index dimension() const override { return 2; }
    double value(const optim::Vec& m) override;
    optim::Vec gradient(const optim::Vec& m) override;
    std::pair<double, optim::Vec> value_gradient(const optim::Vec& m) override;
    optim::Vec hvp(const optim::Vec& m, const optim::Vec& v) override;
    std::optional<Eigen::MatrixXd> hessian_dense(const optim::Vec& m) override;

    [[nodiscard]] long evaluations() const noexcept { return evaluations_; }

  private:
    RosenbrockEval eval(const optim::Vec& m);

    double scale_;
    long evaluations_ = 0;
};

} // namespace proxfwi::toy
