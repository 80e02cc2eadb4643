#include "proxfwi/toyproblems.hpp"

#include "proxfwi/errors.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>

namespace proxfwi::toy {

RosenbrockEval rosenbrock_value_grad_hess(const Eigen::Vector2d& m)
{
    const double a = m[1] - m[0] * m[0];
    const double b = 1.0 - m[0];
    RosenbrockEval e;
    e.value = 75.0 * a * a + b * b;
    e.gradient << -300.0 * m[0] * a - 2.0 * b, 150.0 * a;
    e.hessian << -300.0 * a + 600.0 * m[0] * m[0] + 2.0, -300.0 * m[0], -300.0 * m[0], 150.0;
    return e;
}

Eigen::Vector2d rosenbrock_l1_argmin(double lambda)
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw DomainError("rosenbrock_l1_argmin: lambda must be finite and nonnegative");
    }
    if (lambda <= 1.5) {
        const double m1 = (2.0 - lambda) / (2.0 + 2.0 * lambda);
        return {m1, m1 * m1 - lambda / 150.0};
    }
    if (lambda > 2.0) {
        return {0.0, 0.0};
    }
    const auto cubic = [lambda](double x) { return 300.0 * x * x * x + 2.0 * x + lambda - 2.0; };
    if (cubic(0.0) == 0.0) {
        return {0.0, 0.0};
    }
    std::uintmax_t max_iter = 200;
    const auto tol = [](double lo, double hi) { return std::abs(hi - lo) <= 1e-15; };
    const auto root = boost::math::tools::toms748_solve(cubic, 0.0, 1.0, tol, max_iter);
    return {0.5 * (root.first + root.second), 0.0};
}

RosenbrockEval RosenbrockOracle::eval(const optim::Vec& m)
{
    if (m.size() != 2) {
        throw GeometryError("Rosenbrock oracle expects a 2-vector");
    }
    ++evaluations_;
    RosenbrockEval e = rosenbrock_value_grad_hess(Eigen::Vector2d(m[0], m[1]));
    e.value *= scale_;
    e.gradient *= scale_;
    e.hessian *= scale_;
    return e;
}

double RosenbrockOracle::value(const optim::Vec& m) { return eval(m).value; }

optim::Vec RosenbrockOracle::gradient(const optim::Vec& m) { return eval(m).gradient; }

std::pair<double, optim::Vec> RosenbrockOracle::value_gradient(const optim::Vec& m)
{
    const auto e = eval(m);
    return {e.value, e.gradient};
}

optim::Vec RosenbrockOracle::hvp(const optim::Vec& m, const optim::Vec& v) { return eval(m).hessian * v; }

std::optional<Eigen::MatrixXd> RosenbrockOracle::hessian_dense(const optim::Vec& m)
{
    return Eigen::MatrixXd(eval(m).hessian);
}

} // namespace proxfwi::toy
