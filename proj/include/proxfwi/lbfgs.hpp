#pragma once

#include <Eigen/Dense>

#include <deque>
#include <functional>
#include <optional>

namespace proxfwi::optim {

/// Limited-memory BFGS curvature pairs (s_i, y_i).
///
/// Pairs with s^T y <= eps |s| |y| are rejected and counted. The initial
/// inverse-Hessian scale gamma is s^T y / y^T y of the newest pair (or
/// `initial_scale` while the history is empty).
class LbfgsHistory {
  public:
    explicit LbfgsHistory(int memory = 5);

    /// Returns false (and counts a skip) when the pair violates curvature.
    bool push(const Eigen::VectorXd& s, const Eigen::VectorXd& y);
    void clear();

    [[nodiscard]] int memory() const noexcept { return memory_; }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(s_.size()); }
    [[nodiscard]] int skipped() const noexcept { return skipped_; }
    [[nodiscard]] bool empty() const noexcept { return s_.empty(); }

    [[nodiscard]] double gamma() const noexcept;
    void set_initial_scale(double gamma0) noexcept { initial_scale_ = gamma0; }

    [[nodiscard]] const std::deque<Eigen::VectorXd>& s() const noexcept { return s_; }
    [[nodiscard]] const std::deque<Eigen::VectorXd>& y() const noexcept { return y_; }

    /// H^{-1} g by the two-loop recursion. `h0` overrides the initial scale
    /// (gamma when gamma_scaling, else 1).
    [[nodiscard]] Eigen::VectorXd apply_inverse(const Eigen::VectorXd& g, bool gamma_scaling = true,
                                                std::optional<double> h0 = std::nullopt) const;

    /// B v, the direct BFGS Hessian approximation consistent with
    /// apply_inverse(., true), built from B_0 = I / gamma.
    [[nodiscard]] Eigen::VectorXd apply_direct(const Eigen::VectorXd& v) const;

    /// (c B + I)^{-1} v, exact, by Woodbury on the rank-2k form of B.
    [[nodiscard]] Eigen::VectorXd solve_shifted(double c, const Eigen::VectorXd& v) const;

  private:
    void rebuild_direct_cache();

    int memory_;
    int skipped_ = 0;
    double initial_scale_ = 1.0;
    std::deque<Eigen::VectorXd> s_;
    std::deque<Eigen::VectorXd> y_;
    std::deque<double> rho_;
    std::deque<Eigen::VectorXd> bs_; // B_i s_i for the direct product
    std::deque<double> sbs_;         // s_i^T B_i s_i
};

/// Free-function form of the two-loop recursion.
Eigen::VectorXd lbfgs_apply_inverse(const LbfgsHistory& history, const Eigen::VectorXd& g, bool gamma_scaling);

struct QuadraticSolveResult {
    Eigen::VectorXd x;
    int iterations = 0;
    double gradient_norm = 0.0;
    bool converged = false;
};

/// Minimizes 1/2 x^T Q x - b^T x for symmetric positive definite Q, given
/// only products with Q, by L-BFGS with exact line search.
QuadraticSolveResult lbfgs_minimize_quadratic(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply_q,
                                              const Eigen::VectorXd& b, const Eigen::VectorXd& x0, int memory,
                                              int max_iter, double gradient_tol);

} // namespace proxfwi::optim
