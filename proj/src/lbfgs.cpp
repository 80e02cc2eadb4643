#include "proxfwi/lbfgs.hpp"

#include "proxfwi/errors.hpp"

#include <cmath>
#include <vector>

namespace proxfwi::optim {

LbfgsHistory::LbfgsHistory(int memory) : memory_(memory)
{
    if (memory < 0) {
        throw DomainError("L-BFGS memory must be nonnegative");
    }
}

bool LbfgsHistory::push(const Eigen::VectorXd& s, const Eigen::VectorXd& y)
{
    const double sy = s.dot(y);
    if (!(sy > 1e-12 * s.norm() * y.norm()) || !std::isfinite(sy) || memory_ == 0) {
        ++skipped_;
        return false;
    }
    if (static_cast<int>(s_.size()) == memory_) {
        s_.pop_front();
        y_.pop_front();
        rho_.pop_front();
    }
    s_.push_back(s);
    y_.push_back(y);
    rho_.push_back(1.0 / sy);
    rebuild_direct_cache();
    return true;
}

void LbfgsHistory::clear()
{
    s_.clear();
    y_.clear();
    rho_.clear();
    bs_.clear();
    sbs_.clear();
}

double LbfgsHistory::gamma() const noexcept
{
    if (s_.empty()) {
        return initial_scale_;
    }
    return s_.back().dot(y_.back()) / y_.back().squaredNorm();
}

Eigen::VectorXd LbfgsHistory::apply_inverse(const Eigen::VectorXd& g, bool gamma_scaling,
                                            std::optional<double> h0) const
{
    const int k = size();
    std::vector<double> alpha(k);
    Eigen::VectorXd q = g;
    for (int i = k - 1; i >= 0; --i) {
        alpha[i] = rho_[i] * s_[i].dot(q);
        q -= alpha[i] * y_[i];
    }
    const double scale = h0 ? *h0 : (gamma_scaling ? gamma() : 1.0);
    Eigen::VectorXd r = scale * q;
    for (int i = 0; i < k; ++i) {
        const double beta = rho_[i] * y_[i].dot(r);
        r += s_[i] * (alpha[i] - beta);
    }
    return r;
}

void LbfgsHistory::rebuild_direct_cache()
{
    bs_.clear();
    sbs_.clear();
    const double inv_gamma = 1.0 / gamma();
    for (int i = 0; i < size(); ++i) {
        Eigen::VectorXd b = inv_gamma * s_[i];
        for (int j = 0; j < i; ++j) {
            b += -bs_[j] * (bs_[j].dot(s_[i]) / sbs_[j]) + y_[j] * (rho_[j] * y_[j].dot(s_[i]));
        }
        sbs_.push_back(s_[i].dot(b));
        bs_.push_back(std::move(b));
    }
}

Eigen::VectorXd LbfgsHistory::apply_direct(const Eigen::VectorXd& v) const
{
    Eigen::VectorXd out = v / gamma();
    for (int i = 0; i < size(); ++i) {
        out += -bs_[i] * (bs_[i].dot(v) / sbs_[i]) + y_[i] * (rho_[i] * y_[i].dot(v));
    }
    return out;
}

Eigen::VectorXd LbfgsHistory::solve_shifted(double c, const Eigen::VectorXd& v) const
{
    if (!(c > 0.0)) {
        throw DomainError("shifted L-BFGS solve needs c > 0");
    }
    // c B + I = beta I + U diag(e) U^T with U = [B_i s_i, y_i]
    const double beta = c / gamma() + 1.0;
    const int k = size();
    if (k == 0) {
        return v / beta;
    }
    Eigen::MatrixXd u(v.size(), 2 * k);
    Eigen::VectorXd e_inv(2 * k);
    for (int i = 0; i < k; ++i) {
        u.col(i) = bs_[i];
        u.col(k + i) = y_[i];
        e_inv[i] = -sbs_[i] / c;
        e_inv[k + i] = 1.0 / (c * rho_[i]);
    }
    Eigen::MatrixXd small = u.transpose() * u / beta;
    small.diagonal() += e_inv;
    const Eigen::VectorXd w = small.fullPivLu().solve(u.transpose() * v);
    return (v - u * w / beta) / beta;
}

Eigen::VectorXd lbfgs_apply_inverse(const LbfgsHistory& history, const Eigen::VectorXd& g, bool gamma_scaling)
{
    return history.apply_inverse(g, gamma_scaling);
}

QuadraticSolveResult lbfgs_minimize_quadratic(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply_q,
                                              const Eigen::VectorXd& b, const Eigen::VectorXd& x0, int memory,
                                              int max_iter, double gradient_tol)
{
    QuadraticSolveResult res;
    res.x = x0;
    LbfgsHistory hist(memory);
    Eigen::VectorXd qx = apply_q(res.x);
    Eigen::VectorXd g = qx - b;
    res.gradient_norm = g.norm();
    const double target = gradient_tol * std::max(1.0, b.norm());
    for (int it = 0; it < max_iter && res.gradient_norm > target; ++it) {
        const Eigen::VectorXd d = -hist.apply_inverse(g, true);
        const Eigen::VectorXd qd = apply_q(d);
        const double curvature = d.dot(qd);
        if (!(curvature > 0.0)) {
            break; // Q not positive definite along d
        }
        const double step = -g.dot(d) / curvature;
        const Eigen::VectorXd s = step * d;
        const Eigen::VectorXd y = step * qd;
        res.x += s;
        g += y;
        hist.push(s, y);
        res.iterations = it + 1;
        res.gradient_norm = g.norm();
    }
    res.converged = res.gradient_norm <= target;
    return res;
}

} // namespace proxfwi::optim
