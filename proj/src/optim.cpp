#include "proxfwi/optim.hpp"

#include "proxfwi/errors.hpp"
#include "proxfwi/linsys.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace proxfwi::optim {

// --- parsing ---------------------------------------------------------------------------

Method parse_method(const std::string& s)
{
    if (s == "nista") return Method::nista;
    if (s == "nadmm") return Method::nadmm;
    throw DomainError("unknown algorithm '" + s + "' (expected nista|nadmm)");
}

HessianKind parse_hessian(const std::string& s)
{
    if (s == "exact") return HessianKind::exact;
    if (s == "lbfgs") return HessianKind::lbfgs;
    if (s == "identity") return HessianKind::identity;
    throw DomainError("unknown Hessian model '" + s + "' (expected exact|lbfgs|identity)");
}

StepRule parse_step_rule(const std::string& s)
{
    if (s == "spectral" || s == "auto-spectral") return StepRule::spectral;
    if (s == "spectral-squared") return StepRule::spectral_squared;
    if (s == "fixed") return StepRule::fixed;
    throw DomainError("unknown c-rule '" + s + "' (expected spectral|spectral-squared|fixed)");
}

NadmmSolver parse_nadmm_solver(const std::string& s)
{
    if (s == "auto") return NadmmSolver::automatic;
    if (s == "exact-dense") return NadmmSolver::exact_dense;
    if (s == "lbfgs") return NadmmSolver::lbfgs;
    if (s == "diagonal") return NadmmSolver::diagonal;
    throw DomainError("unknown NADMM inner solver '" + s + "'");
}

StopRule parse_stop_rule(const std::string& s)
{
    if (s == "max-iter") return StopRule::max_iterations;
    if (s == "model-error") return StopRule::model_error;
    if (s == "data-residual") return StopRule::data_residual;
    throw DomainError("unknown stopping rule '" + s + "'");
}

std::string to_string(Method m) { return m == Method::nista ? "nista" : "nadmm"; }

std::string to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::max_iterations: return "max-iterations";
    case SolveStatus::converged: return "converged";
    case SolveStatus::model_error_target: return "model-error-target";
    case SolveStatus::data_residual_target: return "data-residual-target";
    case SolveStatus::stagnation: return "stagnation";
    }
    return "unknown";
}

void OptConfig::validate() const
{
    if (!(lambda >= 0.0)) throw DomainError("lambda must be nonnegative");
    if (!(line_search.shrink > 0.0 && line_search.shrink < 1.0)) throw DomainError("line-search shrink must be in (0,1)");
    if (!(line_search.sufficient_decrease > 0.0 && line_search.sufficient_decrease < 1.0)) {
        throw DomainError("sufficient-decrease parameter must be in (0,1)");
    }
    if (line_search.max_trials < 1) throw DomainError("line search needs at least one trial");
    if (lbfgs_memory < 0) throw DomainError("L-BFGS memory must be nonnegative");
    if (max_inner < 1) throw DomainError("max_inner must be >= 1");
    if (max_outer < 0) throw DomainError("max_outer must be >= 0");
    if (c_rule == StepRule::fixed && !(c_fixed > 0.0)) throw DomainError("c_fixed must be positive");
    if (!(c_safety > 0.0)) throw DomainError("c_safety must be positive");
    if (stopping == StopRule::model_error && !model_error) {
        throw DomainError("model-error stopping needs a model_error callback");
    }
}

LeastSquaresOracle::LeastSquaresOracle(Eigen::MatrixXd a, Vec d) : a_(std::move(a)), d_(std::move(d))
{
    if (a_.rows() != d_.size()) {
        throw GeometryError("least-squares oracle: A rows and data length differ");
    }
}

// --- line search ---------------------------------------------------------------------------

LineSearchResult line_search(const std::function<double(const Vec&)>& f, const Vec& m, const Vec& dm, double f0,
                             double c_k, const LineSearchParams& params)
{
    const double dm2 = dm.squaredNorm();
    LineSearchResult best;
    best.value = std::numeric_limits<double>::infinity();
    best.flagged = true;
    double alpha = 1.0;
    for (int t = 1; t <= params.max_trials; ++t) {
        const double ft = f(m + alpha * dm);
        if (std::isfinite(ft) && ft <= f0 - params.sufficient_decrease * alpha * dm2 / c_k) {
            return {alpha, ft, t, false};
        }
        if (std::isfinite(ft) && ft < best.value) {
            best.alpha = alpha;
            best.value = ft;
        }
        best.trials = t;
        alpha *= params.shrink;
    }
    return best;
}

// --- proximal gradient -------------------------------------------------------------------

namespace {

double estimate_sigma(const LinearOperator& apply, Eigen::Index n, double tol, int max_iter)
{
    LinearMap<double> map = [&](const Vec& v) -> Vec { return apply(v); };
    return spectral_norm<double>(map, static_cast<int>(n), tol, max_iter).sigma;
}

void require_finite(const Vec& v, const char* what)
{
    if (!v.allFinite()) {
        throw NumericalError(std::string(what) + ": non-finite iterate (step size too large?)");
    }
}

} // namespace

ProximalGradientResult proximal_gradient(MisfitOracle& oracle, const Denoiser& d, GridShape shape, double lambda,
                                         const Vec& m0, int iters, bool accelerate, std::optional<double> step,
                                         double c_safety)
{
    if (!(lambda >= 0.0)) {
        throw DomainError("lambda must be nonnegative");
    }
    double c = 0.0;
    if (step) {
        c = *step;
    } else {
        const double sigma = estimate_sigma([&](const Vec& v) { return oracle.hvp(m0, v); }, m0.size(), 1e-8, 5000);
        c = sigma > 0.0 ? c_safety / sigma : 1.0;
    }
    if (!(c > 0.0)) {
        throw DomainError("proximal gradient step must be positive");
    }
    Vec m = m0;
    Vec p = m0;
    for (int k = 1; k <= iters; ++k) {
        const Vec g = oracle.gradient(p);
        Vec m_next = apply(d, p - c * g, shape, c * lambda);
        require_finite(m_next, "proximal_gradient");
        const double coef = accelerate ? static_cast<double>(k - 1) / (k + 2) : 0.0;
        p = m_next + coef * (m_next - m);
        m = std::move(m_next);
        if (!std::isfinite(oracle.value(m))) {
            throw NumericalError("proximal_gradient: objective diverged");
        }
    }
    return {m, iters, c};
}

// --- NISTA --------------------------------------------------------------------------------

NistaDirection nista_direction(const LinearOperator& hess, const Vec& grad, const Vec& m_k, const Denoiser& d,
                               GridShape shape, double lambda, double c_k, int n_inner, const Vec& dp0)
{
    if (!(c_k > 0.0)) {
        throw DomainError("nista_direction: c_k must be positive");
    }
    if (n_inner < 1) {
        throw DomainError("nista_direction: need at least one inner iteration");
    }
    NistaDirection out;
    Vec dp = dp0.size() == 0 ? Vec::Zero(m_k.size()) : dp0;
    Vec dm_prev = dp;
    Vec dm;
    for (int l = 1; l <= n_inner; ++l) {
        Vec hdp;
        if (dp.isZero(0.0)) {
            hdp = Vec::Zero(dp.size());
        } else {
            hdp = hess(dp);
            ++out.hvp_count;
        }
        const Vec half = dp - c_k * (hdp + grad);
        dm = apply(d, m_k + half, shape, c_k * lambda) - m_k;
        require_finite(dm, "nista_direction");
        const double coef = static_cast<double>(l - 1) / (l + 2);
        dp = dm + coef * (dm - dm_prev);
        dm_prev = dm;
    }
    out.direction = std::move(dm);
    return out;
}

// --- NADMM ----------------------------------------------------------------------------------

AdmmState make_admm_state(const Vec& m0, bool p_at_m0)
{
    AdmmState s;
    s.m = m0;
    s.p = p_at_m0 ? m0 : Vec::Zero(m0.size());
    s.q = Vec::Zero(m0.size());
    return s;
}

namespace {

Eigen::MatrixXd materialize(const HessianModel& h)
{
    if (h.dense) {
        return *h.dense;
    }
    Eigen::MatrixXd out(h.n, h.n);
    Vec e = Vec::Zero(h.n);
    for (Eigen::Index j = 0; j < h.n; ++j) {
        e[j] = 1.0;
        out.col(j) = h.apply(e);
        e[j] = 0.0;
    }
    return out;
}

} // namespace

Vec solve_damped_newton(const HessianModel& h, double c, const Vec& rhs, NadmmSolver solver, int dense_limit,
                        int max_inner, int lbfgs_memory)
{
    if (solver == NadmmSolver::automatic) {
        if (h.diag) {
            solver = NadmmSolver::diagonal;
        } else if (h.n <= dense_limit) {
            solver = NadmmSolver::exact_dense;
        } else {
            solver = NadmmSolver::lbfgs;
        }
    }
    switch (solver) {
    case NadmmSolver::diagonal: {
        if (!h.diag) {
            throw DomainError("diagonal NADMM solver needs a diagonal Hessian");
        }
        return rhs.cwiseQuotient((c * h.diag->array() + 1.0).matrix());
    }
    case NadmmSolver::exact_dense: {
        Eigen::MatrixXd sys = c * materialize(h);
        sys.diagonal().array() += 1.0;
        Vec x = sys.partialPivLu().solve(rhs);
        require_finite(x, "dense damped Newton solve");
        return x;
    }
    case NadmmSolver::lbfgs: {
        if (h.lbfgs) {
            return h.lbfgs->solve_shifted(c, rhs);
        }
        auto res = lbfgs_minimize_quadratic([&](const Vec& v) -> Vec { return c * h.apply(v) + v; }, rhs,
                                            Vec::Zero(rhs.size()), lbfgs_memory, max_inner, 1e-10);
        return res.x;
    }
    case NadmmSolver::automatic: break;
    }
    throw DomainError("unreachable NADMM solver selection");
}

NadmmStepResult nadmm_step(const std::function<double(const Vec&)>& misfit, double misfit_at_m, const Vec& grad,
                           const HessianModel& h, const AdmmState& state, const Denoiser& d, GridShape shape,
                           double lambda, double c_k, const OptConfig& config)
{
    if (!(c_k > 0.0)) {
        throw DomainError("nadmm_step: c_k must be positive");
    }
    if (state.p.size() != state.m.size() || state.q.size() != state.m.size()) {
        throw GeometryError("nadmm_step: auxiliaries must be shaped like m");
    }
    NadmmStepResult out;
    const Vec prior = state.p + state.q;
    const Vec rhs = -c_k * grad + (prior - state.m);
    out.direction = solve_damped_newton(h, c_k, rhs, config.nadmm_solver, config.dense_limit, config.max_inner,
                                        config.lbfgs_memory);
    require_finite(out.direction, "nadmm_step");

    const auto surrogate = [&](const Vec& x) { return misfit(x) + (x - prior).squaredNorm() / (2.0 * c_k); };
    const double f0 = misfit_at_m + (state.m - prior).squaredNorm() / (2.0 * c_k);
    double alpha = 0.0;
    if (out.direction.squaredNorm() > 0.0) {
        out.line_search = line_search(surrogate, state.m, out.direction, f0, c_k, config.line_search);
        alpha = out.line_search.value < f0 ? out.line_search.alpha : 0.0;
    }
    out.line_search.alpha = alpha;

    out.state = state;
    out.state.c = c_k;
    out.state.m = state.m + alpha * out.direction;
    out.state.p = apply(d, out.state.m - state.q, shape, c_k * lambda);
    out.state.q = state.q + out.state.p - out.state.m;
    out.state.iteration = state.iteration + 1;
    require_finite(out.state.m, "nadmm_step");
    return out;
}

// --- driver ---------------------------------------------------------------------------------

namespace {

double reg_or_nan(const Denoiser& d, const Vec& m, GridShape shape)
{
    const auto r = regularizer_value(d, m, shape);
    return r ? *r : std::numeric_limits<double>::quiet_NaN();
}

double composite(double misfit, double reg, double lambda)
{
    return std::isnan(reg) ? misfit : misfit + lambda * reg;
}

} // namespace

SolveResult proximal_newton_solve(MisfitOracle& oracle, const Denoiser& d, GridShape shape, const OptConfig& config,
                                  const Vec& m0, Method method)
{
    config.validate();
    if (m0.size() != oracle.dimension() || m0.size() != shape.size()) {
        throw GeometryError("starting model does not match the oracle dimension or grid shape");
    }
    const double lambda = config.lambda;
    SolveResult out;
    Vec m = m0;
    AdmmState admm = make_admm_state(m0, config.admm_start_at_m0);
    LbfgsHistory hist(config.lbfgs_memory);
    Vec warm = Vec::Zero(m.size());

    oracle.begin_outer(m);
    auto [f, g] = oracle.value_gradient(m);
    {
        const double reg = reg_or_nan(d, m, shape);
        out.history.push_back({0, composite(f, reg, lambda), f, reg, 0.0, 0.0, 0.0, false});
    }
    const auto scaled_tol = [&](const Vec& x) { return config.step_tol * std::max(1.0, x.norm()); };
    const auto residual_reached = [&](const Vec& x) {
        if (config.stopping != StopRule::data_residual) {
            return false;
        }
        const auto r = oracle.data_residual(x);
        out.final_data_residual = r;
        return r && *r <= config.stop_target;
    };

    if (residual_reached(m)) {
        out.status = SolveStatus::data_residual_target;
        out.m = m;
        out.admm = admm;
        return out;
    }

    double c = 0.0;
    int flagged_run = 0;
    out.status = SolveStatus::max_iterations;
    for (int k = 0; k < config.max_outer; ++k) {
        HessianModel h;
        h.n = m.size();
        switch (config.hessian) {
        case HessianKind::exact:
            h.apply = [&oracle, mk = m](const Vec& v) { return oracle.hvp(mk, v); };
            h.diag = oracle.hessian_diag(m);
            h.dense = oracle.hessian_dense(m);
            break;
        case HessianKind::lbfgs:
            if (hist.empty() && k == 0) {
                const double gn = g.norm();
                hist.set_initial_scale(gn > 0.0 ? config.lbfgs_initial_step * std::max(1.0, m.norm()) / gn : 1.0);
            }
            h.apply = [&hist](const Vec& v) { return hist.apply_direct(v); };
            h.lbfgs = &hist;
            break;
        case HessianKind::identity:
            h.apply = [](const Vec& v) { return v; };
            h.diag = Vec::Ones(m.size());
            break;
        }

        const bool frozen = method == Method::nadmm && k >= config.c_freeze_after && c > 0.0;
        if (!frozen) {
            if (config.c_rule == StepRule::fixed) {
                c = config.c_fixed;
            } else {
                double sigma = 0.0;
                if (h.diag) {
                    sigma = h.diag->cwiseAbs().maxCoeff();
                } else if (h.lbfgs && hist.empty()) {
                    sigma = 1.0 / hist.gamma();
                } else {
                    sigma = estimate_sigma(h.apply, h.n, config.spectral_tol, config.spectral_max_iter);
                }
                if (sigma > 0.0 && std::isfinite(sigma)) {
                    c = config.c_rule == StepRule::spectral ? config.c_safety / sigma
                                                            : config.c_safety / (sigma * sigma);
                } else {
                    c = config.c_fixed;
                }
            }
        }

        Vec m_next;
        LineSearchResult ls;
        Vec step;
        const auto misfit_fn = [&oracle](const Vec& x) { return oracle.value(x); };
        if (method == Method::nista) {
            auto dir = nista_direction(h.apply, g, m, d, shape, lambda, c, config.max_inner,
                                       config.warm_start ? warm : Vec::Zero(m.size()));
            if (config.step_tol > 0.0 && dir.direction.norm() <= scaled_tol(m)) {
                out.status = SolveStatus::converged;
                break;
            }
            const auto objective = [&](const Vec& x) { return composite(oracle.value(x), reg_or_nan(d, x, shape), lambda); };
            const double f0 = composite(f, reg_or_nan(d, m, shape), lambda);
            ls = line_search(objective, m, dir.direction, f0, c, config.line_search);
            if (!(ls.value < f0)) {
                ls.alpha = 0.0;
            }
            warm = dir.direction;
            step = ls.alpha * dir.direction;
            m_next = m + step;
        } else {
            admm.m = m;
            auto res = nadmm_step(misfit_fn, f, g, h, admm, d, shape, lambda, c, config);
            ls = res.line_search;
            step = res.state.m - m;
            admm = std::move(res.state);
            m_next = admm.m;
        }

        flagged_run = ls.flagged ? flagged_run + 1 : 0;

        if (config.hessian == HessianKind::lbfgs && step.squaredNorm() > 0.0) {
            hist.push(step, oracle.gradient(m_next) - g);
        }
        m = std::move(m_next);
        oracle.begin_outer(m);
        std::tie(f, g) = oracle.value_gradient(m);
        const double reg = reg_or_nan(d, m, shape);
        out.history.push_back({k + 1, composite(f, reg, lambda), f, reg, ls.alpha, step.norm(), c, ls.flagged});
        out.iterations = k + 1;

        if (residual_reached(m)) {
            out.status = SolveStatus::data_residual_target;
            break;
        }
        if (config.stopping == StopRule::model_error && config.model_error(m) <= config.stop_target) {
            out.status = SolveStatus::model_error_target;
            break;
        }
        if (config.step_tol > 0.0 && step.norm() <= scaled_tol(m)) {
            const bool primal_ok = method == Method::nista || (admm.p - admm.m).norm() <= scaled_tol(m);
            if (primal_ok) {
                out.status = SolveStatus::converged;
                break;
            }
        }
        if (flagged_run >= config.stagnation_limit) {
            out.status = SolveStatus::stagnation;
            break;
        }
    }
    out.m = m;
    out.admm = admm;
    return out;
}

void write_history_csv(std::ostream& os, const std::vector<IterationRecord>& history)
{
    os << "iter,objective,misfit,reg_value,alpha,step_norm,ck\n";
    const auto old = os.precision(17);
    for (const auto& r : history) {
        os << r.iter << ',' << r.objective << ',' << r.misfit << ',';
        if (std::isnan(r.reg_value)) {
            os << "";
        } else {
            os << r.reg_value;
        }
        os << ',' << r.alpha << ',' << r.step_norm << ',' << r.ck << '\n';
    }
    os.precision(old);
}

} // namespace proxfwi::optim
