#pragma once

#include "proxfwi/denoise.hpp"
#include "proxfwi/lbfgs.hpp"

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace proxfwi::optim {

using Vec = Eigen::VectorXd;
using LinearOperator = std::function<Vec(const Vec&)>;

/// Misfit term M(m) of the composite objective M(m) + lambda R(m).
///
/// Oracles may cache per-model state (wavefields, factorizations), hence the
/// non-const interface. `begin_outer` is called once per outer iteration
/// with the current iterate before any other query at that iterate; oracles
/// whose misfit depends on auxiliary state (IR-WRI wavefields) refresh it
/// there.
class MisfitOracle {
  public:
    virtual ~MisfitOracle() = default;

    [[nodiscard]] virtual Eigen::Index dimension() const = 0;
    virtual double value(const Vec& m) = 0;
    virtual Vec gradient(const Vec& m) = 0;
    virtual std::pair<double, Vec> value_gradient(const Vec& m) { return {value(m), gradient(m)}; }
    /// Hessian (or Gauss-Newton Hessian) times v at m.
    virtual Vec hvp(const Vec& m, const Vec& v) = 0;

    virtual std::optional<Vec> hessian_diag(const Vec& /*m*/) { return std::nullopt; }
    virtual std::optional<Eigen::MatrixXd> hessian_dense(const Vec& /*m*/) { return std::nullopt; }

    virtual void begin_outer(const Vec& /*m*/) {}
    /// Data-space residual norm used by discrepancy stopping, if defined.
    virtual std::optional<double> data_residual(const Vec& /*m*/) { return std::nullopt; }
};

/// Oracle assembled from callbacks; unset optional callbacks report "not available".
class FunctionOracle : public MisfitOracle {
  public:
    struct Callbacks {
        std::function<double(const Vec&)> value;
        std::function<Vec(const Vec&)> gradient;
        std::function<Vec(const Vec&, const Vec&)> hvp;
        std::function<Vec(const Vec&)> hessian_diag;
        std::function<Eigen::MatrixXd(const Vec&)> hessian_dense;
    };

    FunctionOracle(Eigen::Index n, Callbacks cb) : n_(n), cb_(std::move(cb)) {}

    [[nodiscard]] Eigen::Index dimension() const override { return n_; }
    double value(const Vec& m) override { return cb_.value(m); }
    Vec gradient(const Vec& m) override { return cb_.gradient(m); }
    Vec hvp(const Vec& m, const Vec& v) override { return cb_.hvp(m, v); }
    std::optional<Vec> hessian_diag(const Vec& m) override
    {
        return cb_.hessian_diag ? std::optional<Vec>(cb_.hessian_diag(m)) : std::nullopt;
    }
    std::optional<Eigen::MatrixXd> hessian_dense(const Vec& m) override
    {
        return cb_.hessian_dense ? std::optional<Eigen::MatrixXd>(cb_.hessian_dense(m)) : std::nullopt;
    }

  private:
    Eigen::Index n_;
    Callbacks cb_;
};

/// M(m) = 1/2 |d - A m|^2.
class LeastSquaresOracle : public MisfitOracle {
  public:
    LeastSquaresOracle(Eigen::MatrixXd a, Vec d);

    [[nodiscard]] Eigen::Index dimension() const override { return a_.cols(); }
    double value(const Vec& m) override { return 0.5 * (d_ - a_ * m).squaredNorm(); }
    Vec gradient(const Vec& m) override { return a_.transpose() * (a_ * m - d_); }
    Vec hvp(const Vec& /*m*/, const Vec& v) override { return a_.transpose() * (a_ * v); }
    std::optional<Eigen::MatrixXd> hessian_dense(const Vec& /*m*/) override { return a_.transpose() * a_; }

  private:
    Eigen::MatrixXd a_;
    Vec d_;
};

// --- configuration -------------------------------------------------------------------

enum class Method { nista, nadmm };
enum class HessianKind { exact, lbfgs, identity };
enum class StepRule { spectral, spectral_squared, fixed };
enum class NadmmSolver { automatic, exact_dense, lbfgs, diagonal };
enum class StopRule { max_iterations, model_error, data_residual };

Method parse_method(const std::string& s);
HessianKind parse_hessian(const std::string& s);
StepRule parse_step_rule(const std::string& s);
NadmmSolver parse_nadmm_solver(const std::string& s);
StopRule parse_stop_rule(const std::string& s);
std::string to_string(Method m);

struct LineSearchParams {
    double shrink = 0.5;                ///< beta_ls in (0, 1)
    double sufficient_decrease = 1e-4;  ///< sigma_ls in (0, 1)
    int max_trials = 30;
};

struct OptConfig {
    double lambda = 0.0;
    HessianKind hessian = HessianKind::exact;

    /// c_k = c_safety / sigma_max(H_k) (spectral), c_safety / sigma_max^2
    /// (spectral_squared) or c_fixed.
    StepRule c_rule = StepRule::spectral;
    double c_fixed = 1.0;
    double c_safety = 0.9;
    /// NADMM keeps c_k fixed from this outer iteration on.
    int c_freeze_after = 3;

    int max_outer = 70;
    int max_inner = 100; ///< NISTA inner iterations / inner L-BFGS iterations
    LineSearchParams line_search;
    int lbfgs_memory = 5;
    /// With an empty L-BFGS history the first step is scaled to this
    /// fraction of max(|m_0|, 1).
    double lbfgs_initial_step = 0.01;
    bool warm_start = false;

    NadmmSolver nadmm_solver = NadmmSolver::automatic;
    int dense_limit = 64;
    /// Start ADMM with p_0 = m_0 instead of p_0 = 0.
    bool admm_start_at_m0 = false;

    StopRule stopping = StopRule::max_iterations;
    double stop_target = 0.0;
    std::function<double(const Vec&)> model_error;
    /// Relative step tolerance; 0 disables.
    double step_tol = 0.0;
    int stagnation_limit = 3;

    double spectral_tol = 1e-4;
    int spectral_max_iter = 500;

    void validate() const;
};

// --- building blocks -------------------------------------------------------------------

struct LineSearchResult {
    double alpha = 0.0;
    double value = 0.0;
    int trials = 0;
    bool flagged = false;
};

/// Backtracking over alpha in {1, beta, beta^2, ...}: returns the first
/// alpha with f(m + alpha dm) <= f0 - sigma alpha |dm|^2 / c_k. When no trial
/// passes, the trial with the lowest objective is returned and flagged.
LineSearchResult line_search(const std::function<double(const Vec&)>& f, const Vec& m, const Vec& dm, double f0,
                             double c_k, const LineSearchParams& params);

struct ProximalGradientResult {
    Vec m;
    int iterations = 0;
    double step = 0.0;
};

/// Proximal gradient (ISTA) for M + lambda R, optionally with Nesterov
/// extrapolation weight (k-1)/(k+2). The default step is
/// c_safety / sigma_max(hvp), valid for quadratic misfits.
ProximalGradientResult proximal_gradient(MisfitOracle& oracle, const Denoiser& d, GridShape shape, double lambda,
                                         const Vec& m0, int iters, bool accelerate,
                                         std::optional<double> step = std::nullopt, double c_safety = 0.9);

struct NistaDirection {
    Vec direction;
    int hvp_count = 0;
};

/// Proximal Newton direction by N inner iterations of generalized ISTA on
/// the quadratic model g^T dm + 1/2 dm^T H dm + lambda R(m_k + dm).
NistaDirection nista_direction(const LinearOperator& hess, const Vec& grad, const Vec& m_k, const Denoiser& d,
                               GridShape shape, double lambda, double c_k, int n_inner, const Vec& dp0);

/// Local Hessian model H_k. `apply` is always set; the other members are
/// present when the representation allows it.
struct HessianModel {
    Eigen::Index n = 0;
    LinearOperator apply;
    std::optional<Vec> diag;
    std::optional<Eigen::MatrixXd> dense;
    const LbfgsHistory* lbfgs = nullptr;
};

/// ADMM state (iterate, auxiliary p, scaled dual q).
struct AdmmState {
    Vec m;
    Vec p;
    Vec q;
    double c = 0.0;
    int iteration = 0;
};

AdmmState make_admm_state(const Vec& m0, bool p_at_m0 = false);

/// Solves (c H + I) dm = rhs with the selected inner solver.
Vec solve_damped_newton(const HessianModel& h, double c, const Vec& rhs, NadmmSolver solver, int dense_limit,
                        int max_inner, int lbfgs_memory);

struct NadmmStepResult {
    AdmmState state;
    Vec direction;
    LineSearchResult line_search;
};

/// One NADMM outer step: damped Newton direction for the dynamic prior
/// p_k + q_k, line search on M(m) + |m - p_k - q_k|^2 / (2c), then
/// p_{k+1} = prox(m_{k+1} - q_k) and q_{k+1} = q_k + p_{k+1} - m_{k+1}.
NadmmStepResult nadmm_step(const std::function<double(const Vec&)>& misfit, double misfit_at_m, const Vec& grad,
                           const HessianModel& h, const AdmmState& state, const Denoiser& d, GridShape shape,
                           double lambda, double c_k, const OptConfig& config);

// --- driver ------------------------------------------------------------------------------

struct IterationRecord {
    int iter = 0;
    double objective = 0.0;
    double misfit = 0.0;
    double reg_value = 0.0; ///< NaN when the denoiser has no known R
    double alpha = 0.0;
    double step_norm = 0.0;
    double ck = 0.0;
    bool flagged = false;
};

enum class SolveStatus { max_iterations, converged, model_error_target, data_residual_target, stagnation };

std::string to_string(SolveStatus s);

struct SolveResult {
    Vec m;
    std::vector<IterationRecord> history; ///< row 0 is the starting point
    SolveStatus status = SolveStatus::max_iterations;
    int iterations = 0;
    AdmmState admm; ///< final ADMM state (NADMM only)
    std::optional<double> final_data_residual;
};

/// Proximal Newton outer loop m_{k+1} = m_k + alpha_k dm_k with the NISTA or
/// NADMM direction until the configured stopping rule fires.
SolveResult proximal_newton_solve(MisfitOracle& oracle, const Denoiser& d, GridShape shape, const OptConfig& config,
                                  const Vec& m0, Method method);

/// CSV with columns iter,objective,misfit,reg_value,alpha,step_norm,ck.
void write_history_csv(std::ostream& os, const std::vector<IterationRecord>& history);

} // namespace proxfwi::optim
