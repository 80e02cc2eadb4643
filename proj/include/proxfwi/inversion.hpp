#pragma once

#include "proxfwi/optim.hpp"
#include "proxfwi/wave.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace proxfwi::inversion {

using optim::Vec;

/// Shared inputs of the FWI and WRI oracles. The model vector is the interior
/// squared slowness in row-major order.
struct Survey {
    std::shared_ptr<const wave::Helmholtz> helmholtz;
    AcquisitionGeometry acq; ///< frequencies select the blocks of `observed`
    FreqData observed;
    double f_peak = 10.0;

    void validate() const;
};

/// Reduced FWI misfit 1/2 sum |d - P A(m)^{-1} b|^2 with adjoint-state
/// gradient and Gauss-Newton Hessian products. Factorizations and forward
/// fields are cached for the most recent model.
class FwiOracle : public optim::MisfitOracle {
  public:
    explicit FwiOracle(Survey survey);

    [[nodiscard]] Eigen::Index dimension() const override { return survey_.helmholtz->interior_size(); }
    double value(const Vec& m) override;
    Vec gradient(const Vec& m) override;
    std::pair<double, Vec> value_gradient(const Vec& m) override;
    /// J^T J v.
    Vec hvp(const Vec& m, const Vec& v) override;
    std::optional<double> data_residual(const Vec& m) override;

    /// Synthetic data P A(m)^{-1} b, one block per frequency.
    FreqData predicted(const Vec& m);

    [[nodiscard]] long solves() const noexcept { return solves_; }

  private:
    struct FreqState {
        double omega = 0.0;
        Factorization fact;
        Eigen::MatrixXcd u;
        Eigen::MatrixXcd residual; ///< d - P u
    };
    void ensure(const Vec& m);

    Survey survey_;
    std::vector<Eigen::Index> rx_;
    std::vector<const Eigen::MatrixXcd*> data_;
    std::optional<Vec> cached_m_;
    std::vector<FreqState> states_;
    long solves_ = 0;
};

struct WriOptions {
    /// Penalty mu; unset means 1e-2 times the spectral norm of A at the
    /// lowest frequency for the starting model.
    std::optional<double> mu;
    /// Iteratively refined variant: after each wavefield update the
    /// assimilated data are augmented by the running data residual.
    bool refine_data = false;
};

/// WRI misfit 1/2 sum |b - A(m) u_k|^2 at frozen data-assimilated wavefields
/// u_k, which are recomputed in begin_outer. The Hessian L^T L is diagonal.
class WriOracle : public optim::MisfitOracle {
  public:
    WriOracle(Survey survey, const Vec& m_start, WriOptions options = {});

    [[nodiscard]] Eigen::Index dimension() const override { return survey_.helmholtz->interior_size(); }
    double value(const Vec& m) override;
    Vec gradient(const Vec& m) override;
    std::pair<double, Vec> value_gradient(const Vec& m) override;
    Vec hvp(const Vec& m, const Vec& v) override;
    std::optional<Vec> hessian_diag(const Vec& m) override;
    void begin_outer(const Vec& m) override { update_wavefields(m); }
    /// sqrt(sum |P u_k - d|^2) for the cached wavefields.
    std::optional<double> data_residual(const Vec& m) override;

    void update_wavefields(const Vec& m);
    /// Installs wavefields (one padded matrix per frequency) as if computed at m.
    void set_wavefields(const Vec& m, std::vector<Eigen::MatrixXcd> fields);
    [[nodiscard]] std::vector<Eigen::MatrixXcd> wavefields() const;
    [[nodiscard]] double mu() const noexcept { return mu_; }

    /// 1/2 |b - A(m) u|^2 + 1/2 mu^2 |P u - d|^2 at the cached wavefields.
    double joint_objective(const Vec& m);

  private:
    struct FreqState {
        double omega = 0.0;
        Eigen::MatrixXcd b;
        Eigen::MatrixXcd d_assim; ///< data fed to the augmented solve
        Eigen::MatrixXcd u;
        Eigen::MatrixXcd au; ///< A(m_ref) u
    };
    void require_fields() const;
    Eigen::MatrixXcd interior_fields(const FreqState& s) const;
    /// b - A(m) u, on the padded grid.
    Eigen::MatrixXcd residual(const FreqState& s, const Vec& m) const;

    Survey survey_;
    WriOptions options_;
    double mu_ = 0.0;
    std::vector<Eigen::Index> rx_;
    std::vector<const Eigen::MatrixXcd*> data_;
    std::vector<FreqState> states_;
    Vec m_ref_;
    bool have_fields_ = false;
};

/// 100 |m - m_true| / |m_true|.
double rmse(const Vec& m, const Vec& m_true);
/// 20 log10(rms(signal) / rms(noise)).
double snr_db(const Eigen::VectorXd& signal, const Eigen::VectorXd& noise);

/// Frequency continuation: `paths` lists ordered batch indices; each path is
/// run in turn and each batch warm-starts from the previous result.
struct ContinuationPlan {
    std::vector<std::vector<double>> batches;
    std::vector<std::vector<int>> paths;

    /// `n_paths` sweeps through all batches in order.
    static ContinuationPlan sequential(std::vector<std::vector<double>> batches, int n_paths = 1);
    void validate() const;
};

struct BatchRecord {
    int path = 0;
    int batch = 0;
    std::vector<double> frequencies;
    Vec start;
    optim::SolveResult result;
};

struct DriveResult {
    Vec m;
    std::vector<BatchRecord> batches;
};

using OracleFactory = std::function<std::unique_ptr<optim::MisfitOracle>(const std::vector<double>& frequencies,
                                                                         const Vec& m_start)>;
/// Optional per-batch adjustment of the solver configuration (stopping
/// targets that depend on the frequency subset, for instance).
using BatchConfigure = std::function<void(const std::vector<double>& frequencies, optim::OptConfig& config)>;

DriveResult multiscale_drive(const ContinuationPlan& plan, const OracleFactory& factory, const Denoiser& d,
                             GridShape shape, const optim::OptConfig& config, optim::Method method, const Vec& m0,
                             const BatchConfigure& configure = {});

/// Survey restricted to a frequency subset.
Survey restrict_frequencies(const Survey& s, const std::vector<double>& frequencies);

} // namespace proxfwi::inversion
