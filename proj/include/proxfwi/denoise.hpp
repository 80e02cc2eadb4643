#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace proxfwi {

/// Row-major grid shape (x fastest) of a flattened field.
struct GridShape {
    int nz = 1;
    int nx = 1;
    [[nodiscard]] Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(nz) * nx; }
};

/// Elementwise soft threshold sign(x) max(|x| - t, 0).
Eigen::VectorXd prox_l1(const Eigen::VectorXd& x, double t);

/// Minimizer of 1/2 |x - m|^2 + t |m - ref|^2, i.e. (x + 2t ref) / (1 + 2t).
Eigen::VectorXd prox_l2sq(const Eigen::VectorXd& x, double t, const Eigen::VectorXd& ref);

/// Anisotropic total variation: sum of |forward differences| along z and x.
double tv_anisotropic(const Eigen::VectorXd& m, GridShape shape);

/// Approximate prox of t * TV (anisotropic) by accelerated projected
/// gradient on the dual. The returned field is the best primal iterate seen,
/// so `objective_trace` (one entry per inner iteration, optional) is
/// nonincreasing.
Eigen::VectorXd tv2d(const Eigen::VectorXd& x, GridShape shape, double t, int inner_iters,
                     std::vector<double>* objective_trace = nullptr);

struct NlmParams {
    int patch_radius = 1;
    int search_radius = 5;
    double h = 1.0;     ///< bandwidth
    double sigma = 0.0; ///< noise scale
};

/// Non-local means. Patch distances are mean squared differences over the
/// (2r+1)^2 patch with mirrored borders; the search window is clipped to the
/// grid. Weights are exp(-max(d^2 - 2 sigma^2, 0) / h^2), normalized per pixel.
Eigen::VectorXd nlm(const Eigen::VectorXd& x, GridShape shape, const NlmParams& params);

// --- black-box denoiser ---------------------------------------------------------------

namespace denoisers {

struct Identity {};

/// prox of weight * |.|_1.
struct L1 {
    double weight = 1.0;
};

/// prox of weight * |. - ref|^2.
struct L2Sq {
    double weight = 1.0;
    Eigen::VectorXd ref;
};

/// prox of weight * TV.
struct Tv {
    double weight = 1.0;
    int inner_iters = 100;
};

struct Nlm {
    NlmParams params;
};

/// Any shape-preserving map, e.g. an external program. Receives the input,
/// its shape and the prox scale.
struct Custom {
    std::string name;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, GridShape, double)> fn;
};

} // namespace denoisers

using Denoiser = std::variant<denoisers::Identity, denoisers::L1, denoisers::L2Sq, denoisers::Tv, denoisers::Nlm,
                              denoisers::Custom>;

/// Evaluates the denoiser standing in for prox_{scale R}.
///
/// For L1/L2Sq the scale is the exact prox weight (times the kind's weight),
/// for Tv it multiplies the TV weight, and for Nlm it multiplies the bandwidth
/// h; a zero scale returns x unchanged for every built-in kind.
Eigen::VectorXd apply(const Denoiser& d, const Eigen::VectorXd& x, GridShape shape, double scale);

/// R(x) for denoisers that are proxes of a known function (weights
/// included); std::nullopt for Nlm and Custom.
std::optional<double> regularizer_value(const Denoiser& d, const Eigen::VectorXd& x, GridShape shape);

std::string describe(const Denoiser& d);

} // namespace proxfwi
