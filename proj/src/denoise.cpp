#include "proxfwi/denoise.hpp"

#include "proxfwi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace proxfwi {

namespace {

void check_shape(const Eigen::VectorXd& x, GridShape shape)
{
    if (shape.nz < 1 || shape.nx < 1 || x.size() != shape.size()) {
        throw GeometryError("field of size " + std::to_string(x.size()) + " does not match shape " +
                            std::to_string(shape.nz) + "x" + std::to_string(shape.nx));
    }
}

void check_weight(double t, const char* what)
{
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw DomainError(std::string(what) + ": weight must be finite and nonnegative");
    }
}

// Forward differences. dz has (nz-1)*nx entries, dx has nz*(nx-1).
void gradient(const Eigen::VectorXd& m, GridShape s, Eigen::VectorXd& dz, Eigen::VectorXd& dx)
{
    for (int iz = 0; iz + 1 < s.nz; ++iz) {
        for (int ix = 0; ix < s.nx; ++ix) {
            dz[iz * s.nx + ix] = m[(iz + 1) * s.nx + ix] - m[iz * s.nx + ix];
        }
    }
    for (int iz = 0; iz < s.nz; ++iz) {
        for (int ix = 0; ix + 1 < s.nx; ++ix) {
            dx[iz * (s.nx - 1) + ix] = m[iz * s.nx + ix + 1] - m[iz * s.nx + ix];
        }
    }
}

// out = D^T (pz, px)
void divergence_t(const Eigen::VectorXd& pz, const Eigen::VectorXd& px, GridShape s, Eigen::VectorXd& out)
{
    out.setZero();
    for (int iz = 0; iz + 1 < s.nz; ++iz) {
        for (int ix = 0; ix < s.nx; ++ix) {
            const double p = pz[iz * s.nx + ix];
            out[iz * s.nx + ix] -= p;
            out[(iz + 1) * s.nx + ix] += p;
        }
    }
    for (int iz = 0; iz < s.nz; ++iz) {
        for (int ix = 0; ix + 1 < s.nx; ++ix) {
            const double p = px[iz * (s.nx - 1) + ix];
            out[iz * s.nx + ix] -= p;
            out[iz * s.nx + ix + 1] += p;
        }
    }
}

int mirror(int i, int n)
{
    if (i < 0) return -i;
    if (i >= n) return 2 * n - 2 - i;
    return i;
}

} // namespace

Eigen::VectorXd prox_l1(const Eigen::VectorXd& x, double t)
{
    check_weight(t, "prox_l1");
    return x.unaryExpr([t](double v) { return std::copysign(std::max(std::abs(v) - t, 0.0), v); });
}

Eigen::VectorXd prox_l2sq(const Eigen::VectorXd& x, double t, const Eigen::VectorXd& ref)
{
    check_weight(t, "prox_l2sq");
    if (ref.size() != x.size()) {
        throw GeometryError("prox_l2sq: reference shape mismatch");
    }
    return (x + 2.0 * t * ref) / (1.0 + 2.0 * t);
}

double tv_anisotropic(const Eigen::VectorXd& m, GridShape shape)
{
    check_shape(m, shape);
    Eigen::VectorXd dz((shape.nz - 1) * shape.nx);
    Eigen::VectorXd dx(shape.nz * (shape.nx - 1));
    gradient(m, shape, dz, dx);
    return dz.lpNorm<1>() + dx.lpNorm<1>();
}

Eigen::VectorXd tv2d(const Eigen::VectorXd& x, GridShape shape, double t, int inner_iters,
                     std::vector<double>* objective_trace)
{
    check_shape(x, shape);
    check_weight(t, "tv2d");
    if (objective_trace) {
        objective_trace->clear();
    }
    if (t == 0.0 || inner_iters <= 0) {
        return x;
    }
    const auto objective = [&](const Eigen::VectorXd& m) {
        return 0.5 * (x - m).squaredNorm() + t * tv_anisotropic(m, shape);
    };

    // Dual variables live on edges and are box-constrained to [-t, t].
    const Eigen::Index nzx = static_cast<Eigen::Index>(shape.nz - 1) * shape.nx;
    const Eigen::Index nxz = static_cast<Eigen::Index>(shape.nz) * (shape.nx - 1);
    Eigen::VectorXd pz = Eigen::VectorXd::Zero(nzx), px = Eigen::VectorXd::Zero(nxz);
    Eigen::VectorXd yz = pz, yx = px;
    Eigen::VectorXd gz(nzx), gx(nxz), m(x.size()), dtp(x.size());
    constexpr double step = 1.0 / 8.0; // 1 / |D|^2 bound for 2D forward differences
    double momentum = 1.0;

    Eigen::VectorXd best = x;
    double best_obj = objective(x);

    for (int it = 0; it < inner_iters; ++it) {
        divergence_t(yz, yx, shape, dtp);
        m = x - dtp;
        gradient(m, shape, gz, gx);
        const Eigen::VectorXd pz_old = pz, px_old = px;
        pz = (yz + step * gz).cwiseMax(-t).cwiseMin(t);
        px = (yx + step * gx).cwiseMax(-t).cwiseMin(t);
        const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        const double beta = (momentum - 1.0) / next;
        yz = pz + beta * (pz - pz_old);
        yx = px + beta * (px - px_old);
        momentum = next;

        divergence_t(pz, px, shape, dtp);
        m = x - dtp;
        const double obj = objective(m);
        if (obj < best_obj) {
            best_obj = obj;
            best = m;
        }
        if (objective_trace) {
            objective_trace->push_back(best_obj);
        }
    }
    return best;
}

Eigen::VectorXd nlm(const Eigen::VectorXd& x, GridShape shape, const NlmParams& p)
{
    check_shape(x, shape);
    if (p.patch_radius < 1 || p.search_radius < 1) {
        throw DomainError("nlm: radii must be >= 1");
    }
    if (!(p.h > 0.0) || !std::isfinite(p.h) || !(p.sigma >= 0.0)) {
        throw DomainError("nlm: bandwidth must be positive and sigma nonnegative");
    }
    const int r = p.patch_radius;
    if (shape.nz < 2 * r + 1 || shape.nx < 2 * r + 1) {
        throw GeometryError("nlm: grid smaller than the patch window");
    }
    const int pnz = shape.nz + 2 * r;
    const int pnx = shape.nx + 2 * r;
    Eigen::VectorXd padded(static_cast<Eigen::Index>(pnz) * pnx);
    for (int iz = 0; iz < pnz; ++iz) {
        for (int ix = 0; ix < pnx; ++ix) {
            padded[iz * pnx + ix] = x[mirror(iz - r, shape.nz) * shape.nx + mirror(ix - r, shape.nx)];
        }
    }
    const double patch_count = (2.0 * r + 1) * (2.0 * r + 1);
    const double two_sigma2 = 2.0 * p.sigma * p.sigma;
    const double h2 = p.h * p.h;

    Eigen::VectorXd out(x.size());
    for (int iz = 0; iz < shape.nz; ++iz) {
        for (int ix = 0; ix < shape.nx; ++ix) {
            const int z0 = std::max(0, iz - p.search_radius);
            const int z1 = std::min(shape.nz - 1, iz + p.search_radius);
            const int x0 = std::max(0, ix - p.search_radius);
            const int x1 = std::min(shape.nx - 1, ix + p.search_radius);
            double wsum = 0.0;
            double acc = 0.0;
            for (int jz = z0; jz <= z1; ++jz) {
                for (int jx = x0; jx <= x1; ++jx) {
                    double d2 = 0.0;
                    for (int a = 0; a <= 2 * r; ++a) {
                        const double* pa = padded.data() + (iz + a) * pnx + ix;
                        const double* pb = padded.data() + (jz + a) * pnx + jx;
                        for (int b = 0; b <= 2 * r; ++b) {
                            const double diff = pa[b] - pb[b];
                            d2 += diff * diff;
                        }
                    }
                    d2 /= patch_count;
                    const double w = std::exp(-std::max(d2 - two_sigma2, 0.0) / h2);
                    wsum += w;
                    acc += w * x[jz * shape.nx + jx];
                }
            }
            out[iz * shape.nx + ix] = acc / wsum;
        }
    }
    return out;
}

// --- dispatch ---------------------------------------------------------------------------

namespace {
template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Eigen::VectorXd reference_or_zero(const denoisers::L2Sq& d, Eigen::Index n)
{
    return d.ref.size() == 0 ? Eigen::VectorXd::Zero(n) : d.ref;
}
} // namespace

Eigen::VectorXd apply(const Denoiser& d, const Eigen::VectorXd& x, GridShape shape, double scale)
{
    check_shape(x, shape);
    if (!(scale >= 0.0) || !std::isfinite(scale)) {
        throw DomainError("denoiser scale must be finite and nonnegative");
    }
    Eigen::VectorXd out = std::visit(
        overloaded{
            [&](const denoisers::Identity&) -> Eigen::VectorXd { return x; },
            [&](const denoisers::L1& l1) -> Eigen::VectorXd { return prox_l1(x, l1.weight * scale); },
            [&](const denoisers::L2Sq& l2) -> Eigen::VectorXd {
                return prox_l2sq(x, l2.weight * scale, reference_or_zero(l2, x.size()));
            },
            [&](const denoisers::Tv& tv) -> Eigen::VectorXd {
                return tv2d(x, shape, tv.weight * scale, tv.inner_iters);
            },
            [&](const denoisers::Nlm& n) -> Eigen::VectorXd {
                if (scale == 0.0) {
                    return x;
                }
                NlmParams p = n.params;
                p.h *= scale;
                return nlm(x, shape, p);
            },
            [&](const denoisers::Custom& c) -> Eigen::VectorXd { return c.fn(x, shape, scale); },
        },
        d);
    if (out.size() != x.size()) {
        throw GeometryError("denoiser '" + describe(d) + "' changed the field size");
    }
    if (!out.allFinite()) {
        throw NumericalError("denoiser '" + describe(d) + "' produced non-finite values");
    }
    return out;
}

std::optional<double> regularizer_value(const Denoiser& d, const Eigen::VectorXd& x, GridShape shape)
{
    return std::visit(
        overloaded{
            [&](const denoisers::Identity&) -> std::optional<double> { return 0.0; },
            [&](const denoisers::L1& l1) -> std::optional<double> { return l1.weight * x.lpNorm<1>(); },
            [&](const denoisers::L2Sq& l2) -> std::optional<double> {
                return l2.weight * (x - reference_or_zero(l2, x.size())).squaredNorm();
            },
            [&](const denoisers::Tv& tv) -> std::optional<double> {
                return tv.weight * tv_anisotropic(x, shape);
            },
            [&](const denoisers::Nlm&) -> std::optional<double> { return std::nullopt; },
            [&](const denoisers::Custom&) -> std::optional<double> { return std::nullopt; },
        },
        d);
}

std::string describe(const Denoiser& d)
{
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const denoisers::Identity&) { os << "identity"; },
                   [&](const denoisers::L1& l1) { os << "l1(weight=" << l1.weight << ")"; },
                   [&](const denoisers::L2Sq& l2) { os << "l2sq(weight=" << l2.weight << ")"; },
                   [&](const denoisers::Tv& tv) {
                       os << "tv2d(weight=" << tv.weight << ",iters=" << tv.inner_iters << ")";
                   },
                   [&](const denoisers::Nlm& n) {
                       os << "nlm(patch=" << n.params.patch_radius << ",search=" << n.params.search_radius
                          << ",h=" << n.params.h << ",sigma=" << n.params.sigma << ")";
                   },
                   [&](const denoisers::Custom& c) { os << c.name; },
               },
               d);
    return os.str();
}

} // namespace proxfwi
