#include "proxfwi/wave.hpp"

#include "proxfwi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace proxfwi::wave {

double ricker_amplitude(double f, double f_peak)
{
    if (!(f > 0.0) || !(f_peak > 0.0)) {
        throw DomainError("ricker_amplitude: frequencies must be positive");
    }
    const double r = f / f_peak;
    return 2.0 / std::sqrt(3.14159265358979323846) * r * r / f_peak * std::exp(-r * r);
}

// --- discretization ----------------------------------------------------------------------

Helmholtz::Helmholtz(const ModelGrid& reference, const PmlSpec& pml)
    : nz_(reference.nz()), nx_(reference.nx()), dz_(reference.dz()), dx_(reference.dx()), pml_(pml),
      top_(pml.free_surface_top ? 0 : pml.cells)
{
    if (pml.cells < 5) {
        throw DomainError("PML needs at least 5 cells, got " + std::to_string(pml.cells));
    }
    if (!(pml.reflection > 0.0 && pml.reflection < 1.0)) {
        throw DomainError("PML reflection coefficient must be in (0,1)");
    }
    reference_ = reference.kind() == GridKind::squared_slowness
                     ? reference.values()
                     : convert(reference, GridKind::squared_slowness).values();
    v_ref_ = 1.0 / std::sqrt(reference_.minCoeff());

    const int pnz = padded_nz();
    const int pnx = padded_nx();
    padded_reference_.resize(padded_size());
    for (int ip = 0; ip < pnz; ++ip) {
        const int iz = std::clamp(ip - top_, 0, nz_ - 1);
        for (int jp = 0; jp < pnx; ++jp) {
            const int ix = std::clamp(jp - pml_.cells, 0, nx_ - 1);
            padded_reference_[static_cast<Eigen::Index>(ip) * pnx + jp] = reference_[iz * nx_ + ix];
        }
    }
    interior_rows_.reserve(interior_size());
    for (int iz = 0; iz < nz_; ++iz) {
        for (int ix = 0; ix < nx_; ++ix) {
            interior_rows_.push_back(padded_index(iz, ix));
        }
    }
    sigma_max_ = -3.0 * std::log(pml_.reflection) * v_ref_ / (2.0 * pml_.cells * dx_);
}

double Helmholtz::damping_x(double jp) const
{
    const double lo = pml_.cells;
    const double hi = pml_.cells + nx_ - 1;
    const double d = jp < lo ? lo - jp : (jp > hi ? jp - hi : 0.0);
    const double r = d / pml_.cells;
    return -3.0 * std::log(pml_.reflection) * v_ref_ / (2.0 * pml_.cells * dx_) * r * r;
}

double Helmholtz::damping_z(double ip) const
{
    const double lo = top_;
    const double hi = top_ + nz_ - 1;
    double d = ip > hi ? ip - hi : 0.0;
    if (!pml_.free_surface_top && ip < lo) {
        d = lo - ip;
    }
    const double r = d / pml_.cells;
    return -3.0 * std::log(pml_.reflection) * v_ref_ / (2.0 * pml_.cells * dz_) * r * r;
}

Eigen::VectorXd Helmholtz::pad(const Eigen::VectorXd& m) const
{
    if (m.size() != interior_size()) {
        throw GeometryError("model has " + std::to_string(m.size()) + " values, grid has " +
                            std::to_string(interior_size()));
    }
    Eigen::VectorXd out = padded_reference_;
    for (Eigen::Index k = 0; k < m.size(); ++k) {
        out[interior_rows_[k]] = m[k];
    }
    return out;
}

Eigen::VectorXcd Helmholtz::restrict(const Eigen::VectorXcd& u) const
{
    if (u.size() != padded_size()) {
        throw GeometryError("restrict: field is not on the padded grid");
    }
    Eigen::VectorXcd out(interior_size());
    for (Eigen::Index k = 0; k < out.size(); ++k) {
        out[k] = u[interior_rows_[k]];
    }
    return out;
}

ComplexSparseMatrix Helmholtz::assemble(const Eigen::VectorXd& m, double omega) const
{
    if (!(omega > 0.0)) {
        throw DomainError("assemble: angular frequency must be positive");
    }
    if (!m.allFinite()) {
        throw DomainError("assemble: model has non-finite values");
    }
    const Eigen::VectorXd mp = pad(m);
    const int pnz = padded_nz();
    const int pnx = padded_nx();
    const Complex i1(0.0, 1.0);
    const auto sx = [&](double jp) { return 1.0 + i1 * damping_x(jp) / omega; };
    const auto sz = [&](double ip) { return 1.0 + i1 * damping_z(ip) / omega; };
    const double idx2 = 1.0 / (dx_ * dx_);
    const double idz2 = 1.0 / (dz_ * dz_);

    const Eigen::Index n = padded_size();
    std::vector<int> offsets;
    std::vector<int> cols;
    std::vector<Complex> vals;
    offsets.reserve(n + 1);
    cols.reserve(5 * n);
    vals.reserve(5 * n);
    offsets.push_back(0);
    for (int ip = 0; ip < pnz; ++ip) {
        const Complex szi = sz(ip);
        for (int jp = 0; jp < pnx; ++jp) {
            const int p = ip * pnx + jp;
            const Complex sxj = sx(jp);
            const Complex up = sxj / sz(ip - 0.5) * idz2;
            const Complex down = sxj / sz(ip + 0.5) * idz2;
            const Complex left = szi / sx(jp - 0.5) * idx2;
            const Complex right = szi / sx(jp + 0.5) * idx2;
            const Complex diag = -(up + down + left + right) + omega * omega * mp[p] * sxj * szi;
            if (ip > 0) {
                cols.push_back(p - pnx);
                vals.push_back(up);
            }
            if (jp > 0) {
                cols.push_back(p - 1);
                vals.push_back(left);
            }
            cols.push_back(p);
            vals.push_back(diag);
            if (jp + 1 < pnx) {
                cols.push_back(p + 1);
                vals.push_back(right);
            }
            if (ip + 1 < pnz) {
                cols.push_back(p + pnx);
                vals.push_back(down);
            }
            offsets.push_back(static_cast<int>(cols.size()));
        }
    }
    return ComplexSparseMatrix(static_cast<int>(n), static_cast<int>(n), std::move(offsets), std::move(cols),
                               std::move(vals));
}

std::vector<Eigen::Index> Helmholtz::rows_of(const std::vector<GridIndex>& nodes) const
{
    std::vector<Eigen::Index> rows;
    rows.reserve(nodes.size());
    for (const auto& g : nodes) {
        if (g.iz < 0 || g.iz >= nz_ || g.ix < 0 || g.ix >= nx_) {
            throw GeometryError("node (" + std::to_string(g.iz) + "," + std::to_string(g.ix) +
                                ") outside the interior grid");
        }
        rows.push_back(padded_index(g.iz, g.ix));
    }
    return rows;
}

Eigen::MatrixXcd Helmholtz::sources(const std::vector<GridIndex>& nodes, Complex amplitude) const
{
    const auto rows = rows_of(nodes);
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(padded_size(), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t s = 0; s < rows.size(); ++s) {
        b(rows[s], static_cast<Eigen::Index>(s)) = amplitude / (dz_ * dx_);
    }
    return b;
}

double Helmholtz::points_per_wavelength(const Eigen::VectorXd& m, double f) const
{
    const double v_min = 1.0 / std::sqrt(m.maxCoeff());
    return v_min / f / std::max(dz_, dx_);
}

Eigen::MatrixXcd sample(const Eigen::MatrixXcd& u, const std::vector<Eigen::Index>& rows)
{
    Eigen::MatrixXcd out(static_cast<Eigen::Index>(rows.size()), u.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.row(static_cast<Eigen::Index>(r)) = u.row(rows[r]);
    }
    return out;
}

// --- modeling ------------------------------------------------------------------------------

FreqData forward(const Helmholtz& h, const Eigen::VectorXd& m, const AcquisitionGeometry& acq, double f_peak)
{
    acq.validate(h.nz(), h.nx());
    const auto rx = h.rows_of(acq.receivers);
    FreqData out;
    for (const double f : acq.frequencies) {
        const auto a = h.assemble(m, angular(f));
        const auto fact = factorize(a);
        const Eigen::MatrixXcd u = fact.solve(h.sources(acq.sources, ricker_amplitude(f, f_peak)));
        out.blocks.push_back({f, sample(u, rx)});
    }
    return out;
}

FreqData forward(const ModelGrid& model, const AcquisitionGeometry& acq, const ForwardOptions& opt)
{
    const Helmholtz h(model, opt.pml);
    return forward(h, h.reference(), acq, opt.f_peak);
}

Eigen::MatrixXcd augmented_solve(const ComplexSparseMatrix& a, const std::vector<Eigen::Index>& rx_rows,
                                 const Eigen::MatrixXcd& b, const Eigen::MatrixXcd& d, double mu)
{
    if (!(mu > 0.0) || !std::isfinite(mu)) {
        throw DomainError("augmented solve: penalty mu must be positive");
    }
    if (a.rows() != a.cols() || b.rows() != a.rows()) {
        throw GeometryError("augmented solve: operator and source shapes disagree");
    }
    if (d.rows() != static_cast<Eigen::Index>(rx_rows.size()) || d.cols() != b.cols()) {
        throw GeometryError("augmented solve: data shape disagrees with receivers/sources");
    }
    const auto& as = a.eigen();
    ComplexSparseMatrix::Storage normal = as.adjoint() * as;
    const double mu2 = mu * mu;
    for (const auto r : rx_rows) {
        normal.coeffRef(r, r) += mu2;
    }
    normal.makeCompressed();
    const auto fact = factorize_hermitian(ComplexSparseMatrix::from_eigen(std::move(normal)));
    Eigen::MatrixXcd rhs = as.adjoint() * b;
    for (std::size_t r = 0; r < rx_rows.size(); ++r) {
        rhs.row(rx_rows[r]) += mu2 * d.row(static_cast<Eigen::Index>(r));
    }
    return fact.solve(rhs);
}

std::vector<Eigen::MatrixXcd> solve_augmented(const Helmholtz& h, const Eigen::VectorXd& m,
                                              const AcquisitionGeometry& acq, const FreqData& observed, double mu,
                                              double f_peak)
{
    acq.validate(h.nz(), h.nx());
    const auto rx = h.rows_of(acq.receivers);
    std::vector<Eigen::MatrixXcd> fields;
    for (const double f : acq.frequencies) {
        const auto& d = observed.blocks.at(observed.find(f)).values;
        const auto a = h.assemble(m, angular(f));
        fields.push_back(augmented_solve(a, rx, h.sources(acq.sources, ricker_amplitude(f, f_peak)), d, mu));
    }
    return fields;
}

double operator_norm(const Helmholtz& h, const Eigen::VectorXd& m, double f)
{
    const auto a = h.assemble(m, angular(f));
    LinearMap<Complex> apply = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd { return a.multiply(v); };
    LinearMap<Complex> adj = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
        return a.adjoint_multiply(Eigen::MatrixXcd(v)).col(0);
    };
    return spectral_norm<Complex>(apply, adj, a.rows()).sigma;
}

// --- noise ----------------------------------------------------------------------------------

namespace {

double rms(const FreqData& data)
{
    double sum = 0.0;
    double count = 0.0;
    for (const auto& b : data.blocks) {
        sum += b.values.squaredNorm();
        count += static_cast<double>(b.values.size());
    }
    return count > 0.0 ? std::sqrt(sum / count) : 0.0;
}

} // namespace

NoisyData add_noise(const FreqData& data, double snr_db_target, std::uint64_t seed)
{
    NoisyData out{data, data};
    for (auto& b : out.noise.blocks) {
        b.values.setZero();
    }
    if (std::isinf(snr_db_target) && snr_db_target > 0.0) {
        return out;
    }
    if (!std::isfinite(snr_db_target)) {
        throw DomainError("add_noise: SNR must be finite or +inf");
    }
    const double signal = rms(data);
    if (!(signal > 0.0)) {
        throw DomainError("add_noise: data is all zero");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& b : out.noise.blocks) {
        for (Eigen::Index j = 0; j < b.values.cols(); ++j) {
            for (Eigen::Index i = 0; i < b.values.rows(); ++i) {
                const double re = normal(rng);
                b.values(i, j) = Complex(re, normal(rng));
            }
        }
    }
    const double scale = signal / std::pow(10.0, snr_db_target / 20.0) / rms(out.noise);
    for (std::size_t k = 0; k < out.noise.blocks.size(); ++k) {
        out.noise.blocks[k].values *= scale;
        out.data.blocks[k].values += out.noise.blocks[k].values;
    }
    return out;
}

double snr_db(const FreqData& signal, const FreqData& noise)
{
    const double n = rms(noise);
    if (!(n > 0.0)) {
        throw DomainError("snr_db: noise is all zero");
    }
    return 20.0 * std::log10(rms(signal) / n);
}

} // namespace proxfwi::wave
