#pragma once

#include "proxfwi/linsys.hpp"
#include "proxfwi/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <vector>

namespace proxfwi::wave {

/// Absorbing collar. With `free_surface_top` the top side gets no collar and
/// a homogeneous Dirichlet condition one node above the first row.
struct PmlSpec {
    int cells = 10;
    bool free_surface_top = false;
    double reflection = 1e-3;
};

/// Ricker magnitude spectrum (2/sqrt(pi)) f^2 / fp^3 exp(-f^2/fp^2).
double ricker_amplitude(double f, double f_peak);

inline double angular(double f) { return 2.0 * 3.14159265358979323846 * f; }

/// 5-point Helmholtz discretization on an interior grid surrounded by a PML.
///
/// The collar takes the edge-extended values of a fixed reference model, and
/// the PML damping uses the largest velocity of that reference, so A(m) is
/// affine in the interior squared slowness m. The assembled operator is
///
///   A(m) = div(S grad) + omega^2 sx sz diag(m_padded)
///
/// with stretch factors s = 1 + i sigma / omega (time convention e^{-i omega t}),
/// which keeps A complex-symmetric.
class Helmholtz {
  public:
    /// `reference` may be velocity or squared slowness; it fixes the grid, the
    /// collar values and the PML strength.
    Helmholtz(const ModelGrid& reference, const PmlSpec& pml);

    [[nodiscard]] int nz() const noexcept { return nz_; }
    [[nodiscard]] int nx() const noexcept { return nx_; }
    [[nodiscard]] double dz() const noexcept { return dz_; }
    [[nodiscard]] double dx() const noexcept { return dx_; }
    [[nodiscard]] const PmlSpec& pml() const noexcept { return pml_; }
    [[nodiscard]] int padded_nz() const noexcept { return nz_ + top_ + pml_.cells; }
    [[nodiscard]] int padded_nx() const noexcept { return nx_ + 2 * pml_.cells; }
    [[nodiscard]] Eigen::Index padded_size() const noexcept
    {
        return static_cast<Eigen::Index>(padded_nz()) * padded_nx();
    }
    [[nodiscard]] Eigen::Index interior_size() const noexcept { return static_cast<Eigen::Index>(nz_) * nx_; }

    /// Padded row of interior node (iz, ix).
    [[nodiscard]] Eigen::Index padded_index(int iz, int ix) const noexcept
    {
        return static_cast<Eigen::Index>(iz + top_) * padded_nx() + ix + pml_.cells;
    }
    /// Padded row of every interior node, in interior (row-major) order.
    [[nodiscard]] const std::vector<Eigen::Index>& interior_rows() const noexcept { return interior_rows_; }

    /// Squared slowness of the reference model on the interior grid.
    [[nodiscard]] const Eigen::VectorXd& reference() const noexcept { return reference_; }
    [[nodiscard]] double reference_velocity() const noexcept { return v_ref_; }
    [[nodiscard]] double sigma_max() const noexcept { return sigma_max_; }

    /// Interior squared slowness m extended to the padded grid with the
    /// collar reference values.
    [[nodiscard]] Eigen::VectorXd pad(const Eigen::VectorXd& m) const;
    /// Restriction of a padded field to the interior.
    [[nodiscard]] Eigen::VectorXcd restrict(const Eigen::VectorXcd& u) const;

    [[nodiscard]] ComplexSparseMatrix assemble(const Eigen::VectorXd& m, double omega) const;

    /// Point sources amp/(dz dx) at each source node, one column per source.
    [[nodiscard]] Eigen::MatrixXcd sources(const std::vector<GridIndex>& nodes, Complex amplitude) const;
    [[nodiscard]] std::vector<Eigen::Index> rows_of(const std::vector<GridIndex>& nodes) const;

    /// Fewest grid points per wavelength at frequency f for interior model m.
    [[nodiscard]] double points_per_wavelength(const Eigen::VectorXd& m, double f) const;

  private:
    [[nodiscard]] double damping_x(double jp) const;
    [[nodiscard]] double damping_z(double ip) const;

    int nz_;
    int nx_;
    double dz_;
    double dx_;
    PmlSpec pml_;
    int top_;
    Eigen::VectorXd reference_;
    Eigen::VectorXd padded_reference_;
    std::vector<Eigen::Index> interior_rows_;
    double v_ref_ = 0.0;
    double sigma_max_ = 0.0;
};

/// Rows `rows` of every column of u.
Eigen::MatrixXcd sample(const Eigen::MatrixXcd& u, const std::vector<Eigen::Index>& rows);

struct ForwardOptions {
    double f_peak = 10.0;
    PmlSpec pml;
};

/// F(m) = P A(m)^{-1} b for every frequency of `acq`. `model` may be velocity
/// or squared slowness; the collar reference defaults to the model itself.
FreqData forward(const ModelGrid& model, const AcquisitionGeometry& acq, const ForwardOptions& opt);
FreqData forward(const Helmholtz& h, const Eigen::VectorXd& m, const AcquisitionGeometry& acq, double f_peak);

/// Least-squares solution of [A; mu P] u = [b; mu d] for every column of b
/// via the normal equations (A^H A + mu^2 P^T P) u = A^H b + mu^2 P^T d.
Eigen::MatrixXcd augmented_solve(const ComplexSparseMatrix& a, const std::vector<Eigen::Index>& rx_rows,
                                 const Eigen::MatrixXcd& b, const Eigen::MatrixXcd& d, double mu);

/// Data-assimilated wavefields for every frequency of `acq` (padded grid).
std::vector<Eigen::MatrixXcd> solve_augmented(const Helmholtz& h, const Eigen::VectorXd& m,
                                              const AcquisitionGeometry& acq, const FreqData& observed, double mu,
                                              double f_peak);

/// Spectral norm of A(m) at frequency f.
double operator_norm(const Helmholtz& h, const Eigen::VectorXd& m, double f);

struct NoisyData {
    FreqData data;
    FreqData noise;
};

inline constexpr double noiseless = std::numeric_limits<double>::infinity();

/// Adds seeded circular complex Gaussian noise rescaled so that
/// 20 log10(rms(data) / rms(noise)) equals snr_db over all entries.
/// snr_db = +inf returns the data unchanged with zero noise.
NoisyData add_noise(const FreqData& data, double snr_db, std::uint64_t seed);

/// 20 log10(rms(signal) / rms(noise)) over all entries.
double snr_db(const FreqData& signal, const FreqData& noise);

} // namespace proxfwi::wave
