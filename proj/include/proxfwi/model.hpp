#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace proxfwi {

enum class GridKind : std::uint8_t { velocity = 0, squared_slowness = 1 };

std::string to_string(GridKind kind);

/// Raw 2D field record as stored on disk. Only finiteness and shape are
/// enforced; used for intermediate fields that may leave the physical range
/// (e.g. denoiser inputs exchanged with external programs).
struct FieldRecord {
    int nz = 0;
    int nx = 0;
    double dz = 0.0;
    double dx = 0.0;
    GridKind kind = GridKind::velocity;
    Eigen::VectorXd values; ///< row-major, x fastest
};

/// 2D rectangular parameter field on a regular grid.
///
/// Values are stored row-major with x (horizontal) running fastest. The grid
/// is an immutable value object; every constructor validates the invariants
/// nz, nx >= 3, positive spacings and strictly positive finite values.
class ModelGrid {
  public:
    ModelGrid(int nz, int nx, double dz, double dx, GridKind kind, Eigen::VectorXd values);

    static ModelGrid constant(int nz, int nx, double dz, double dx, GridKind kind, double value);
    static ModelGrid from_record(FieldRecord record);

    [[nodiscard]] int nz() const noexcept { return nz_; }
    [[nodiscard]] int nx() const noexcept { return nx_; }
    [[nodiscard]] double dz() const noexcept { return dz_; }
    [[nodiscard]] double dx() const noexcept { return dx_; }
    [[nodiscard]] GridKind kind() const noexcept { return kind_; }
    [[nodiscard]] const Eigen::VectorXd& values() const noexcept { return values_; }
    [[nodiscard]] Eigen::Index size() const noexcept { return values_.size(); }

    [[nodiscard]] double operator()(int iz, int ix) const { return values_[index(iz, ix)]; }
    [[nodiscard]] Eigen::Index index(int iz, int ix) const noexcept
    {
        return static_cast<Eigen::Index>(iz) * nx_ + ix;
    }

    /// Same geometry and kind, new values (validated).
    [[nodiscard]] ModelGrid with_values(Eigen::VectorXd values) const;
    [[nodiscard]] FieldRecord record() const;

    friend bool operator==(const ModelGrid& a, const ModelGrid& b);

  private:
    int nz_;
    int nx_;
    double dz_;
    double dx_;
    GridKind kind_;
    Eigen::VectorXd values_;
};

// --- file formats -----------------------------------------------------------

/// Size in bytes of a grid file header ("GRD1", kind, pad, nz, nx, dz, dx).
inline constexpr std::size_t grid_header_bytes = 32;

void write_field(const std::filesystem::path& path, const FieldRecord& field);
FieldRecord read_field(const std::filesystem::path& path);

void write_grid(const ModelGrid& grid, const std::filesystem::path& path);
ModelGrid read_grid(const std::filesystem::path& path);

// --- acquisition and data -----------------------------------------------------

struct GridIndex {
    int iz = 0;
    int ix = 0;
    friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

struct AcquisitionGeometry {
    std::vector<GridIndex> sources;
    std::vector<GridIndex> receivers;
    std::vector<double> frequencies; ///< Hz, strictly increasing

    /// Throws GeometryError / DomainError if the geometry is not valid on an
    /// nz x nx interior grid.
    void validate(int nz, int nx) const;
};

/// Surface sources and receivers on the left, right and bottom edges.
///
/// `n_sources` sources are spread at equal spacing along row `source_depth`,
/// each centred in its segment (2 km at 400 m spacing gives x = 200..1800 m).
/// Receivers sit `receiver_inset` cells inside the non-surface edges every
/// `receiver_step` cells.
AcquisitionGeometry surface_sources_boundary_receivers(int nz, int nx, int n_sources, int source_depth,
                                                       int receiver_inset, int receiver_step,
                                                       std::vector<double> frequencies);

struct FreqBlock {
    double frequency = 0.0;
    Eigen::MatrixXcd values; ///< n_receivers x n_sources
};

struct FreqData {
    std::vector<FreqBlock> blocks;

    [[nodiscard]] std::vector<double> frequencies() const;
    /// Index of the block at `frequency` (exact match within 1e-9 Hz); throws if absent.
    [[nodiscard]] std::size_t find(double frequency) const;
    [[nodiscard]] FreqData subset(const std::vector<double>& frequencies) const;
    /// Euclidean norm over all entries of all blocks.
    [[nodiscard]] double norm() const;

    void validate(const AcquisitionGeometry& acq) const;
};

void write_freqdata(const FreqData& data, const std::filesystem::path& path);
FreqData read_freqdata(const std::filesystem::path& path);

// --- synthetic models ---------------------------------------------------------

enum class InclusionShape { square, disk, ring, cross, all_four };

InclusionShape parse_inclusion_shape(const std::string& name);

/// Inclusion dimensions as fractions of the shorter physical side of the
/// grid. Defaults give a 600 m square, 300 m radius disk, 300/175 m ring and
/// 800 x 200 m cross on a 2 km x 2 km domain; the four-shape layout halves
/// every size and centres the shapes in the quadrants.
struct InclusionLayout {
    double square_side = 0.30;
    double disk_radius = 0.15;
    double ring_outer = 0.15;
    double ring_inner = 0.0875;
    double cross_length = 0.40;
    double cross_width = 0.10;
    double quadrant_scale = 0.5;
};

ModelGrid make_inclusion_model(InclusionShape shape, int nz, int nx, double dz, double dx, double v_background,
                               double v_inclusion, const InclusionLayout& layout = {});

/// velocity v <-> squared slowness 1/v^2.
ModelGrid convert(const ModelGrid& grid, GridKind to);

} // namespace proxfwi
