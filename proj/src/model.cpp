#include "proxfwi/model.hpp"

#include "proxfwi/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>

namespace proxfwi {

namespace {

// Little-endian byte serialization independent of host order.
class ByteWriter {
  public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i) {
            buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
        }
    }
    void u64(std::uint64_t v)
    {
        for (int i = 0; i < 8; ++i) {
            buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
        }
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void bytes(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }

    void flush(const std::filesystem::path& path) const
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw FormatError("cannot open '" + path.string() + "' for writing");
        }
        out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
        if (!out) {
            throw FormatError("write to '" + path.string() + "' failed");
        }
    }

  private:
    std::vector<char> buf_;
};

class ByteReader {
  public:
    explicit ByteReader(const std::filesystem::path& path) : name_(path.string())
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw FormatError("cannot open '" + name_ + "' for reading");
        }
        buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }

    void need(std::size_t n) const
    {
        if (pos_ + n > buf_.size()) {
            throw FormatError("'" + name_ + "': truncated payload");
        }
    }
    std::uint8_t u8()
    {
        need(1);
        return static_cast<std::uint8_t>(buf_[pos_++]);
    }
    std::uint32_t u32()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf_[pos_++])) << (8 * i);
        }
        return v;
    }
    std::uint64_t u64()
    {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_++])) << (8 * i);
        }
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string tag(std::size_t n)
    {
        need(n);
        std::string s(buf_.data() + pos_, n);
        pos_ += n;
        return s;
    }
    [[nodiscard]] bool at_end() const noexcept { return pos_ == buf_.size(); }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }

  private:
    std::string name_;
    std::vector<char> buf_;
    std::size_t pos_ = 0;
};

void check_shape(int nz, int nx, double dz, double dx, Eigen::Index n_values)
{
    if (nz < 3 || nx < 3) {
        throw GeometryError("grid must be at least 3x3, got " + std::to_string(nz) + "x" + std::to_string(nx));
    }
    if (!(dz > 0.0) || !(dx > 0.0) || !std::isfinite(dz) || !std::isfinite(dx)) {
        throw DomainError("grid spacings must be positive and finite");
    }
    if (n_values != static_cast<Eigen::Index>(nz) * nx) {
        throw GeometryError("value count " + std::to_string(n_values) + " does not match " + std::to_string(nz) +
                            "x" + std::to_string(nx));
    }
}

void check_finite(const Eigen::VectorXd& v)
{
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            throw FormatError("non-finite value at index " + std::to_string(i));
        }
    }
}

} // namespace

std::string to_string(GridKind kind)
{
    return kind == GridKind::velocity ? "velocity" : "squared-slowness";
}

ModelGrid::ModelGrid(int nz, int nx, double dz, double dx, GridKind kind, Eigen::VectorXd values)
    : nz_(nz), nx_(nx), dz_(dz), dx_(dx), kind_(kind), values_(std::move(values))
{
    check_shape(nz_, nx_, dz_, dx_, values_.size());
    check_finite(values_);
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
        if (!(values_[i] > 0.0)) {
            throw DomainError(to_string(kind_) + " values must be positive (index " + std::to_string(i) + ")");
        }
    }
}

ModelGrid ModelGrid::constant(int nz, int nx, double dz, double dx, GridKind kind, double value)
{
    return {nz, nx, dz, dx, kind, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(nz) * nx, value)};
}

ModelGrid ModelGrid::from_record(FieldRecord record)
{
    return {record.nz, record.nx, record.dz, record.dx, record.kind, std::move(record.values)};
}

ModelGrid ModelGrid::with_values(Eigen::VectorXd values) const
{
    return {nz_, nx_, dz_, dx_, kind_, std::move(values)};
}

FieldRecord ModelGrid::record() const { return {nz_, nx_, dz_, dx_, kind_, values_}; }

bool operator==(const ModelGrid& a, const ModelGrid& b)
{
    if (a.nz_ != b.nz_ || a.nx_ != b.nx_ || a.kind_ != b.kind_) {
        return false;
    }
    auto same_bits = [](double x, double y) {
        return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
    };
    if (!same_bits(a.dz_, b.dz_) || !same_bits(a.dx_, b.dx_)) {
        return false;
    }
    for (Eigen::Index i = 0; i < a.values_.size(); ++i) {
        if (!same_bits(a.values_[i], b.values_[i])) {
            return false;
        }
    }
    return true;
}

// --- grid files -----------------------------------------------------------------

void write_field(const std::filesystem::path& path, const FieldRecord& field)
{
    check_shape(field.nz, field.nx, field.dz, field.dx, field.values.size());
    check_finite(field.values);
    ByteWriter w;
    w.bytes("GRD1", 4);
    w.u8(static_cast<std::uint8_t>(field.kind));
    w.u8(0);
    w.u8(0);
    w.u8(0);
    w.u32(static_cast<std::uint32_t>(field.nz));
    w.u32(static_cast<std::uint32_t>(field.nx));
    w.f64(field.dz);
    w.f64(field.dx);
    for (Eigen::Index i = 0; i < field.values.size(); ++i) {
        w.f64(field.values[i]);
    }
    w.flush(path);
}

FieldRecord read_field(const std::filesystem::path& path)
{
    ByteReader r(path);
    if (r.tag(4) != "GRD1") {
        throw FormatError("'" + r.name() + "': bad magic, expected GRD1");
    }
    FieldRecord f;
    const auto kind = r.u8();
    if (kind > 1) {
        throw FormatError("'" + r.name() + "': unknown grid kind " + std::to_string(kind));
    }
    f.kind = static_cast<GridKind>(kind);
    for (int i = 0; i < 3; ++i) {
        if (r.u8() != 0) {
            throw FormatError("'" + r.name() + "': nonzero header padding");
        }
    }
    const auto nz = r.u32();
    const auto nx = r.u32();
    if (nz > (1U << 20) || nx > (1U << 20)) {
        throw FormatError("'" + r.name() + "': implausible grid size");
    }
    f.nz = static_cast<int>(nz);
    f.nx = static_cast<int>(nx);
    f.dz = r.f64();
    f.dx = r.f64();
    const auto n = static_cast<Eigen::Index>(nz) * nx;
    r.need(static_cast<std::size_t>(n) * 8);
    f.values.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        f.values[i] = r.f64();
    }
    if (!r.at_end()) {
        throw FormatError("'" + r.name() + "': trailing bytes after payload");
    }
    try {
        check_shape(f.nz, f.nx, f.dz, f.dx, n);
        check_finite(f.values);
    } catch (const Error& e) {
        throw FormatError("'" + r.name() + "': " + e.what());
    }
    return f;
}

void write_grid(const ModelGrid& grid, const std::filesystem::path& path) { write_field(path, grid.record()); }

ModelGrid read_grid(const std::filesystem::path& path)
{
    auto rec = read_field(path);
    try {
        return ModelGrid::from_record(std::move(rec));
    } catch (const Error& e) {
        throw FormatError("'" + path.string() + "': " + e.what());
    }
}

// --- acquisition ----------------------------------------------------------------

void AcquisitionGeometry::validate(int nz, int nx) const
{
    if (sources.empty() || receivers.empty()) {
        throw GeometryError("acquisition needs at least one source and one receiver");
    }
    auto inside = [&](const GridIndex& g) { return g.iz >= 0 && g.iz < nz && g.ix >= 0 && g.ix < nx; };
    for (const auto& s : sources) {
        if (!inside(s)) {
            throw GeometryError("source (" + std::to_string(s.iz) + "," + std::to_string(s.ix) +
                                ") outside the interior grid");
        }
    }
    for (const auto& r : receivers) {
        if (!inside(r)) {
            throw GeometryError("receiver (" + std::to_string(r.iz) + "," + std::to_string(r.ix) +
                                ") outside the interior grid");
        }
    }
    if (frequencies.empty()) {
        throw DomainError("acquisition needs at least one frequency");
    }
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
        if (!(frequencies[i] > 0.0) || !std::isfinite(frequencies[i])) {
            throw DomainError("frequencies must be positive");
        }
        if (i > 0 && !(frequencies[i] > frequencies[i - 1])) {
            throw DomainError("frequencies must be strictly increasing");
        }
    }
}

AcquisitionGeometry surface_sources_boundary_receivers(int nz, int nx, int n_sources, int source_depth,
                                                       int receiver_inset, int receiver_step,
                                                       std::vector<double> frequencies)
{
    if (n_sources < 1 || receiver_step < 1 || receiver_inset < 0) {
        throw DomainError("invalid acquisition layout parameters");
    }
    AcquisitionGeometry acq;
    const double segment = static_cast<double>(nx - 1) / n_sources;
    for (int s = 0; s < n_sources; ++s) {
        const int ix = static_cast<int>(std::lround((s + 0.5) * segment));
        acq.sources.push_back({source_depth, ix});
    }
    const int left = receiver_inset;
    const int right = nx - 1 - receiver_inset;
    const int bottom = nz - 1 - receiver_inset;
    for (int iz = receiver_step; iz <= bottom; iz += receiver_step) {
        acq.receivers.push_back({iz, left});
    }
    for (int ix = left + receiver_step; ix < right; ix += receiver_step) {
        acq.receivers.push_back({bottom, ix});
    }
    for (int iz = receiver_step; iz <= bottom; iz += receiver_step) {
        acq.receivers.push_back({iz, right});
    }
    acq.frequencies = std::move(frequencies);
    acq.validate(nz, nx);
    return acq;
}

// --- frequency data ---------------------------------------------------------------

std::vector<double> FreqData::frequencies() const
{
    std::vector<double> f;
    f.reserve(blocks.size());
    for (const auto& b : blocks) {
        f.push_back(b.frequency);
    }
    return f;
}

std::size_t FreqData::find(double frequency) const
{
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (std::abs(blocks[i].frequency - frequency) <= 1e-9) {
            return i;
        }
    }
    throw DomainError("no data block at " + std::to_string(frequency) + " Hz");
}

FreqData FreqData::subset(const std::vector<double>& freqs) const
{
    FreqData out;
    for (double f : freqs) {
        out.blocks.push_back(blocks[find(f)]);
    }
    return out;
}

double FreqData::norm() const
{
    double s = 0.0;
    for (const auto& b : blocks) {
        s += b.values.squaredNorm();
    }
    return std::sqrt(s);
}

void FreqData::validate(const AcquisitionGeometry& acq) const
{
    for (const auto& b : blocks) {
        if (b.values.rows() != static_cast<Eigen::Index>(acq.receivers.size()) ||
            b.values.cols() != static_cast<Eigen::Index>(acq.sources.size())) {
            throw GeometryError("data block at " + std::to_string(b.frequency) +
                                " Hz does not match the acquisition shape");
        }
        if (!b.values.allFinite()) {
            throw FormatError("non-finite data at " + std::to_string(b.frequency) + " Hz");
        }
    }
}

void write_freqdata(const FreqData& data, const std::filesystem::path& path)
{
    ByteWriter w;
    w.bytes("FDD1", 4);
    w.u32(static_cast<std::uint32_t>(data.blocks.size()));
    for (const auto& b : data.blocks) {
        if (!b.values.allFinite()) {
            throw FormatError("non-finite data at " + std::to_string(b.frequency) + " Hz");
        }
        w.f64(b.frequency);
        w.u32(static_cast<std::uint32_t>(b.values.rows()));
        w.u32(static_cast<std::uint32_t>(b.values.cols()));
        for (Eigen::Index r = 0; r < b.values.rows(); ++r) {
            for (Eigen::Index s = 0; s < b.values.cols(); ++s) {
                w.f64(b.values(r, s).real());
                w.f64(b.values(r, s).imag());
            }
        }
    }
    w.flush(path);
}

FreqData read_freqdata(const std::filesystem::path& path)
{
    ByteReader r(path);
    if (r.tag(4) != "FDD1") {
        throw FormatError("'" + r.name() + "': bad magic, expected FDD1");
    }
    FreqData data;
    const auto n_freq = r.u32();
    for (std::uint32_t k = 0; k < n_freq; ++k) {
        FreqBlock b;
        b.frequency = r.f64();
        const auto n_rx = r.u32();
        const auto n_src = r.u32();
        r.need(static_cast<std::size_t>(n_rx) * n_src * 16);
        b.values.resize(n_rx, n_src);
        for (std::uint32_t i = 0; i < n_rx; ++i) {
            for (std::uint32_t s = 0; s < n_src; ++s) {
                const double re = r.f64();
                const double im = r.f64();
                b.values(i, s) = {re, im};
            }
        }
        if (!b.values.allFinite()) {
            throw FormatError("'" + r.name() + "': non-finite data");
        }
        data.blocks.push_back(std::move(b));
    }
    if (!r.at_end()) {
        throw FormatError("'" + r.name() + "': trailing bytes after payload");
    }
    return data;
}

// --- synthetic models ---------------------------------------------------------------

InclusionShape parse_inclusion_shape(const std::string& name)
{
    if (name == "square") return InclusionShape::square;
    if (name == "disk") return InclusionShape::disk;
    if (name == "ring") return InclusionShape::ring;
    if (name == "cross") return InclusionShape::cross;
    if (name == "all-four" || name == "all_four") return InclusionShape::all_four;
    throw DomainError("unknown inclusion shape '" + name + "'");
}

namespace {

struct PlacedShape {
    InclusionShape shape;
    double cz;
    double cx;
    double scale;
};

// Half extent (bounding box) of a shape, in meters.
double half_extent(InclusionShape shape, const InclusionLayout& l, double side, double scale)
{
    switch (shape) {
    case InclusionShape::square: return 0.5 * l.square_side * side * scale;
    case InclusionShape::disk: return l.disk_radius * side * scale;
    case InclusionShape::ring: return l.ring_outer * side * scale;
    case InclusionShape::cross: return 0.5 * l.cross_length * side * scale;
    case InclusionShape::all_four: break;
    }
    return 0.0;
}

bool contains(const PlacedShape& p, const InclusionLayout& l, double side, double z, double x)
{
    const double dz = z - p.cz;
    const double dx = x - p.cx;
    const double s = side * p.scale;
    switch (p.shape) {
    case InclusionShape::square: {
        const double h = 0.5 * l.square_side * s;
        return std::abs(dz) <= h && std::abs(dx) <= h;
    }
    case InclusionShape::disk: {
        const double r = l.disk_radius * s;
        return dz * dz + dx * dx <= r * r;
    }
    case InclusionShape::ring: {
        const double r2 = dz * dz + dx * dx;
        const double ro = l.ring_outer * s;
        const double ri = l.ring_inner * s;
        return r2 <= ro * ro && r2 >= ri * ri;
    }
    case InclusionShape::cross: {
        const double hl = 0.5 * l.cross_length * s;
        const double hw = 0.5 * l.cross_width * s;
        return (std::abs(dz) <= hw && std::abs(dx) <= hl) || (std::abs(dx) <= hw && std::abs(dz) <= hl);
    }
    case InclusionShape::all_four: break;
    }
    return false;
}

} // namespace

ModelGrid make_inclusion_model(InclusionShape shape, int nz, int nx, double dz, double dx, double v_background,
                               double v_inclusion, const InclusionLayout& layout)
{
    if (!(v_background > 0.0) || !(v_inclusion > 0.0)) {
        throw DomainError("velocities must be positive");
    }
    check_shape(nz, nx, dz, dx, static_cast<Eigen::Index>(nz) * nx);
    const double lz = (nz - 1) * dz;
    const double lx = (nx - 1) * dx;
    const double side = std::min(lz, lx);

    std::vector<PlacedShape> placed;
    if (shape == InclusionShape::all_four) {
        const double q = layout.quadrant_scale;
        placed = {{InclusionShape::square, 0.25 * lz, 0.25 * lx, q},
                  {InclusionShape::disk, 0.25 * lz, 0.75 * lx, q},
                  {InclusionShape::ring, 0.75 * lz, 0.25 * lx, q},
                  {InclusionShape::cross, 0.75 * lz, 0.75 * lx, q}};
    } else {
        placed = {{shape, 0.5 * lz, 0.5 * lx, 1.0}};
    }

    // Every shape must keep at least one background cell between it and the
    // grid edge.
    for (const auto& p : placed) {
        const double h = half_extent(p.shape, layout, side, p.scale);
        if (!(h > 0.0) || p.cz - h < dz || p.cz + h > lz - dz || p.cx - h < dx || p.cx + h > lx - dx) {
            throw GeometryError("inclusion does not fit inside the grid interior");
        }
    }

    Eigen::VectorXd v(static_cast<Eigen::Index>(nz) * nx);
    for (int iz = 0; iz < nz; ++iz) {
        for (int ix = 0; ix < nx; ++ix) {
            const double z = iz * dz;
            const double x = ix * dx;
            const bool in = std::any_of(placed.begin(), placed.end(),
                                        [&](const PlacedShape& p) { return contains(p, layout, side, z, x); });
            v[static_cast<Eigen::Index>(iz) * nx + ix] = in ? v_inclusion : v_background;
        }
    }
    return {nz, nx, dz, dx, GridKind::velocity, std::move(v)};
}

ModelGrid convert(const ModelGrid& grid, GridKind to)
{
    if (grid.kind() == to) {
        throw DomainError("grid is already of kind " + to_string(to));
    }
    Eigen::VectorXd out(grid.size());
    const auto& v = grid.values();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0)) {
            throw DomainError("conversion requires positive values");
        }
        out[i] = to == GridKind::squared_slowness ? 1.0 / (v[i] * v[i]) : 1.0 / std::sqrt(v[i]);
    }
    return {grid.nz(), grid.nx(), grid.dz(), grid.dx(), to, std::move(out)};
}

} // namespace proxfwi
