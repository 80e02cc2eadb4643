#pragma once

// Shared problem setups for the unit tests and the acceptance binary.

#include "proxfwi/inversion.hpp"
#include "proxfwi/wave.hpp"

#include "oracles.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <random>

namespace fixtures {

using namespace proxfwi;
using inversion::Survey;
using inversion::Vec;
using wave::Helmholtz;
using wave::PmlSpec;
using wave::angular;

struct Fixture {
    std::shared_ptr<const wave::Helmholtz> h;
    AcquisitionGeometry acq;
    Vec m_true;
    Vec m0;
    FreqData data;

    Survey survey() const { return Survey{h, acq, data, 10.0}; }
};

/// 12x12 grid, two anomalies, two sources and two frequencies.
inline Fixture tiny()
{
    Fixture fx;
    const auto bg = ModelGrid::constant(12, 12, 25.0, 25.0, GridKind::velocity, 2000.0);
    Eigen::VectorXd v = bg.values();
    v[5 * 12 + 5] = 2500.0;
    v[6 * 12 + 6] = 2300.0;
    fx.h = std::make_shared<wave::Helmholtz>(bg, wave::PmlSpec{5, false, 1e-3});
    fx.acq.sources = {{1, 3}, {1, 8}};
    fx.acq.receivers = {{10, 2}, {10, 5}, {10, 9}, {5, 10}, {5, 1}};
    fx.acq.frequencies = {5.0, 10.0};
    fx.m_true = convert(bg.with_values(v), GridKind::squared_slowness).values();
    fx.m0 = fx.h->reference();
    fx.data = wave::forward(*fx.h, fx.m_true, fx.acq, 10.0);
    return fx;
}

inline Vec random_direction(Eigen::Index n, double scale, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Vec d(n);
    for (auto& x : d) {
        x = normal(rng);
    }
    return d * (scale / d.norm());
}

struct GreenError {
    double amplitude = 0.0;
    double phase = 0.0;
};

/// Point source at the centre of a homogeneous 2000 m/s square of side 2 km;
/// worst errors against the analytic solution on receivers 375-750 m away.
inline GreenError green_error(double h, int pml_cells, double f)
{
    const int n = static_cast<int>(std::lround(2000.0 / h)) + 1;
    const auto g = ModelGrid::constant(n, n, h, h, GridKind::velocity, 2000.0);
    const Helmholtz hz(g, PmlSpec{pml_cells, false, 1e-6});
    const auto fact = factorize(hz.assemble(hz.reference(), angular(f)));
    const int c = n / 2;
    const Eigen::VectorXcd u = fact.solve(Eigen::VectorXcd(hz.sources({{c, c}}, 1.0).col(0)));
    const double k = angular(f) / 2000.0;
    GreenError e;
    for (int d = static_cast<int>(std::lround(375.0 / h)); d <= static_cast<int>(std::lround(750.0 / h)); ++d) {
        const Complex ratio = u[hz.padded_index(c, c + d)] / oracle::green2d(k, d * h);
        e.amplitude = std::max(e.amplitude, std::abs(std::abs(ratio) - 1.0));
        e.phase = std::max(e.phase, std::abs(std::arg(ratio)));
    }
    return e;
}

} // namespace fixtures
