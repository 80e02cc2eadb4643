#include "proxfwi/errors.hpp"
#include "proxfwi/wave.hpp"

#include "fixtures.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace proxfwi;
using namespace proxfwi::wave;

namespace {

constexpr double pi = 3.14159265358979323846;

ModelGrid blocky_model(int n, double h)
{
    Eigen::VectorXd v = Eigen::VectorXd::Constant(n * n, 2000.0);
    for (int iz = n / 3; iz < 2 * n / 3; ++iz) {
        for (int ix = n / 4; ix < n / 2; ++ix) {
            v[iz * n + ix] = 2600.0;
        }
    }
    return ModelGrid(n, n, h, h, GridKind::velocity, v);
}

} // namespace

using fixtures::green_error;

TEST_CASE("Ricker amplitude")
{
    const double fp = 10.0;
    CHECK(ricker_amplitude(fp, fp) == doctest::Approx(2.0 / std::sqrt(pi) / fp * std::exp(-1.0)).epsilon(1e-14));
    // peak at the dominant frequency
    CHECK(ricker_amplitude(fp, fp) > ricker_amplitude(0.99 * fp, fp));
    CHECK(ricker_amplitude(fp, fp) > ricker_amplitude(1.01 * fp, fp));
    CHECK(ricker_amplitude(5.0, fp) == doctest::Approx(2.0 / std::sqrt(pi) * 25.0 / 1000.0 * std::exp(-0.25)));
    CHECK_THROWS_AS(ricker_amplitude(0.0, fp), DomainError);
}

TEST_CASE("interior stencil and padding")
{
    const auto g = ModelGrid::constant(9, 11, 10.0, 20.0, GridKind::velocity, 2000.0);
    const Helmholtz hz(g, PmlSpec{5, false, 1e-3});
    CHECK(hz.padded_nz() == 19);
    CHECK(hz.padded_nx() == 21);
    CHECK(hz.reference_velocity() == doctest::Approx(2000.0));

    std::mt19937_64 rng(1);
    const Eigen::VectorXd m = testutil::random_vector(99, rng, 1e-7, 4e-7);
    const double omega = angular(7.0);
    const auto a = hz.assemble(m, omega);
    const auto p = hz.padded_index(4, 5);
    const double diag = -2.0 / 100 - 2.0 / 400 + omega * omega * m[4 * 11 + 5];
    CHECK(std::abs(a.coeff(p, p) - diag) < 1e-15 * std::abs(diag));
    CHECK(a.coeff(p, p - 1) == Complex(1.0 / 400));
    CHECK(a.coeff(p, p + 1) == Complex(1.0 / 400));
    CHECK(a.coeff(p, p - hz.padded_nx()) == Complex(1.0 / 100));
    CHECK(a.coeff(p, p + hz.padded_nx()) == Complex(1.0 / 100));

    // pad/restrict
    const Eigen::VectorXd mp = hz.pad(m);
    CHECK(mp[hz.padded_index(0, 0) - 1] == hz.reference()[0]);
    Eigen::VectorXcd up = mp.cast<Complex>();
    CHECK((hz.restrict(up).real() - m).norm() == 0.0);

    CHECK(hz.points_per_wavelength(hz.reference(), 10.0) == doctest::Approx(10.0));
    CHECK_THROWS_AS(Helmholtz(g, PmlSpec{4, false, 1e-3}), DomainError);
    CHECK_THROWS_AS((void)hz.sources({{9, 0}}, 1.0), GeometryError);
}

TEST_CASE("operator is complex symmetric and affine in the model")
{
    const auto g = blocky_model(12, 25.0);
    const Helmholtz hz(g, PmlSpec{5, false, 1e-3});
    std::mt19937_64 rng(2);
    const Eigen::VectorXd m1 = testutil::random_vector(144, rng, 1e-7, 3e-7);
    const Eigen::VectorXd m2 = testutil::random_vector(144, rng, 1e-7, 3e-7);
    const double omega = angular(6.0);
    const Eigen::MatrixXcd a1 = Eigen::MatrixXcd(hz.assemble(m1, omega).eigen());
    const Eigen::MatrixXcd a2 = Eigen::MatrixXcd(hz.assemble(m2, omega).eigen());
    CHECK((a1 - a1.transpose()).norm() < 1e-15 * a1.norm());
    CHECK((a1 - a1.adjoint()).norm() > 1e-6 * a1.norm());

    const double t = 0.3;
    const Eigen::MatrixXcd mix = Eigen::MatrixXcd(hz.assemble(t * m1 + (1 - t) * m2, omega).eigen());
    CHECK((mix - (t * a1 + (1 - t) * a2)).norm() < 1e-13 * a1.norm());
}

TEST_CASE("reciprocity")
{
    const auto g = blocky_model(30, 20.0);
    const Helmholtz hz(g, PmlSpec{10, false, 1e-3});
    const Eigen::VectorXd m = convert(g, GridKind::squared_slowness).values();
    const auto fact = factorize(hz.assemble(m, angular(8.0)));
    const GridIndex x1{3, 4};
    const GridIndex x2{25, 21};
    const Eigen::MatrixXcd u = fact.solve(hz.sources({x1, x2}, 1.0));
    const Complex g12 = u(hz.padded_index(x2.iz, x2.ix), 0);
    const Complex g21 = u(hz.padded_index(x1.iz, x1.ix), 1);
    CHECK(std::abs(g12 - g21) < 1e-8 * std::abs(g12));
}

TEST_CASE("homogeneous field matches the analytic Green's function")
{
    const auto e = green_error(12.5, 40, 5.0);
    CHECK(e.amplitude < 0.03);
    CHECK(e.phase < 0.05);

    // second order: halving h cuts the error about fourfold
    const auto coarse = green_error(25.0, 20, 5.0);
    const double ratio = coarse.amplitude / e.amplitude;
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.5);
    CHECK(coarse.phase / e.phase > 3.0);
}

TEST_CASE("forward data")
{
    const auto g = blocky_model(20, 25.0);
    const auto acq = surface_sources_boundary_receivers(20, 20, 3, 2, 2, 3, {4.0, 6.0});
    const ForwardOptions opt{10.0, PmlSpec{8, false, 1e-3}};
    const auto d = forward(g, acq, opt);
    REQUIRE(d.blocks.size() == 2);
    CHECK(d.blocks[0].values.rows() == static_cast<Eigen::Index>(acq.receivers.size()));
    CHECK(d.blocks[0].values.cols() == 3);

    // same as the explicit operator path
    const Helmholtz hz(g, opt.pml);
    const auto d2 = forward(hz, convert(g, GridKind::squared_slowness).values(), acq, 10.0);
    CHECK((d.blocks[1].values - d2.blocks[1].values).norm() == 0.0);

    // linear in the source wavelet amplitude
    const auto d3 = forward(hz, convert(g, GridKind::squared_slowness).values(), acq, 5.0);
    const double r = ricker_amplitude(6.0, 5.0) / ricker_amplitude(6.0, 10.0);
    CHECK((d3.blocks[1].values - r * d.blocks[1].values).norm() < 1e-12 * d3.blocks[1].values.norm());
}

TEST_CASE("augmented solve is the stacked least-squares solution")
{
    const auto g = blocky_model(6, 25.0);
    const Helmholtz hz(g, PmlSpec{5, false, 1e-3});
    const Eigen::VectorXd m = convert(g, GridKind::squared_slowness).values();
    const auto a = hz.assemble(m, angular(5.0));
    const std::vector<GridIndex> rx{{5, 0}, {5, 2}, {5, 5}, {0, 5}};
    const auto rows = hz.rows_of(rx);
    const Eigen::MatrixXcd b = hz.sources({{0, 1}, {1, 4}}, 1.0);
    std::mt19937_64 rng(3);
    Eigen::MatrixXcd d(4, 2);
    d.col(0) = testutil::random_complex(4, rng) * 1e-3;
    d.col(1) = testutil::random_complex(4, rng) * 1e-3;

    const Eigen::MatrixXcd ad = Eigen::MatrixXcd(a.eigen());
    const Eigen::Index n = ad.rows();
    for (const double mu : {1e-6, 1e-4, 1e-2}) {
        CAPTURE(mu);
        Eigen::MatrixXcd stacked = Eigen::MatrixXcd::Zero(n + 4, n);
        stacked.topRows(n) = ad;
        for (int r = 0; r < 4; ++r) {
            stacked(n + r, rows[r]) = mu;
        }
        const Eigen::MatrixXcd u = augmented_solve(a, rows, b, d, mu);
        for (int s = 0; s < 2; ++s) {
            Eigen::VectorXcd rhs(n + 4);
            rhs.head(n) = b.col(s);
            rhs.tail(4) = mu * d.col(s);
            const Eigen::VectorXcd want = stacked.colPivHouseholderQr().solve(rhs);
            CHECK((u.col(s) - want).norm() < 1e-8 * want.norm());
        }
    }

    // mu -> 0 recovers the wave-equation solution
    const Eigen::MatrixXcd u0 = factorize(a).solve(b);
    CHECK((augmented_solve(a, rows, b, d, 1e-12) - u0).norm() < 1e-6 * u0.norm());
    // large mu honours the data
    const Eigen::MatrixXcd ubig = augmented_solve(a, rows, b, d, 1e3);
    CHECK((sample(ubig, rows) - d).norm() < 1e-4 * d.norm());
    CHECK_THROWS_AS(augmented_solve(a, rows, b, Eigen::MatrixXcd::Zero(3, 2), 1.0), GeometryError);
}

TEST_CASE("operator norm")
{
    const auto g = blocky_model(6, 25.0);
    const Helmholtz hz(g, PmlSpec{5, false, 1e-3});
    const Eigen::VectorXd m = hz.reference();
    const Eigen::MatrixXcd ad = Eigen::MatrixXcd(hz.assemble(m, angular(5.0)).eigen());
    const double want = Eigen::JacobiSVD<Eigen::MatrixXcd>(ad).singularValues()[0];
    CHECK(operator_norm(hz, m, 5.0) == doctest::Approx(want).epsilon(1e-3));
}

TEST_CASE("noise")
{
    FreqData d;
    std::mt19937_64 rng(4);
    for (const double f : {3.0, 5.0}) {
        Eigen::MatrixXcd v(7, 3);
        for (int s = 0; s < 3; ++s) {
            v.col(s) = testutil::random_complex(7, rng);
        }
        d.blocks.push_back({f, v});
    }
    const auto noisy = add_noise(d, 5.0, 1234);
    CHECK(snr_db(d, noisy.noise) == doctest::Approx(5.0).epsilon(1e-12));
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK((noisy.data.blocks[k].values - d.blocks[k].values - noisy.noise.blocks[k].values).norm() < 1e-15);
    }
    // seeded
    const auto again = add_noise(d, 5.0, 1234);
    CHECK(again.noise.blocks[1].values == noisy.noise.blocks[1].values);
    const auto other = add_noise(d, 5.0, 99);
    CHECK(other.noise.blocks[1].values != noisy.noise.blocks[1].values);

    const auto clean = add_noise(d, noiseless, 1);
    CHECK(clean.noise.norm() == 0.0);
    CHECK(clean.data.blocks[0].values == d.blocks[0].values);
}
