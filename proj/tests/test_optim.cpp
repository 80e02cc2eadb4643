#include "proxfwi/errors.hpp"
#include "proxfwi/optim.hpp"
#include "proxfwi/toyproblems.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace proxfwi;
using namespace proxfwi::optim;

namespace {

using oracle::coordinate_descent;

Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937_64& rng)
{
    Eigen::MatrixXd a(rows, cols);
    for (int c = 0; c < cols; ++c) {
        a.col(c) = testutil::random_vector(rows, rng);
    }
    return a;
}

Eigen::MatrixXd random_spd(int n, std::mt19937_64& rng)
{
    const Eigen::MatrixXd a = random_matrix(n, n, rng);
    return a.transpose() * a + 0.5 * Eigen::MatrixXd::Identity(n, n);
}

double sigma_max(const Eigen::MatrixXd& h) { return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues().maxCoeff(); }

} // namespace

TEST_CASE("option parsing")
{
    CHECK(parse_method("nista") == Method::nista);
    CHECK(parse_method("nadmm") == Method::nadmm);
    CHECK_THROWS_AS(parse_method("ista"), DomainError);
    CHECK(parse_hessian("lbfgs") == HessianKind::lbfgs);
    CHECK(parse_step_rule("spectral-squared") == StepRule::spectral_squared);
    CHECK(parse_nadmm_solver("diagonal") == NadmmSolver::diagonal);
    CHECK(parse_stop_rule("data-residual") == StopRule::data_residual);
    CHECK_THROWS_AS(parse_stop_rule("never"), DomainError);
    CHECK(to_string(Method::nadmm) == "nadmm");

    OptConfig bad;
    bad.lambda = -1.0;
    CHECK_THROWS(bad.validate());
    bad = OptConfig{};
    bad.line_search.shrink = 1.0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("backtracking line search")
{
    const auto f = [](const Vec& x) { return x.squaredNorm(); };
    const Vec m = Vec::Constant(2, 1.0);

    const auto full = line_search(f, m, -m, f(m), 1.0, LineSearchParams{});
    CHECK(full.alpha == 1.0);
    CHECK(full.trials == 1);
    CHECK_FALSE(full.flagged);

    // overshooting direction: alpha = 1 lands at -3m, alpha = 1/2 at -m, alpha = 1/4 passes
    const auto back = line_search(f, m, -4 * m, f(m), 1.0, LineSearchParams{});
    CHECK(back.alpha == 0.25);
    CHECK(back.value < f(m));

    // ascent never passes
    const auto up = line_search(f, m, m, f(m), 1.0, LineSearchParams{0.5, 1e-4, 5});
    CHECK(up.flagged);
    CHECK(up.trials == 5);
    CHECK(up.value > f(m));
}

TEST_CASE("proximal gradient matches coordinate descent lasso")
{
    std::mt19937_64 rng(11);
    const Eigen::MatrixXd a = random_matrix(30, 12, rng);
    const Vec d = testutil::random_vector(30, rng);
    LeastSquaresOracle oracle(a, d);
    const double lambda = 0.8;
    const Vec oracle_m = coordinate_descent(a.transpose() * a, a.transpose() * d, lambda);

    const GridShape shape{3, 4};
    const auto ista = proximal_gradient(oracle, denoisers::L1{}, shape, lambda, Vec::Zero(12), 5000, false);
    CHECK(testutil::rel_err(ista.m, oracle_m) < 1e-8);
    const auto fista = proximal_gradient(oracle, denoisers::L1{}, shape, lambda, Vec::Zero(12), 2000, true);
    CHECK(testutil::rel_err(fista.m, oracle_m) < 1e-8);

    // lambda = 0 is least squares
    const Vec ls = a.colPivHouseholderQr().solve(d);
    const auto plain = proximal_gradient(oracle, denoisers::Identity{}, shape, 0.0, Vec::Zero(12), 5000, true);
    CHECK(testutil::rel_err(plain.m, ls) < 1e-8);

    CHECK_THROWS_AS(proximal_gradient(oracle, denoisers::L1{}, shape, -1.0, Vec::Zero(12), 1, false), DomainError);
}

TEST_CASE("L-BFGS history")
{
    std::mt19937_64 rng(12);
    const int n = 6;
    const Eigen::MatrixXd q = random_spd(n, rng);
    LbfgsHistory h(n);
    for (int i = 0; i < n; ++i) {
        const Vec s = testutil::random_vector(n, rng);
        CHECK(h.push(s, q * s));
    }
    CHECK(h.size() == n);

    // direct and inverse products are mutual inverses
    const Vec g = testutil::random_vector(n, rng);
    CHECK(testutil::rel_err(h.apply_direct(h.apply_inverse(g)), g) < 1e-10);
    CHECK(testutil::rel_err(lbfgs_apply_inverse(h, g, true), h.apply_inverse(g)) == 0.0);

    // secant equation on the newest pair
    CHECK(testutil::rel_err(h.apply_inverse(h.y().back()), h.s().back()) < 1e-10);

    // negative curvature is rejected
    const Vec s = testutil::random_vector(n, rng);
    CHECK_FALSE(h.push(s, -s));
    CHECK(h.skipped() == 1);
    CHECK(h.size() == n);

    // memory bound
    LbfgsHistory small(2);
    for (int i = 0; i < 5; ++i) {
        const Vec si = testutil::random_vector(n, rng);
        small.push(si, q * si);
    }
    CHECK(small.size() == 2);
}

TEST_CASE("L-BFGS quadratic minimizer")
{
    std::mt19937_64 rng(13);
    const Eigen::MatrixXd q = random_spd(15, rng);
    const Vec b = testutil::random_vector(15, rng);
    const auto res = lbfgs_minimize_quadratic([&](const Vec& v) -> Vec { return q * v; }, b, Vec::Zero(15), 5, 500,
                                              1e-12);
    CHECK(res.converged);
    CHECK(testutil::rel_err(res.x, q.ldlt().solve(b)) < 1e-9);
}

TEST_CASE("damped Newton solvers agree")
{
    std::mt19937_64 rng(14);
    const Eigen::MatrixXd q = random_spd(8, rng);
    const Vec rhs = testutil::random_vector(8, rng);
    const double c = 0.3;
    Eigen::MatrixXd sys = c * q;
    sys.diagonal().array() += 1.0;
    const Vec want = sys.ldlt().solve(rhs);

    HessianModel h;
    h.n = 8;
    h.apply = [&](const Vec& v) -> Vec { return q * v; };
    CHECK(testutil::rel_err(solve_damped_newton(h, c, rhs, NadmmSolver::exact_dense, 64, 100, 5), want) < 1e-12);
    CHECK(testutil::rel_err(solve_damped_newton(h, c, rhs, NadmmSolver::lbfgs, 64, 500, 5), want) < 1e-9);
    CHECK_THROWS_AS(solve_damped_newton(h, c, rhs, NadmmSolver::diagonal, 64, 100, 5), DomainError);

    HessianModel dh;
    dh.n = 8;
    const Vec diag = testutil::random_vector(8, rng, 0.5, 3.0);
    dh.apply = [&](const Vec& v) -> Vec { return diag.cwiseProduct(v); };
    dh.diag = diag;
    const Vec dwant = rhs.array() / (c * diag.array() + 1.0);
    CHECK(testutil::rel_err(solve_damped_newton(dh, c, rhs, NadmmSolver::automatic, 64, 100, 5), dwant) < 1e-15);

    // shifted two-loop recursion vs the same B materialized
    LbfgsHistory hist(4);
    for (int i = 0; i < 4; ++i) {
        const Vec s = testutil::random_vector(8, rng);
        hist.push(s, q * s);
    }
    HessianModel lh;
    lh.n = 8;
    lh.apply = [&](const Vec& v) { return hist.apply_direct(v); };
    lh.lbfgs = &hist;
    Eigen::MatrixXd b(8, 8);
    for (int j = 0; j < 8; ++j) {
        b.col(j) = hist.apply_direct(Vec::Unit(8, j));
    }
    Eigen::MatrixXd bsys = c * b;
    bsys.diagonal().array() += 1.0;
    CHECK(testutil::rel_err(solve_damped_newton(lh, c, rhs, NadmmSolver::lbfgs, 64, 100, 5),
                            bsys.partialPivLu().solve(rhs)) < 1e-9);
}

TEST_CASE("NISTA direction")
{
    std::mt19937_64 rng(15);
    const Eigen::MatrixXd h = random_spd(2, rng);
    const Vec g = testutil::random_vector(2, rng);
    const Vec m = testutil::random_vector(2, rng);
    const LinearOperator hess = [&](const Vec& v) -> Vec { return h * v; };
    const double c = 0.9 / sigma_max(h);
    const GridShape shape{1, 2};

    SUBCASE("identity prox gives the Newton step")
    {
        const auto dir = nista_direction(hess, g, m, denoisers::Identity{}, shape, 0.0, c, 3000, Vec());
        CHECK(testutil::rel_err(dir.direction, -h.ldlt().solve(g)) < 1e-10);
        CHECK(dir.hvp_count == 2999);
    }

    SUBCASE("l1 model minimizer")
    {
        const double lambda = 0.4;
        // minimize g.(z-m) + 1/2 (z-m)^T H (z-m) + lambda |z|_1 over z = m + dm
        const Vec z = coordinate_descent(h, h * m - g, lambda);
        const auto dir = nista_direction(hess, g, m, denoisers::L1{}, shape, lambda, c, 3000, Vec());
        CHECK((m + dir.direction - z).norm() < 1e-9);

        // brute force on a 2-D lattice around the minimizer
        const auto model = [&](const Vec& dm) {
            return g.dot(dm) + 0.5 * dm.dot(h * dm) + lambda * (m + dm).lpNorm<1>();
        };
        const double best = model(dir.direction);
        for (int i = -20; i <= 20; ++i) {
            for (int j = -20; j <= 20; ++j) {
                CHECK(model(dir.direction + Vec(Eigen::Vector2d(i * 1e-3, j * 1e-3))) >= best - 1e-12);
            }
        }
    }

    SUBCASE("one inner iteration is a proximal gradient step")
    {
        const auto dir = nista_direction(hess, g, m, denoisers::L1{}, shape, 0.3, c, 1, Vec());
        CHECK((dir.direction - (prox_l1(m - c * g, c * 0.3) - m)).norm() < 1e-15);
        CHECK(dir.hvp_count == 0);
    }

    CHECK_THROWS_AS(nista_direction(hess, g, m, denoisers::Identity{}, shape, 0.0, 0.0, 5, Vec()), DomainError);
    CHECK_THROWS_AS(nista_direction(hess, g, m, denoisers::Identity{}, shape, 0.0, c, 0, Vec()), DomainError);
}

TEST_CASE("NADMM step algebra")
{
    std::mt19937_64 rng(16);
    const Eigen::MatrixXd a = random_matrix(10, 4, rng);
    const Vec d = testutil::random_vector(10, rng);
    LeastSquaresOracle oracle(a, d);
    const Eigen::MatrixXd h = a.transpose() * a;
    HessianModel hm;
    hm.n = 4;
    hm.apply = [&](const Vec& v) -> Vec { return h * v; };
    hm.dense = h;
    const GridShape shape{2, 2};
    const auto misfit = [&](const Vec& x) { return oracle.value(x); };
    OptConfig cfg;

    SUBCASE("lambda = 0 with p = m, q = 0 is damped Newton")
    {
        AdmmState s = make_admm_state(testutil::random_vector(4, rng), true);
        const double c = 0.7;
        for (int k = 0; k < 5; ++k) {
            const Vec g = oracle.gradient(s.m);
            Eigen::MatrixXd sys = c * h;
            sys.diagonal().array() += 1.0;
            const Vec want = sys.ldlt().solve(-c * g);
            const auto res = nadmm_step(misfit, oracle.value(s.m), g, hm, s, denoisers::Identity{}, shape, 0.0, c, cfg);
            CHECK((res.direction - want).norm() <= 1e-12 * want.norm());
            CHECK(res.state.q.norm() == 0.0);
            CHECK(res.state.p == res.state.m);
            CHECK(res.state.iteration == k + 1);
            s = res.state;
        }
    }

    SUBCASE("scalar updates by hand")
    {
        // M(m) = 1/2 (m - 3)^2, c = 1, p = 1, q = 0.5 from m = 0
        LeastSquaresOracle scalar(Eigen::MatrixXd::Ones(1, 1), Vec::Constant(1, 3.0));
        HessianModel sh;
        sh.n = 1;
        sh.apply = [](const Vec& v) { return v; };
        sh.dense = Eigen::MatrixXd::Ones(1, 1);
        AdmmState s;
        s.m = Vec::Zero(1);
        s.p = Vec::Constant(1, 1.0);
        s.q = Vec::Constant(1, 0.5);
        const auto f = [&](const Vec& x) { return scalar.value(x); };
        const auto res = nadmm_step(f, scalar.value(s.m), scalar.gradient(s.m), sh, s, denoisers::L1{}, GridShape{1, 1},
                                    0.5, 1.0, cfg);
        // dm = (H + 1)^{-1} (3 + 1.5) = 2.25, surrogate minimized exactly at alpha = 1
        CHECK(res.direction[0] == doctest::Approx(2.25).epsilon(1e-15));
        CHECK(res.line_search.alpha == 1.0);
        CHECK(res.state.m[0] == doctest::Approx(2.25));
        CHECK(res.state.p[0] == doctest::Approx(1.25)); // soft(2.25 - 0.5, 0.5)
        CHECK(res.state.q[0] == doctest::Approx(-0.5)); // 0.5 + 1.25 - 2.25
    }

    CHECK_THROWS_AS(nadmm_step(misfit, 0.0, Vec::Zero(4), hm, make_admm_state(Vec::Zero(4)), denoisers::Identity{},
                               shape, 0.0, 0.0, cfg),
                    DomainError);
    AdmmState bad = make_admm_state(Vec::Zero(4));
    bad.q = Vec::Zero(3);
    CHECK_THROWS_AS(nadmm_step(misfit, 0.0, Vec::Zero(4), hm, bad, denoisers::Identity{}, shape, 0.0, 1.0, cfg),
                    GeometryError);
}

TEST_CASE("proximal Newton driver on lasso")
{
    std::mt19937_64 rng(17);
    const Eigen::MatrixXd a = random_matrix(25, 9, rng);
    const Vec d = testutil::random_vector(25, rng);
    const double lambda = 0.5;
    const Vec want = coordinate_descent(a.transpose() * a, a.transpose() * d, lambda);
    const GridShape shape{3, 3};

    for (const auto method : {Method::nista, Method::nadmm}) {
        CAPTURE(to_string(method));
        LeastSquaresOracle oracle(a, d);
        OptConfig cfg;
        cfg.lambda = lambda;
        cfg.max_outer = 400;
        cfg.max_inner = 200;
        cfg.c_freeze_after = 0;
        cfg.step_tol = 1e-13;
        const auto res = proximal_newton_solve(oracle, denoisers::L1{}, shape, cfg, Vec::Zero(9), method);
        CHECK(testutil::rel_err(res.m, want) < 1e-6);
        CHECK(res.history.size() == static_cast<std::size_t>(res.iterations) + 1);
        if (method == Method::nista) {
            for (std::size_t k = 1; k < res.history.size(); ++k) {
                CHECK(res.history[k].objective <= res.history[k - 1].objective + 1e-12);
            }
        }
    }
}

TEST_CASE("NADMM with lambda = 0 keeps p = m and q = 0 along the run")
{
    toy::RosenbrockOracle oracle;
    OptConfig cfg;
    cfg.c_rule = StepRule::fixed;
    cfg.c_fixed = 0.01;
    cfg.max_outer = 1;
    const GridShape shape{1, 2};
    Vec m = Vec(Eigen::Vector2d(-1.0, 1.0));
    AdmmState s = make_admm_state(m);
    for (int k = 0; k < 30; ++k) {
        HessianModel h;
        h.n = 2;
        h.dense = oracle.hessian_dense(s.m);
        h.apply = [&, mk = s.m](const Vec& v) { return oracle.hvp(mk, v); };
        const Vec g = oracle.gradient(s.m);
        const auto res = nadmm_step([&](const Vec& x) { return oracle.value(x); }, oracle.value(s.m), g, h, s,
                                    denoisers::Identity{}, shape, 0.0, cfg.c_fixed, cfg);
        if (k >= 1) {
            Eigen::MatrixXd sys = cfg.c_fixed * *h.dense;
            sys.diagonal().array() += 1.0;
            const Vec want = sys.partialPivLu().solve(-cfg.c_fixed * g);
            CHECK((res.direction - want).norm() <= 1e-8);
        }
        CHECK(res.state.q.norm() == 0.0);
        CHECK(res.state.p == res.state.m);
        s = res.state;
    }
}

TEST_CASE("objective scaling with matching c leaves the iterates unchanged")
{
    const GridShape shape{1, 2};
    const Vec m0 = Vec(Eigen::Vector2d(-1.0, 1.0));
    for (const auto method : {Method::nista, Method::nadmm}) {
        OptConfig cfg;
        cfg.lambda = 0.5;
        cfg.max_outer = 10;
        cfg.max_inner = 50;
        cfg.c_rule = StepRule::fixed;
        cfg.c_fixed = 0.002;
        toy::RosenbrockOracle base;
        const auto r1 = proximal_newton_solve(base, denoisers::L1{}, shape, cfg, m0, method);

        cfg.lambda = 2.0;
        cfg.c_fixed = 0.0005;
        toy::RosenbrockOracle scaled(4.0);
        const auto r4 = proximal_newton_solve(scaled, denoisers::L1{}, shape, cfg, m0, method);
        CHECK((r1.m - r4.m).norm() < 1e-12);
    }
}

TEST_CASE("history CSV")
{
    std::vector<IterationRecord> h{{0, 2.0, 1.5, 0.25, 0.0, 0.0, 0.0, false},
                                   {1, 1.0, 1.0, std::nan(""), 0.5, 0.1, 0.02, false}};
    std::ostringstream os;
    write_history_csv(os, h);
    CHECK(os.str() == "iter,objective,misfit,reg_value,alpha,step_norm,ck\n"
                      "0,2,1.5,0.25,0,0,0\n"
                      "1,1,1,,0.5,0.10000000000000001,0.02\n");
}
