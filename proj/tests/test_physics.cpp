#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "rnls/model.hpp"

using namespace rnls;

namespace {

GridPtr grid2(double L, std::size_t n) { return Grid::make({{-L, L, n}, {-L, L, n}}); }

Field normalized_gauss(const GridPtr& g) {
    return make_field(g, [](const std::array<double, 2>& x) {
        return cplx(std::sqrt(1.0 / std::numbers::pi) *
                        std::exp(-(x[0] * x[0] + x[1] * x[1]) / 2.0),
                    0.0);
    });
}

}  // namespace

TEST_CASE("potential evaluation examples") {
    auto g = grid2(4.0, 16);

    PotentialSpec harm = PotentialSpec::harmonic({1.0, 1.0});
    CHECK(harm({0.0, 0.0}, 2) == 0.0);
    CHECK(harm({1.0, 0.0}, 2) == Catch::Approx(0.5));

    PotentialSpec quart = PotentialSpec::harmonic_quartic(1.0, 1.0);
    CHECK(quart({1.0, 0.0}, 2) == Catch::Approx(0.0).margin(1e-15));

    PotentialSpec latt = PotentialSpec::harmonic_lattice({1.0, 1.0}, 2.0);
    CHECK(latt({1.0, 1.0}, 2) == Catch::Approx(5.0));  // 1/2*2 + 2*(1 + 1)

    Field v = eval_potential(latt, g);
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(v[i].real() >= 0.0);
        CHECK(v[i].imag() == 0.0);
    }

    CHECK_THROWS_AS(PotentialSpec::harmonic({-1.0, 1.0}).validate(2), ConfigError);
    CHECK_THROWS_AS(PotentialSpec::harmonic_quartic(0.0, 1.0).validate(2), ConfigError);

    CHECK(harm.omega_max(2) == Catch::Approx(1.0));
    CHECK(PotentialSpec::harmonic({1.0, 2.0}).omega_max(2) == Catch::Approx(1.0));
    CHECK(latt.omega_max(2) == Catch::Approx(1.0));
    CHECK(std::isinf(quart.omega_max(2)));
}

TEST_CASE("model parameter validation") {
    auto g = grid2(8.0, 32);
    ModelParams prm;
    CHECK_NOTHROW(prm.validate(*g));
    prm.p = 1.0;
    CHECK_THROWS_AS(prm.validate(*g), ParameterDomainError);
    prm.p = 3.0;
    prm.Omega = 1.0;  // = Omega_max for harmonic(1,1)
    CHECK_THROWS_AS(prm.validate(*g), ParameterDomainError);
    prm.Omega = 0.0;
    prm.beta = -0.5;
    CHECK_THROWS_AS(prm.validate(*g), ParameterDomainError);

    auto g1 = Grid::make({{-8.0, 8.0, 32}});
    ModelParams p1;
    p1.potential = PotentialSpec::harmonic({1.0});
    p1.Omega = 0.3;
    CHECK_THROWS_AS(p1.validate(*g1), ParameterDomainError);
}

TEST_CASE("diagnostics of the zero field") {
    auto g = grid2(8.0, 32);
    ModelParams prm;
    Diagnostics d = diagnostics(Field(g), prm);
    CHECK(d.mass == 0.0);
    CHECK(d.action == 0.0);
    CHECK(d.energy == 0.0);
    CHECK(d.nehari == 0.0);
    CHECK(d.mu == 0.0);
    CHECK(d.pde_residual_l2 == 0.0);
}

TEST_CASE("diagnostics of the normalized Gaussian: closed forms") {
    auto g = grid2(16.0, 256);
    ModelParams prm;  // p=3, beta=1, harmonic(1,1)
    prm.omega = -2.0;
    prm.Omega = 0.0;
    Field phi = normalized_gauss(g);
    Diagnostics d = diagnostics(phi, prm);

    const double pi = std::numbers::pi;
    CHECK(std::abs(d.mass - 1.0) < 1e-8);
    CHECK(std::abs(d.energy - (1.0 + 1.0 / (4.0 * pi))) < 1e-8);
    CHECK(std::abs(d.mu - (1.0 + 1.0 / (2.0 * pi))) < 1e-8);
    CHECK(std::abs(d.action - (d.energy - 2.0)) < 1e-12);
    CHECK(std::abs(d.lz_expect) < 1e-10);

    // identity wiring: S = E + omega M; K = Q + beta |phi|_4^4;
    // S = K - beta (p-1)/(p+1) |phi|_4^4; mu M = E + beta (p-1)/(p+1) |phi|_4^4
    CHECK(std::abs(d.action - (d.energy + prm.omega * d.mass)) <
          1e-10 * std::abs(d.action));
    CHECK(std::abs(d.nehari - (d.quadratic + prm.beta * d.lp_norm_pp)) <
          1e-10 * std::max(1.0, std::abs(d.nehari)));
    CHECK(std::abs(d.action - (d.nehari - prm.beta * 0.5 * d.lp_norm_pp)) <
          1e-10 * std::abs(d.action));
    CHECK(std::abs(d.mu * d.mass - (d.energy + prm.beta * 0.5 * d.lp_norm_pp)) < 1e-10);
}

TEST_CASE("action gradient: central-difference directional derivatives") {
    auto g = grid2(6.0, 48);
    ModelParams prm;
    prm.omega = -2.0;
    prm.Omega = 0.5;
    prm.p = 3.0;

    for (int trial = 0; trial < 20; ++trial) {
        Field phi = testutil::random_band_limited(g, 4, 1000 + trial);
        Field xi = testutil::random_band_limited(g, 4, 2000 + trial);
        Field grad = action_gradient(phi, prm);
        const double t = 1e-5;
        Field plus = phi, minus = phi;
        for (std::size_t i = 0; i < phi.size(); ++i) {
            plus[i] += t * xi[i];
            minus[i] -= t * xi[i];
        }
        const double sp = diagnostics(plus, prm).action;
        const double sm = diagnostics(minus, prm).action;
        const double fd = (sp - sm) / (2.0 * t);
        const double an = inner(grad, xi).real();
        CHECK(std::abs(fd - an) < 1e-6 * std::max(1.0, std::abs(an)));
    }
}

TEST_CASE("gradient of a linear eigenfunction vanishes at omega = -lambda0") {
    auto g = grid2(12.0, 128);
    ModelParams prm;
    prm.beta = 0.0;
    prm.omega = -1.0;  // -lambda0 for harmonic(1,1), any Omega below 1
    prm.Omega = 0.5;
    Field phi = normalized_gauss(g);
    Field grad = action_gradient(phi, prm);
    CHECK(norm_l2(grad) < 1e-8);

    // linearity in the beta = 0 case: grad(c phi) = c grad(phi)
    prm.omega = -2.0;
    Field phi2 = phi;
    for (std::size_t i = 0; i < phi2.size(); ++i) phi2[i] *= 3.0;
    Field g1 = action_gradient(phi, prm);
    Field g2 = action_gradient(phi2, prm);
    double worst = 0.0;
    for (std::size_t i = 0; i < g1.size(); ++i)
        worst = std::max(worst, std::abs(g2[i] - 3.0 * g1[i]));
    CHECK(worst < 1e-12);
}

TEST_CASE("rotation bound holds on random fields") {
    auto g = grid2(8.0, 64);
    ModelParams prm;  // harmonic(1,1): int V |phi|^2 = 1/2 int r^2 |phi|^2
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Field phi = testutil::random_band_limited(g, 5, 3000 + seed);
        const double lz = std::abs(inner(apply_lz(phi), phi).real());
        Diagnostics d = diagnostics(phi, prm);
        // x_norm_sq = |grad|^2 + mass + int V|phi|^2, so the bound
        // 1/2 |grad|^2 + 1/2 int r^2 |phi|^2 = kinetic + int V |phi|^2
        const double int_v = d.x_norm_sq - 2.0 * d.kinetic - d.mass;
        const double bound = d.kinetic + int_v;
        CHECK(lz <= bound + 1e-9 * std::max(1.0, bound));
    }
}

TEST_CASE("gauge invariance of all diagnostics") {
    auto g = grid2(8.0, 64);
    ModelParams prm;
    prm.omega = -3.0;
    prm.Omega = 0.4;
    Field phi = testutil::random_band_limited(g, 5, 71);
    Field rot = phi;
    const cplx ph = std::exp(cplx(0.0, 0.77));
    for (std::size_t i = 0; i < rot.size(); ++i) rot[i] *= ph;
    Diagnostics a = diagnostics(phi, prm);
    Diagnostics b = diagnostics(rot, prm);
    const double tol = 1e-12 * std::max(1.0, std::abs(a.action));
    CHECK(std::abs(a.mass - b.mass) < tol);
    CHECK(std::abs(a.action - b.action) < tol);
    CHECK(std::abs(a.energy - b.energy) < tol);
    CHECK(std::abs(a.nehari - b.nehari) < tol);
    CHECK(std::abs(a.mu - b.mu) < tol);
    CHECK(std::abs(a.lz_expect - b.lz_expect) < tol);
    CHECK(std::abs(a.x_norm_sq - b.x_norm_sq) < tol);
    CHECK(std::abs(a.pde_residual_l2 - b.pde_residual_l2) < tol);
}

TEST_CASE("beta scaling identity") {
    auto g = grid2(8.0, 64);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Field phi = testutil::random_band_limited(g, 4, 500 + seed);
        const double p = 3.0, beta = 2.5;
        ModelParams with_beta;
        with_beta.p = p;
        with_beta.beta = beta;
        with_beta.omega = -2.0;
        with_beta.Omega = 0.3;
        ModelParams unit = with_beta;
        unit.beta = 1.0;

        const double c = std::pow(beta, -1.0 / (p - 1.0));
        Field scaled = phi;
        for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] *= c;
        const double lhs = diagnostics(scaled, with_beta).action;
        const double rhs = c * c * diagnostics(phi, unit).action;
        CHECK(std::abs(lhs - rhs) < 1e-11 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("real-valued fields carry no angular momentum") {
    auto g = grid2(8.0, 64);
    ModelParams prm;
    prm.Omega = 0.5;
    Field phi = testutil::random_band_limited(g, 5, 321);
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = cplx(phi[i].real(), 0.0);
    Diagnostics d = diagnostics(phi, prm);
    CHECK(std::abs(d.lz_expect) < 1e-10);
}

TEST_CASE("non-integer p uses the pointwise power consistently") {
    auto g = grid2(8.0, 64);
    ModelParams prm;
    prm.p = 2.4;
    prm.omega = -2.0;
    Field phi = testutil::random_band_limited(g, 4, 9);
    phi[0] = cplx(0.0, 0.0);  // |phi| = 0 handled as exact 0
    Diagnostics d = diagnostics(phi, prm);
    CHECK(std::isfinite(d.action));
    CHECK(std::isfinite(d.pde_residual_l2));
    CHECK(d.lp_norm_pp ==
          Catch::Approx(std::pow(norm_lq(phi, prm.p + 1.0), prm.p + 1.0)));
}
