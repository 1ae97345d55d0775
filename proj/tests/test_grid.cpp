#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "rnls/grid.hpp"

using namespace rnls;
using testutil::rel_l2_error;

namespace {
GridPtr grid2(double L, std::size_t n) { return Grid::make({{-L, L, n}, {-L, L, n}}); }
}  // namespace

TEST_CASE("grid construction and invariants") {
    auto g = grid2(12.0, 16);
    CHECK(g->dim() == 2);
    CHECK(g->size() == 16 * 16);
    CHECK(g->spacing(0) == Catch::Approx(24.0 / 16));
    CHECK(g->cell_volume() == Catch::Approx(g->spacing(0) * g->spacing(1)));
    // node (j0, j1): axis 0 varies fastest
    CHECK(g->node(1)[0] == Catch::Approx(-12.0 + 24.0 / 16));
    CHECK(g->node(16)[1] == Catch::Approx(-12.0 + 24.0 / 16));

    CHECK_THROWS_AS(Grid::make({{-1.0, -2.0, 16}}), ConfigError);
    CHECK_THROWS_AS(Grid::make({{-1.0, 1.0, 6}}), ConfigError);
    CHECK_THROWS_AS(Grid::make({{-1.0, 1.0, 17}}), ConfigError);
}

TEST_CASE("laplacian on a Fourier eigenfunction is exact") {
    auto g = grid2(8.0, 32);
    const double k0 = g->freq(0)[3];  // admissible mode
    const double k1 = g->freq(1)[5];
    Field f = make_field(g, [&](const std::array<double, 2>& x) {
        return std::exp(cplx(0.0, k0 * x[0] + k1 * x[1]));
    });
    Field lap = apply_laplacian(f);
    const double expect = -(k0 * k0 + k1 * k1);
    double worst = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        worst = std::max(worst, std::abs(lap[i] - expect * f[i]));
    CHECK(worst < 1e-10 * std::abs(expect));
}

TEST_CASE("laplacian of a constant vanishes") {
    auto g = grid2(5.0, 16);
    Field f = make_field(g, [](const std::array<double, 2>&) { return cplx(1.0, 0.0); });
    Field lap = apply_laplacian(f);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(lap[i]) < 1e-12);
}

TEST_CASE("laplacian of a Gaussian vs analytic and FD oracle") {
    auto g = grid2(16.0, 256);
    Field f = make_field(g, [](const std::array<double, 2>& x) {
        return cplx(std::exp(-(x[0] * x[0] + x[1] * x[1]) / 2.0), 0.0);
    });
    Field lap = apply_laplacian(f);

    // spectral result is exact to roundoff against the closed form
    Field exact = make_field(g, [](const std::array<double, 2>& x) {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        return cplx((r2 - 2.0) * std::exp(-r2 / 2.0), 0.0);
    });
    CHECK(rel_l2_error(lap, exact) < 1e-10);

    // independent FD oracle; its own truncation error caps the agreement
    Field fd = testutil::fd4_laplacian(f);
    CHECK(rel_l2_error(lap, fd) < 5e-5);
    CHECK(rel_l2_error(fd, exact) > 1e-7);  // the gap is the oracle's, not ours
}

TEST_CASE("laplacian rejects non-finite input") {
    auto g = grid2(4.0, 16);
    Field f(g);
    f[3] = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
    CHECK_THROWS_AS(apply_laplacian(f), InvalidFieldError);
}

TEST_CASE("partial derivative examples") {
    auto g = grid2(8.0, 64);
    const double k = g->freq(0)[2];
    Field f = make_field(g, [&](const std::array<double, 2>& x) {
        return cplx(std::sin(k * x[0]), 0.0);
    });
    Field d = apply_partial(f, 0);
    Field expect = make_field(g, [&](const std::array<double, 2>& x) {
        return cplx(k * std::cos(k * x[0]), 0.0);
    });
    CHECK(rel_l2_error(d, expect) < 1e-11);

    Field c = make_field(g, [](const std::array<double, 2>&) { return cplx(3.5, 0.0); });
    Field dc = apply_partial(c, 1);
    for (std::size_t i = 0; i < dc.size(); ++i) CHECK(std::abs(dc[i]) < 1e-12);

    CHECK_THROWS_AS(apply_partial(f, 2), GridMismatchError);
}

TEST_CASE("partial derivative matches FD oracle on band-limited data") {
    auto g = grid2(8.0, 256);
    Field f = testutil::random_band_limited(g, 3, 11);
    for (int axis = 0; axis < 2; ++axis) {
        Field d = apply_partial(f, axis);
        Field fd = testutil::fd4_partial(f, axis);
        CHECK(rel_l2_error(d, fd) < 1e-6);
    }
}

TEST_CASE("Lz on radially symmetric and winding-one fields") {
    auto g = grid2(10.0, 128);
    Field gauss = make_field(g, [](const std::array<double, 2>& x) {
        return cplx(std::exp(-(x[0] * x[0] + x[1] * x[1]) / 2.0), 0.0);
    });
    Field lz = apply_lz(gauss);
    CHECK(norm_l2(lz) / norm_l2(gauss) < 1e-10);

    Field w1 = make_field(g, [](const std::array<double, 2>& x) {
        return cplx(x[0], x[1]) * std::exp(-(x[0] * x[0] + x[1] * x[1]) / 2.0);
    });
    Field lzw = apply_lz(w1);
    CHECK(rel_l2_error(lzw, w1) < 1e-8);  // eigenvalue +1
}

TEST_CASE("Lz matches FD oracle on a random smooth field") {
    auto g = grid2(8.0, 256);
    Field f = testutil::random_band_limited(g, 3, 22);
    Field lz = apply_lz(f);
    Field fd = testutil::fd4_lz(f);
    CHECK(rel_l2_error(lz, fd) < 1e-6);
}

TEST_CASE("Lz is zero for d = 1") {
    auto g = Grid::make({{-8.0, 8.0, 64}});
    Field f = testutil::random_band_limited(g, 3, 5);
    Field lz = apply_lz(f);
    for (std::size_t i = 0; i < lz.size(); ++i) CHECK(std::abs(lz[i]) == 0.0);
}

TEST_CASE("quadrature: inner products and norms") {
    auto g = grid2(16.0, 256);
    Field f = testutil::random_band_limited(g, 4, 7);
    CHECK(inner(f, f).imag() == Catch::Approx(0.0).margin(1e-12 * norm_l2_sq(f)));
    CHECK(inner(f, f).real() >= 0.0);

    // normalized Gaussian sqrt(1/pi) e^{-r^2/2}
    Field gauss = make_field(g, [](const std::array<double, 2>& x) {
        return cplx(std::sqrt(1.0 / std::numbers::pi) *
                        std::exp(-(x[0] * x[0] + x[1] * x[1]) / 2.0),
                    0.0);
    });
    CHECK(std::abs(norm_lq(gauss, 2.0) - 1.0) < 1e-10);
    const double expect4 = std::pow(1.0 / (2.0 * std::numbers::pi), 0.25);
    CHECK(std::abs(norm_lq(gauss, 4.0) - expect4) < 1e-8);

    auto g2 = grid2(16.0, 128);
    Field other(g2);
    CHECK_THROWS_AS(inner(f, other), GridMismatchError);
    CHECK_THROWS_AS(norm_lq(f, 0.5), ParameterDomainError);
}

TEST_CASE("Parseval identity") {
    auto g = grid2(9.0, 128);
    Field f = testutil::random_band_limited(g, 10, 13);
    const double phys = norm_l2(f);
    const double spec = norm_l2_spectral(f);
    CHECK(std::abs(phys - spec) / phys < 1e-12);
}

TEST_CASE("operators are linear") {
    auto g = grid2(7.0, 64);
    Field f = testutil::random_band_limited(g, 5, 3);
    Field h = testutil::random_band_limited(g, 5, 4);
    const cplx a(0.7, -0.3), b(-1.2, 0.4);
    Field combo(g);
    for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = a * f[i] + b * h[i];

    Field lhs = apply_laplacian(combo);
    Field lf = apply_laplacian(f);
    Field lh = apply_laplacian(h);
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        worst = std::max(worst, std::abs(lhs[i] - (a * lf[i] + b * lh[i])));
        scale = std::max(scale, std::abs(lhs[i]));
    }
    CHECK(worst < 1e-12 * std::max(1.0, scale));
}

TEST_CASE("Hermitian symmetry of -Lap and Lz") {
    auto g = grid2(8.0, 128);
    Field f = testutil::random_band_limited(g, 6, 17);
    Field h = testutil::random_band_limited(g, 6, 18);

    Field lf = apply_laplacian(f);
    Field lh = apply_laplacian(h);
    const cplx a1 = inner(lf, h);
    const cplx a2 = inner(f, lh);
    CHECK(std::abs(a1 - a2) < 1e-10 * std::abs(a1));

    Field zf = apply_lz(f);
    Field zh = apply_lz(h);
    const cplx b1 = inner(zf, h);
    const cplx b2 = inner(f, zh);
    CHECK(std::abs(b1 - b2) < 1e-10 * std::max(1.0, std::abs(b1)));

    // <Lz f, f> is real
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        Field r = testutil::random_band_limited(g, 8, seed);
        const cplx v = inner(apply_lz(r), r);
        CHECK(std::abs(v.imag()) < 1e-10 * norm_l2_sq(r));
    }
}

TEST_CASE("spectral resample preserves band-limited fields") {
    auto coarse = grid2(8.0, 64);
    auto fine = grid2(8.0, 128);
    Field f = testutil::random_band_limited(coarse, 5, 23);
    Field up = resample(f, fine);
    Field back = resample(up, coarse);
    CHECK(rel_l2_error(back, f) < 1e-12);
    // values at shared nodes agree
    double worst = 0.0;
    for (std::size_t i1 = 0; i1 < 64; ++i1)
        for (std::size_t i0 = 0; i0 < 64; ++i0)
            worst = std::max(worst,
                             std::abs(up[2 * i0 + 128 * 2 * i1] - f[i0 + 64 * i1]));
    CHECK(worst < 1e-12);
}

TEST_CASE("cubic interpolation reproduces smooth fields off-grid") {
    auto g = grid2(8.0, 128);
    Field f = make_field(g, [](const std::array<double, 2>& x) {
        return cplx(std::exp(-(x[0] * x[0] + x[1] * x[1]) / 3.0), 0.0);
    });
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const double x = -4.0 + 0.171 * t;
        const double y = 3.0 - 0.133 * t;
        const cplx got = interpolate_cubic(f, {x, y});
        const double want = std::exp(-(x * x + y * y) / 3.0);
        worst = std::max(worst, std::abs(got - want));
    }
    CHECK(worst < 1e-4);
}
