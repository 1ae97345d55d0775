#pragma once

// Shared test utilities: seeded random band-limited fields and 4th-order
// centered finite-difference oracles (periodic wrap) kept independent of the
// spectral implementation they check.

#include <random>

#include "rnls/grid.hpp"

namespace testutil {

using rnls::cplx;
using rnls::Field;
using rnls::GridPtr;

/// Random band-limited field: complex Gaussian coefficients on modes with
/// |signed index| <= band on every axis, mapped to physical space.
inline Field random_band_limited(const GridPtr& grid, int band, std::uint64_t seed,
                                 double amplitude = 1.0) {
    const rnls::Grid& g = *grid;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    rnls::CplxVec hat(g.size(), cplx(0.0, 0.0));
    const std::size_t n0 = g.n(0);
    auto wrap = [](long s, std::size_t n) {
        return static_cast<std::size_t>(s >= 0 ? s : s + static_cast<long>(n));
    };
    if (g.dim() == 1) {
        for (long s = -band; s <= band; ++s)
            hat[wrap(s, g.n(0))] = cplx(nd(rng), nd(rng));
    } else {
        for (long s1 = -band; s1 <= band; ++s1)
            for (long s0 = -band; s0 <= band; ++s0)
                hat[wrap(s0, n0) + n0 * wrap(s1, g.n(1))] = cplx(nd(rng), nd(rng));
    }
    Field f(grid);
    rnls::fft::backward(g, hat.data(), f.data());
    const double scale = amplitude / static_cast<double>(g.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] *= scale;
    return f;
}

/// 4th-order centered second derivative summed over axes (periodic).
inline Field fd4_laplacian(const Field& f) {
    const rnls::Grid& g = *f.grid();
    Field out(f.grid());
    const std::size_t n0 = g.n(0);
    const std::size_t n1 = g.dim() == 2 ? g.n(1) : 1;
    auto at = [&](long i0, long i1) -> const cplx& {
        const long m0 = ((i0 % (long)n0) + (long)n0) % (long)n0;
        const long m1 = ((i1 % (long)n1) + (long)n1) % (long)n1;
        return f[(std::size_t)m0 + n0 * (std::size_t)m1];
    };
    const double ih0 = 1.0 / (12.0 * g.spacing(0) * g.spacing(0));
    const double ih1 = g.dim() == 2 ? 1.0 / (12.0 * g.spacing(1) * g.spacing(1)) : 0.0;
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
        for (std::size_t i0 = 0; i0 < n0; ++i0) {
            const long a = (long)i0, b = (long)i1;
            cplx acc = (-at(a - 2, b) + 16.0 * at(a - 1, b) - 30.0 * at(a, b) +
                        16.0 * at(a + 1, b) - at(a + 2, b)) *
                       ih0;
            if (g.dim() == 2)
                acc += (-at(a, b - 2) + 16.0 * at(a, b - 1) - 30.0 * at(a, b) +
                        16.0 * at(a, b + 1) - at(a, b + 2)) *
                       ih1;
            out[i0 + n0 * i1] = acc;
        }
    }
    return out;
}

/// 4th-order centered first derivative along one axis (periodic).
inline Field fd4_partial(const Field& f, int axis) {
    const rnls::Grid& g = *f.grid();
    Field out(f.grid());
    const std::size_t n0 = g.n(0);
    const std::size_t n1 = g.dim() == 2 ? g.n(1) : 1;
    auto at = [&](long i0, long i1) -> const cplx& {
        const long m0 = ((i0 % (long)n0) + (long)n0) % (long)n0;
        const long m1 = ((i1 % (long)n1) + (long)n1) % (long)n1;
        return f[(std::size_t)m0 + n0 * (std::size_t)m1];
    };
    const double ih = 1.0 / (12.0 * g.spacing(axis));
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
        for (std::size_t i0 = 0; i0 < n0; ++i0) {
            const long a = (long)i0, b = (long)i1;
            cplx acc;
            if (axis == 0)
                acc = (at(a - 2, b) - 8.0 * at(a - 1, b) + 8.0 * at(a + 1, b) - at(a + 2, b)) * ih;
            else
                acc = (at(a, b - 2) - 8.0 * at(a, b - 1) + 8.0 * at(a, b + 1) - at(a, b + 2)) * ih;
            out[i0 + n0 * i1] = acc;
        }
    }
    return out;
}

/// FD oracle for Lz = i(x2 d1 - x1 d2).
inline Field fd4_lz(const Field& f) {
    const rnls::Grid& g = *f.grid();
    Field d0 = fd4_partial(f, 0);
    Field d1 = fd4_partial(f, 1);
    Field out(f.grid());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto x = g.node(i);
        out[i] = cplx(0.0, 1.0) * (x[1] * d0[i] - x[0] * d1[i]);
    }
    return out;
}

inline double rel_l2_error(const Field& got, const Field& want) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        num += std::norm(got[i] - want[i]);
        den += std::norm(want[i]);
    }
    return std::sqrt(num / den);
}

}  // namespace testutil
