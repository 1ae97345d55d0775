#pragma once

#include <fftw3.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

#include "rnls/common.hpp"

namespace rnls {

// ---------------------------------------------------------------------------
// Grid: uniform tensor-product nodes on a periodic rectangular box, d = 1 or 2.
// Node j along an axis sits at x_min + j*h with h = (x_max - x_min)/n; x_max is
// identified with x_min. Axis 0 varies fastest in the flat ordering. Quadrature
// is the periodic trapezoid rule, weight prod(h_j).
// ---------------------------------------------------------------------------

struct AxisSpec {
    double x_min = -12.0;
    double x_max = 12.0;
    std::size_t n = 256;
};

class Grid {
public:
    static std::shared_ptr<const Grid> make(const std::vector<AxisSpec>& axes) {
        if (axes.empty() || axes.size() > 2)
            throw ConfigError("grid: dim must be 1 or 2");
        for (const auto& a : axes) {
            if (!(a.x_max > a.x_min))
                throw ConfigError("grid: x_max must exceed x_min");
            if (a.n < 8 || a.n % 2 != 0)
                throw ConfigError("grid: points per axis must be even and >= 8");
        }
        return std::shared_ptr<const Grid>(new Grid(axes));
    }

    int dim() const { return static_cast<int>(axes_.size()); }
    std::size_t n(int axis) const { return axes_[axis].n; }
    double x_min(int axis) const { return axes_[axis].x_min; }
    double x_max(int axis) const { return axes_[axis].x_max; }
    double length(int axis) const { return axes_[axis].x_max - axes_[axis].x_min; }
    double spacing(int axis) const { return h_[axis]; }
    std::size_t size() const { return total_; }
    double cell_volume() const { return cellvol_; }

    const std::vector<double>& coords(int axis) const { return x_[axis]; }
    /// Spectral frequencies 2*pi*s/L in FFT storage order; the Nyquist slot
    /// carries +pi*n/L (kept for the Laplacian).
    const std::vector<double>& freq(int axis) const { return k_[axis]; }
    /// Same but with the Nyquist coefficient zeroed (odd-derivative convention).
    const std::vector<double>& freq_deriv(int axis) const { return kd_[axis]; }

    std::array<double, 2> node(std::size_t flat) const {
        std::array<double, 2> p{0.0, 0.0};
        const std::size_t n0 = axes_[0].n;
        p[0] = x_[0][flat % n0];
        if (dim() == 2) p[1] = x_[1][flat / n0];
        return p;
    }

    bool same_as(const Grid& o) const {
        if (dim() != o.dim()) return false;
        for (int a = 0; a < dim(); ++a)
            if (axes_[a].n != o.axes_[a].n || axes_[a].x_min != o.axes_[a].x_min ||
                axes_[a].x_max != o.axes_[a].x_max)
                return false;
        return true;
    }

private:
    explicit Grid(const std::vector<AxisSpec>& axes) : axes_(axes) {
        total_ = 1;
        cellvol_ = 1.0;
        for (const auto& a : axes_) {
            total_ *= a.n;
            h_.push_back((a.x_max - a.x_min) / static_cast<double>(a.n));
            cellvol_ *= h_.back();
        }
        for (std::size_t ax = 0; ax < axes_.size(); ++ax) {
            const std::size_t n = axes_[ax].n;
            const double L = axes_[ax].x_max - axes_[ax].x_min;
            std::vector<double> xs(n), ks(n), kds(n);
            for (std::size_t j = 0; j < n; ++j) {
                xs[j] = axes_[ax].x_min + static_cast<double>(j) * h_[ax];
                const double s = (j <= n / 2) ? static_cast<double>(j)
                                              : static_cast<double>(j) - static_cast<double>(n);
                ks[j] = 2.0 * std::numbers::pi * s / L;
                kds[j] = (j == n / 2) ? 0.0 : ks[j];
            }
            x_.push_back(std::move(xs));
            k_.push_back(std::move(ks));
            kd_.push_back(std::move(kds));
        }
    }

    std::vector<AxisSpec> axes_;
    std::vector<double> h_;
    std::vector<std::vector<double>> x_, k_, kd_;
    std::size_t total_ = 0;
    double cellvol_ = 1.0;
};

using GridPtr = std::shared_ptr<const Grid>;

// ---------------------------------------------------------------------------
// FFT plan cache. Plans are created once per (shape, direction) with
// FFTW_MEASURE on scratch buffers and then executed on caller arrays via the
// new-array interface (alignment guaranteed by AlignedAllocator). Accumulated
// wisdom is persisted so repeated runs pick identical plans, which keeps
// outputs byte-for-byte reproducible across processes.
// ---------------------------------------------------------------------------

namespace fft {

namespace detail {

inline std::string wisdom_path() {
    if (const char* p = std::getenv("RNLS_WISDOM")) return p;
    if (const char* x = std::getenv("XDG_CACHE_HOME"))
        return std::string(x) + "/rnls-fftw-wisdom";
    if (const char* h = std::getenv("HOME"))
        return std::string(h) + "/.cache/rnls-fftw-wisdom";
    return {};
}

class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache c;
        return c;
    }

    fftw_plan get(const Grid& g, int sign) {
        std::lock_guard<std::mutex> lock(mu_);
        Key key{g.dim(), g.n(0), g.dim() == 2 ? g.n(1) : 1, sign};
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;

        const std::size_t total = g.size();
        fftw_complex* a = fftw_alloc_complex(total);
        fftw_complex* b = fftw_alloc_complex(total);
        fftw_plan plan = nullptr;
        if (g.dim() == 1) {
            plan = fftw_plan_dft_1d(static_cast<int>(g.n(0)), a, b, sign, FFTW_MEASURE);
        } else {
            // axis 0 is contiguous, so it is FFTW's last dimension
            plan = fftw_plan_dft_2d(static_cast<int>(g.n(1)), static_cast<int>(g.n(0)),
                                    a, b, sign, FFTW_MEASURE);
        }
        fftw_free(a);
        fftw_free(b);
        if (!plan) throw Error("fftw plan creation failed");
        plans_.emplace(key, plan);
        save_wisdom();
        return plan;
    }

private:
    PlanCache() {
        const std::string path = wisdom_path();
        if (!path.empty()) fftw_import_wisdom_from_filename(path.c_str());
    }

    void save_wisdom() {
        const std::string path = wisdom_path();
        if (path.empty()) return;
        std::error_code ec;
        std::filesystem::create_directories(std::filesystem::path(path).parent_path(), ec);
        fftw_export_wisdom_to_filename(path.c_str());
    }

    using Key = std::tuple<int, std::size_t, std::size_t, int>;
    std::map<Key, fftw_plan> plans_;
    std::mutex mu_;
};

}  // namespace detail

/// Unnormalized forward transform (out-of-place, input preserved).
inline void forward(const Grid& g, const cplx* in, cplx* out) {
    fftw_plan p = detail::PlanCache::instance().get(g, FFTW_FORWARD);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

/// Unnormalized backward transform; divide by grid.size() to invert forward().
inline void backward(const Grid& g, const cplx* in, cplx* out) {
    fftw_plan p = detail::PlanCache::instance().get(g, FFTW_BACKWARD);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

}  // namespace fft

// ---------------------------------------------------------------------------
// Field: complex samples on a grid, one per node.
// ---------------------------------------------------------------------------

class Field {
public:
    Field() = default;
    explicit Field(GridPtr grid) : grid_(std::move(grid)), v_(grid_->size(), cplx(0.0, 0.0)) {}

    const GridPtr& grid() const { return grid_; }
    std::size_t size() const { return v_.size(); }
    cplx* data() { return v_.data(); }
    const cplx* data() const { return v_.data(); }
    cplx& operator[](std::size_t i) { return v_[i]; }
    const cplx& operator[](std::size_t i) const { return v_[i]; }
    CplxVec& samples() { return v_; }
    const CplxVec& samples() const { return v_; }

    bool finite() const {
        for (const cplx& z : v_)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        return true;
    }

private:
    GridPtr grid_;
    CplxVec v_;
};

template <class Fn>
Field make_field(const GridPtr& grid, Fn&& fn) {
    Field f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = fn(grid->node(i));
    return f;
}

namespace detail {

inline void require_same_grid(const Field& a, const Field& b, const char* who) {
    if (!a.grid() || !b.grid() || !a.grid()->same_as(*b.grid()))
        throw GridMismatchError(std::string(who) + ": fields live on different grids");
}

inline void require_finite(const Field& f, const char* who) {
    if (!f.finite())
        throw InvalidFieldError(std::string(who) + ": field has non-finite samples");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Spectral operators
// ---------------------------------------------------------------------------

/// Spectral Laplacian (exact for band-limited periodic data).
inline Field apply_laplacian(const Field& f) {
    detail::require_finite(f, "apply_laplacian");
    const Grid& g = *f.grid();
    const std::size_t total = g.size();
    CplxVec hat(total);
    fft::forward(g, f.data(), hat.data());
    const double invN = 1.0 / static_cast<double>(total);
    const auto& k0 = g.freq(0);
    if (g.dim() == 1) {
        for (std::size_t i = 0; i < total; ++i) hat[i] *= -k0[i] * k0[i] * invN;
    } else {
        const std::size_t n0 = g.n(0);
        const auto& k1 = g.freq(1);
        std::size_t i = 0;
        for (std::size_t j1 = 0; j1 < g.n(1); ++j1) {
            const double k1sq = k1[j1] * k1[j1];
            for (std::size_t j0 = 0; j0 < n0; ++j0, ++i)
                hat[i] *= -(k0[j0] * k0[j0] + k1sq) * invN;
        }
    }
    Field out(f.grid());
    fft::backward(g, hat.data(), out.data());
    return out;
}

/// Spectral d/dx_axis with the Nyquist coefficient zeroed.
inline Field apply_partial(const Field& f, int axis) {
    detail::require_finite(f, "apply_partial");
    const Grid& g = *f.grid();
    if (axis < 0 || axis >= g.dim())
        throw GridMismatchError("apply_partial: axis out of range");
    const std::size_t total = g.size();
    CplxVec hat(total);
    fft::forward(g, f.data(), hat.data());
    const double invN = 1.0 / static_cast<double>(total);
    const std::size_t n0 = g.n(0);
    const auto& kd = g.freq_deriv(axis);
    for (std::size_t i = 0; i < total; ++i) {
        const std::size_t j = (axis == 0) ? i % n0 : i / n0;
        hat[i] *= cplx(0.0, kd[j] * invN);
    }
    Field out(f.grid());
    fft::backward(g, hat.data(), out.data());
    return out;
}

/// Angular momentum operator L_z = i(x2 d/dx1 - x1 d/dx2); zero field for d=1.
inline Field apply_lz(const Field& f) {
    const Grid& g = *f.grid();
    if (g.dim() == 1) return Field(f.grid());
    Field d0 = apply_partial(f, 0);
    Field d1 = apply_partial(f, 1);
    Field out(f.grid());
    const std::size_t n0 = g.n(0);
    const auto& x0 = g.coords(0);
    const auto& x1 = g.coords(1);
    std::size_t i = 0;
    for (std::size_t j1 = 0; j1 < g.n(1); ++j1) {
        const double y = x1[j1];
        for (std::size_t j0 = 0; j0 < n0; ++j0, ++i)
            out[i] = cplx(0.0, 1.0) * (y * d0[i] - x0[j0] * d1[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Discrete L2 pairing sum(f * conj(g)) * prod(h_j); conjugate-linear in g.
inline cplx inner(const Field& f, const Field& g) {
    detail::require_same_grid(f, g, "inner");
    cplx acc(0.0, 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * std::conj(g[i]);
    return acc * f.grid()->cell_volume();
}

inline double norm_l2_sq(const Field& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += std::norm(f[i]);
    return acc * f.grid()->cell_volume();
}

inline double norm_l2(const Field& f) { return std::sqrt(norm_l2_sq(f)); }

/// (sum |f|^q * prod(h_j))^(1/q), q >= 1.
inline double norm_lq(const Field& f, double q) {
    if (!(q >= 1.0)) throw ParameterDomainError("norm_lq: q must be >= 1");
    double acc = 0.0;
    if (q == 2.0) return norm_l2(f);
    const double half_q = 0.5 * q;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double r2 = std::norm(f[i]);
        if (r2 > 0.0) acc += std::pow(r2, half_q);
    }
    return std::pow(acc * f.grid()->cell_volume(), 1.0 / q);
}

/// L2 norm computed from spectral coefficients (Parseval check helper).
inline double norm_l2_spectral(const Field& f) {
    const Grid& g = *f.grid();
    CplxVec hat(g.size());
    fft::forward(g, f.data(), hat.data());
    double acc = 0.0;
    for (const cplx& z : hat) acc += std::norm(z);
    return std::sqrt(acc * g.cell_volume() / static_cast<double>(g.size()));
}

// ---------------------------------------------------------------------------
// Resampling between grids on the same box (spectral pad / truncate) and
// separable cubic interpolation at off-grid points.
// ---------------------------------------------------------------------------

/// Fourier resample onto a finer/coarser grid spanning the same box.
inline Field resample(const Field& f, const GridPtr& target) {
    const Grid& gs = *f.grid();
    const Grid& gt = *target;
    if (gs.dim() != gt.dim())
        throw GridMismatchError("resample: dimension mismatch");
    for (int a = 0; a < gs.dim(); ++a)
        if (gs.x_min(a) != gt.x_min(a) || gs.x_max(a) != gt.x_max(a))
            throw GridMismatchError("resample: boxes differ");

    CplxVec hat(gs.size());
    fft::forward(gs, f.data(), hat.data());
    CplxVec hat_t(gt.size(), cplx(0.0, 0.0));

    auto src_index = [&](int axis, std::ptrdiff_t s) -> std::ptrdiff_t {
        return s >= 0 ? s : s + static_cast<std::ptrdiff_t>(gs.n(axis));
    };
    auto tgt_index = [&](int axis, std::ptrdiff_t s) -> std::ptrdiff_t {
        return s >= 0 ? s : s + static_cast<std::ptrdiff_t>(gt.n(axis));
    };
    // keep modes |s| < min(n_src, n_tgt)/2; drop Nyquist rows on resize
    auto keep = [&](int axis) {
        const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(std::min(gs.n(axis), gt.n(axis)));
        return m / 2 - 1;
    };
    const double scale = static_cast<double>(gt.size()) / static_cast<double>(gs.size());
    if (gs.dim() == 1) {
        const std::ptrdiff_t b0 = keep(0);
        for (std::ptrdiff_t s = -b0; s <= b0; ++s)
            hat_t[tgt_index(0, s)] = hat[src_index(0, s)] * scale;
    } else {
        const std::ptrdiff_t b0 = keep(0), b1 = keep(1);
        for (std::ptrdiff_t s1 = -b1; s1 <= b1; ++s1)
            for (std::ptrdiff_t s0 = -b0; s0 <= b0; ++s0)
                hat_t[tgt_index(0, s0) + static_cast<std::ptrdiff_t>(gt.n(0)) * tgt_index(1, s1)] =
                    hat[src_index(0, s0) + static_cast<std::ptrdiff_t>(gs.n(0)) * src_index(1, s1)] * scale;
    }
    Field out(target);
    fft::backward(gt, hat_t.data(), out.data());
    const double invN = 1.0 / static_cast<double>(gt.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= invN;
    return out;
}

namespace detail {

// Catmull-Rom weights for fractional offset t in [0,1)
inline std::array<double, 4> catmull_rom(double t) {
    const double t2 = t * t, t3 = t2 * t;
    return {-0.5 * t3 + t2 - 0.5 * t,
            1.5 * t3 - 2.5 * t2 + 1.0,
            -1.5 * t3 + 2.0 * t2 + 0.5 * t,
            0.5 * t3 - 0.5 * t2};
}

}  // namespace detail

/// Cubic (Catmull-Rom) interpolation of f at an arbitrary point, periodic wrap.
inline cplx interpolate_cubic(const Field& f, const std::array<double, 2>& x) {
    const Grid& g = *f.grid();
    const int d = g.dim();
    std::array<std::ptrdiff_t, 2> base{0, 0};
    std::array<std::array<double, 4>, 2> w{};
    for (int a = 0; a < d; ++a) {
        const double u = (x[a] - g.x_min(a)) / g.spacing(a);
        const double fl = std::floor(u);
        base[a] = static_cast<std::ptrdiff_t>(fl);
        w[a] = detail::catmull_rom(u - fl);
    }
    auto wrap = [&](int axis, std::ptrdiff_t j) -> std::size_t {
        const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(g.n(axis));
        std::ptrdiff_t m = j % n;
        if (m < 0) m += n;
        return static_cast<std::size_t>(m);
    };
    if (d == 1) {
        cplx acc(0.0, 0.0);
        for (int i = 0; i < 4; ++i)
            acc += w[0][i] * f[wrap(0, base[0] - 1 + i)];
        return acc;
    }
    const std::size_t n0 = g.n(0);
    cplx acc(0.0, 0.0);
    for (int j = 0; j < 4; ++j) {
        const std::size_t row = wrap(1, base[1] - 1 + j) * n0;
        cplx rowacc(0.0, 0.0);
        for (int i = 0; i < 4; ++i)
            rowacc += w[0][i] * f[row + wrap(0, base[0] - 1 + i)];
        acc += w[1][j] * rowacc;
    }
    return acc;
}

}  // namespace rnls
