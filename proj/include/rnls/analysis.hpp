#pragma once

#include <functional>
#include <optional>

#include "rnls/solver.hpp"

namespace rnls {

// ---------------------------------------------------------------------------
// Experiments over solver outputs: parameter sweeps, asymptotic-rate fits,
// Thomas-Fermi comparison, vortex counting, critical-rotation bisection, the
// action<->energy equivalence loop, the non-equivalence mass scan, the dual
// value, and derivative checks.
// ---------------------------------------------------------------------------

struct SweepRecord {
    double omega = 0.0;
    double Omega = 0.0;
    double mass = 0.0;
    double action = 0.0;
    double energy = 0.0;
    double mu = 0.0;
    double lz_expect = 0.0;
    int n_vortices = 0;
    bool converged = false;
    long iters = 0;
    double residual = 0.0;
    std::string init_used;
};

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    std::size_t n_points = 0;
};

struct JumpReport {
    double omega_critical = 0.0;
    double mass_below = 0.0;  // mass on the omega < omega_critical side
    double mass_above = 0.0;  // mass on the omega > omega_critical side
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    double bracket_width = 0.0;
    double forbidden_lo = 0.0;  // = mass_above (smaller)
    double forbidden_hi = 0.0;  // = mass_below (larger)
};

struct LoopReport {
    double omega = 0.0;
    double Omega = 0.0;
    double action_gs = 0.0;  // S_g from the action ground state
    double mass = 0.0;       // its mass m
    double energy_gs = 0.0;  // E_g from the energy ground state at m
    double mu_g = 0.0;       // chemical potential of the energy ground state
    double e_rel_omega = 0.0;
    double e_rel_S = 0.0;
    bool converged = false;
    int n_vortices_action = 0;
    int n_vortices_energy = 0;
};

struct OmegaCResult {
    double lo = 0.0, hi = 0.0;        // primary (vortex-count) bracket
    double cross_lo = 0.0, cross_hi = 0.0;  // action-comparison bracket
    bool ambiguous = false;           // the two classifiers disagreed somewhere
    double action_reference = 0.0;    // S_g(0, omega)
};

struct DualValue {
    double value = 0.0;
    double omega_at = 0.0;
    bool at_boundary = false;
};

// ---------------------------------------------------------------------------
// Vortex counting by plaquette phase winding
// ---------------------------------------------------------------------------

struct VortexSet {
    int count = 0;
    std::vector<std::array<double, 2>> locations;
};

namespace detail {

// convex hull (monotone chain) of a point set, CCW
inline std::vector<std::array<double, 2>> convex_hull(std::vector<std::array<double, 2>> pts) {
    if (pts.size() < 3) return pts;
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    auto cross = [](const std::array<double, 2>& o, const std::array<double, 2>& a,
                    const std::array<double, 2>& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<std::array<double, 2>> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = pts.size(); i-- > 1;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
        hull[k++] = pts[i - 1];
    }
    hull.resize(k - 1);
    return hull;
}

inline bool inside_hull(const std::vector<std::array<double, 2>>& hull,
                        const std::array<double, 2>& p) {
    if (hull.size() < 3) return false;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const auto& a = hull[i];
        const auto& b = hull[(i + 1) % hull.size()];
        if ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) < 0) return false;
    }
    return true;
}

}  // namespace detail

/// Count quantized vortices: plaquettes with |phase winding| >= 1 inside the
/// convex hull of the bulk {|phi|^2 > 1e-6 max}, ignoring plaquettes whose
/// corners all lie below density_floor_frac * max|phi|^2 (ghost filter);
/// adjacent hits merge into single vortices. Returns 0 for d = 1.
inline VortexSet count_vortices(const Field& phi, double density_floor_frac = 1e-3) {
    VortexSet out;
    const Grid& g = *phi.grid();
    if (g.dim() != 2) return out;
    const std::size_t n0 = g.n(0), n1 = g.n(1);

    double maxd = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) maxd = std::max(maxd, std::norm(phi[i]));
    if (maxd <= 0.0) return out;
    const double bulk_floor = 1e-6 * maxd;
    const double corner_floor = density_floor_frac * maxd;

    std::vector<std::array<double, 2>> bulk_pts;
    for (std::size_t i = 0; i < phi.size(); ++i)
        if (std::norm(phi[i]) > bulk_floor) bulk_pts.push_back(g.node(i));
    const auto hull = detail::convex_hull(std::move(bulk_pts));

    const double twopi = 2.0 * std::numbers::pi;
    std::vector<int> winding((n0 - 1) * (n1 - 1), 0);
    auto pidx = [n0](std::size_t i0, std::size_t i1) { return i1 * (n0 - 1) + i0; };
    for (std::size_t i1 = 0; i1 + 1 < n1; ++i1) {
        for (std::size_t i0 = 0; i0 + 1 < n0; ++i0) {
            const cplx a = phi[i1 * n0 + i0];
            const cplx b = phi[i1 * n0 + i0 + 1];
            const cplx c = phi[(i1 + 1) * n0 + i0 + 1];
            const cplx d = phi[(i1 + 1) * n0 + i0];
            const double da = std::norm(a), db = std::norm(b), dc = std::norm(c),
                         dd = std::norm(d);
            if (std::max(std::max(da, db), std::max(dc, dd)) < corner_floor) continue;
            if (da == 0.0 || db == 0.0 || dc == 0.0 || dd == 0.0) continue;
            const double s = std::arg(b * std::conj(a)) + std::arg(c * std::conj(b)) +
                             std::arg(d * std::conj(c)) + std::arg(a * std::conj(d));
            const int w = static_cast<int>(std::lround(s / twopi));
            if (w == 0) continue;
            const std::array<double, 2> center{g.coords(0)[i0] + 0.5 * g.spacing(0),
                                               g.coords(1)[i1] + 0.5 * g.spacing(1)};
            if (!detail::inside_hull(hull, center)) continue;
            winding[pidx(i0, i1)] = w;
        }
    }

    // merge 8-connected hits
    std::vector<char> seen(winding.size(), 0);
    for (std::size_t i1 = 0; i1 + 1 < n1; ++i1) {
        for (std::size_t i0 = 0; i0 + 1 < n0; ++i0) {
            const std::size_t start = pidx(i0, i1);
            if (winding[start] == 0 || seen[start]) continue;
            // flood fill
            std::vector<std::pair<std::size_t, std::size_t>> stack{{i0, i1}};
            seen[start] = 1;
            long net = 0;
            double cx = 0.0, cy = 0.0;
            std::size_t cnt = 0;
            while (!stack.empty()) {
                auto [a0, a1] = stack.back();
                stack.pop_back();
                net += winding[pidx(a0, a1)];
                cx += g.coords(0)[a0] + 0.5 * g.spacing(0);
                cy += g.coords(1)[a1] + 0.5 * g.spacing(1);
                ++cnt;
                for (int d1 = -1; d1 <= 1; ++d1) {
                    for (int d0 = -1; d0 <= 1; ++d0) {
                        if (d0 == 0 && d1 == 0) continue;
                        const long b0 = static_cast<long>(a0) + d0;
                        const long b1 = static_cast<long>(a1) + d1;
                        if (b0 < 0 || b1 < 0 || b0 + 1 >= static_cast<long>(n0) ||
                            b1 + 1 >= static_cast<long>(n1))
                            continue;
                        const std::size_t q = pidx(static_cast<std::size_t>(b0),
                                                   static_cast<std::size_t>(b1));
                        if (winding[q] != 0 && !seen[q]) {
                            seen[q] = 1;
                            stack.emplace_back(static_cast<std::size_t>(b0),
                                               static_cast<std::size_t>(b1));
                        }
                    }
                }
            }
            const int nv = std::max(1, static_cast<int>(std::labs(net)));
            out.count += nv;
            out.locations.push_back({cx / static_cast<double>(cnt), cy / static_cast<double>(cnt)});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepOptions {
    bool warm_start = false;
    bool warm_rescale = false;    // scale the warm start by the near-threshold amplitude law
    bool multistart_each = false; // race the default multistart against the warm start
    bool fill_vortices = true;
    double vortex_floor = 1e-3;
};

namespace detail {

inline SweepRecord record_from_result(const GroundStateResult& r, const ModelParams& prm,
                                      const SweepOptions& opt) {
    SweepRecord rec;
    rec.omega = prm.omega;
    rec.Omega = prm.Omega;
    rec.mass = r.diags.mass;
    rec.action = r.diags.action;
    rec.energy = r.diags.energy;
    rec.mu = r.diags.mu;
    rec.lz_expect = r.diags.lz_expect;
    rec.converged = r.converged;
    rec.iters = r.iters;
    rec.residual = r.diags.pde_residual_l2;
    rec.init_used = r.init_used;
    if (opt.fill_vortices) rec.n_vortices = count_vortices(r.field, opt.vortex_floor).count;
    return rec;
}

inline SweepRecord failed_record(const ModelParams& prm, const std::string& why) {
    SweepRecord rec;
    rec.omega = prm.omega;
    rec.Omega = prm.Omega;
    rec.mass = rec.action = rec.energy = rec.mu = rec.lz_expect =
        std::numeric_limits<double>::quiet_NaN();
    rec.converged = false;
    rec.init_used = "error:" + why;
    return rec;
}

}  // namespace detail

/// One action-ground-state solve per omega, records emitted in input order.
/// Per-record solver failures are recorded, not thrown. Optionally each solve
/// is warm-started from the previous state (with amplitude rescaling by the
/// near-threshold law when warm_rescale is set); with multistart_each the warm
/// start is raced against the default multistart set.
inline std::vector<SweepRecord> sweep_omega(const ModelParams& base,
                                            const std::vector<double>& omegas,
                                            const GridPtr& grid, const SolverConfig& cfg,
                                            const SweepOptions& opt = {},
                                            std::vector<GroundStateResult>* keep_results = nullptr) {
    std::vector<SweepRecord> records;
    records.reserve(omegas.size());
    SolverConfig c = cfg;
    if (!std::isfinite(c.lambda0_hint))
        c.lambda0_hint = resolve_lambda0(base.potential, base.Omega, grid, cfg);

    std::shared_ptr<const Field> prev;
    double prev_omega = 0.0;
    const bool sequential = opt.warm_start || opt.multistart_each;

    if (!sequential) {
        // independent solves; order of results stays deterministic
        std::vector<std::optional<GroundStateResult>> results(omegas.size());
        std::vector<std::string> errors(omegas.size());
        run_indexed_jobs(omegas.size(), resolve_workers(cfg.workers), [&](std::size_t i) {
            ModelParams prm = base;
            prm.omega = omegas[i];
            SolverConfig ci = c;
            ci.workers = 1;
            try {
                results[i] = action_ground_state(prm, grid, ci);
            } catch (const Error& e) {
                errors[i] = e.what();
            }
        });
        for (std::size_t i = 0; i < omegas.size(); ++i) {
            ModelParams prm = base;
            prm.omega = omegas[i];
            if (results[i]) {
                records.push_back(detail::record_from_result(*results[i], prm, opt));
                if (keep_results) keep_results->push_back(std::move(*results[i]));
            } else {
                records.push_back(detail::failed_record(prm, errors[i]));
                if (keep_results) keep_results->push_back(GroundStateResult{});
            }
        }
        return records;
    }

    for (std::size_t i = 0; i < omegas.size(); ++i) {
        ModelParams prm = base;
        prm.omega = omegas[i];
        SolverConfig ci = c;
        if (prev) {
            InitSpec warm = InitSpec::from_field(prev);
            if (opt.warm_rescale) {
                const double g_prev = std::abs(prev_omega + c.lambda0_hint);
                const double g_now = std::abs(prm.omega + c.lambda0_hint);
                if (g_prev > 0.0 && g_now > 0.0) {
                    Field scaled = *prev;
                    const double s = std::pow(g_now / g_prev, 1.0 / (prm.p - 1.0));
                    for (std::size_t k = 0; k < scaled.size(); ++k) scaled[k] *= s;
                    warm = InitSpec::from_field(std::make_shared<Field>(std::move(scaled)));
                }
            }
            if (opt.multistart_each) {
                auto starts = detail::expand_starts(InitSpec{}, prm, grid->dim());
                starts.insert(starts.begin(), warm);
                ci.init = InitSpec::multistart(std::move(starts));
            } else {
                ci.init = warm;
            }
        } else if (opt.multistart_each) {
            ci.init = InitSpec{};  // auto set
        }
        try {
            GroundStateResult r = action_ground_state(prm, grid, ci);
            prev = std::make_shared<Field>(r.field);
            prev_omega = prm.omega;
            records.push_back(detail::record_from_result(r, prm, opt));
            if (keep_results) keep_results->push_back(std::move(r));
        } catch (const Error& e) {
            records.push_back(detail::failed_record(prm, e.what()));
            if (keep_results) keep_results->push_back(GroundStateResult{});
        }
    }
    return records;
}

// ---------------------------------------------------------------------------
// Rate fits
// ---------------------------------------------------------------------------

/// Least-squares slope of log(y_transform) vs log(x_transform) over records
/// whose transformed abscissa lies in [window_lo, window_hi].
inline RateFit fit_rate(const std::vector<SweepRecord>& records,
                        const std::function<double(const SweepRecord&)>& x_transform,
                        const std::function<double(const SweepRecord&)>& y_transform,
                        double window_lo, double window_hi) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : records) {
        if (!r.converged) continue;
        const double x = x_transform(r), y = y_transform(r);
        if (!std::isfinite(x) || !std::isfinite(y) || x <= 0.0 || y <= 0.0) continue;
        if (x < window_lo || x > window_hi) continue;
        pts.emplace_back(std::log(x), std::log(y));
    }
    if (pts.size() < 3) throw ParameterDomainError("fit_rate: fewer than 3 points in window");
    double sx = 0, sy = 0;
    for (auto& [x, y] : pts) {
        sx += x;
        sy += y;
    }
    const double n = static_cast<double>(pts.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (sxx <= 0.0) throw ParameterDomainError("fit_rate: degenerate abscissa");
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    fit.window_lo = window_lo;
    fit.window_hi = window_hi;
    fit.n_points = pts.size();
    return fit;
}

// ---------------------------------------------------------------------------
// Thomas-Fermi limit
// ---------------------------------------------------------------------------

/// TF limit profile [(1 - V)_+ / beta]^{1/(p-1)} sampled on the given grid.
inline Field thomas_fermi_profile(const ModelParams& prm, const GridPtr& grid) {
    RealVec V = potential_values(prm.potential, *grid);
    const double expo = 1.0 / (prm.p - 1.0);
    const double beta = prm.beta > 0.0 ? prm.beta : 1.0;
    Field f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double t = 1.0 - V[i];
        f[i] = cplx(t > 0.0 ? std::pow(t / beta, expo) : 0.0, 0.0);
    }
    return f;
}

/// Build the rescaled comparison grid: the solve box shrunk by 1/sqrt|omega|.
inline GridPtr tf_rescaled_grid(const GridPtr& grid, double omega) {
    const double s = 1.0 / std::sqrt(std::abs(omega));
    std::vector<AxisSpec> axes;
    for (int a = 0; a < grid->dim(); ++a)
        axes.push_back({grid->x_min(a) * s, grid->x_max(a) * s, grid->n(a)});
    return Grid::make(axes);
}

/// Relative L2 distance between the rescaled computed state and the TF limit:
/// phi(sqrt|omega| x) = |omega|^{1/(p-1)} phi_tilde(x), cubic interpolation.
inline double tf_compare(const GroundStateResult& result, const ModelParams& prm) {
    const double aomega = std::abs(prm.omega);
    const GridPtr tf_grid = tf_rescaled_grid(result.field.grid(), prm.omega);

    // the TF support {V <= 1} must fit inside the rescaled box
    RealVec V = potential_values(prm.potential, *tf_grid);
    for (int a = 0; a < tf_grid->dim(); ++a) {
        std::array<double, 2> edge{0.0, 0.0};
        edge[a] = std::max(std::abs(tf_grid->x_min(a)), std::abs(tf_grid->x_max(a)));
        if (prm.potential(edge, tf_grid->dim()) <= 1.0)
            throw ParameterDomainError(
                "tf_compare: |omega| too small, TF support exceeds the rescaled box");
    }

    Field tf = thomas_fermi_profile(prm, tf_grid);
    const double scale = std::pow(aomega, -1.0 / (prm.p - 1.0));
    const double root = std::sqrt(aomega);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < tf.size(); ++i) {
        const auto x = tf_grid->node(i);
        const std::array<double, 2> y{root * x[0], root * x[1]};
        const double rescaled = scale * std::abs(interpolate_cubic(result.field, y));
        const double diff = rescaled - tf[i].real();
        num += diff * diff;
        den += tf[i].real() * tf[i].real();
    }
    if (den <= 0.0) throw ParameterDomainError("tf_compare: empty TF profile");
    return std::sqrt(num / den);
}

// ---------------------------------------------------------------------------
// Critical angular velocity
// ---------------------------------------------------------------------------

struct OmegaCOptions {
    double omega_hi = 0.95;        // upper end of the initial bracket
    std::vector<InitSpec> probe_starts{InitSpec::gaussian(1.0), InitSpec::vortex(1, 1.0),
                                       InitSpec::gaussian(1.0).with_noise(0.01)};
};

/// Bisection for the rotation speed at which the action ground state first
/// carries a vortex. Primary classifier: vortex count of the multistart
/// minimizer; cross-check: S_g(Omega, omega) < S_g(0, omega) - 1e-8 |S_g(0, omega)|.
/// Disagreement is surfaced via `ambiguous` with both brackets reported.
inline OmegaCResult critical_omega_c(double omega, const GridPtr& grid, const SolverConfig& cfg,
                                     double bracket_tol, const OmegaCOptions& opt = {}) {
    if (!(bracket_tol > 0.0))
        throw ParameterDomainError("critical_omega_c: bracket_tol must be > 0");
    ModelParams base;
    base.omega = omega;

    // reference non-rotating action
    ModelParams p0 = base;
    p0.Omega = 0.0;
    SolverConfig c0 = cfg;
    c0.init = std::abs(omega) >= 5.0 ? InitSpec::thomas_fermi() : InitSpec::gaussian(1.0);
    c0.lambda0_hint = resolve_lambda0(p0.potential, 0.0, grid, cfg);
    const GroundStateResult ref = action_ground_state(p0, grid, c0);
    const double s_ref = ref.diags.action;

    struct Probe {
        double Omega;
        bool vortex;
        bool action_lower;
    };
    std::vector<Probe> probes;
    auto classify = [&](double Om) {
        ModelParams prm = base;
        prm.Omega = Om;
        SolverConfig ci = cfg;
        ci.init = InitSpec::multistart(opt.probe_starts);
        ci.lambda0_hint = resolve_lambda0(prm.potential, Om, grid, cfg);
        GroundStateResult r = action_ground_state(prm, grid, ci);
        const int nv = count_vortices(r.field).count;
        const bool lower = r.diags.action < s_ref - 1e-8 * std::abs(s_ref);
        probes.push_back({Om, nv >= 1, lower});
        return nv >= 1;
    };

    double lo = 0.0, hi = opt.omega_hi;  // Omega = 0 is vortex-free by symmetry
    if (!classify(hi))
        throw ParameterDomainError(
            "critical_omega_c: no vortex at the upper bracket endpoint; raise omega_hi");
    while (hi - lo > bracket_tol) {
        const double mid = 0.5 * (lo + hi);
        if (classify(mid))
            hi = mid;
        else
            lo = mid;
    }

    OmegaCResult out;
    out.lo = lo;
    out.hi = hi;
    out.action_reference = s_ref;
    // cross-check bracket from the same probes
    double clo = 0.0, chi = opt.omega_hi;
    bool disagree = false;
    for (const auto& pb : probes) {
        if (pb.vortex != pb.action_lower) disagree = true;
        if (pb.action_lower)
            chi = std::min(chi, pb.Omega);
        else
            clo = std::max(clo, pb.Omega);
    }
    out.cross_lo = clo;
    out.cross_hi = chi;
    out.ambiguous = disagree || clo > chi;
    return out;
}

// ---------------------------------------------------------------------------
// Equivalence loop and non-equivalence scan
// ---------------------------------------------------------------------------

struct LoopOptions {
    bool warm_energy_from_action = true;  // start the energy flow at the action minimizer
};

/// action GS -> m -> energy GS at m -> mu_g; loop closure errors per the
/// e_rel_omega / e_rel_S definitions.
inline LoopReport equivalence_loop(double omega, double Omega, const GridPtr& grid,
                                   const SolverConfig& cfg, const ModelParams& model_base = {},
                                   const LoopOptions& opt = {},
                                   GroundStateResult* action_out = nullptr,
                                   GroundStateResult* energy_out = nullptr) {
    ModelParams prm = model_base;
    prm.omega = omega;
    prm.Omega = Omega;
    GroundStateResult ags = action_ground_state(prm, grid, cfg);
    const double m = ags.diags.mass;
    const double s_g = ags.diags.action;

    SolverConfig ce = cfg;
    if (opt.warm_energy_from_action)
        ce.init = InitSpec::from_field(std::make_shared<Field>(ags.field));
    GroundStateResult egs = energy_ground_state(m, prm, grid, ce);

    LoopReport rep;
    rep.omega = omega;
    rep.Omega = Omega;
    rep.action_gs = s_g;
    rep.mass = m;
    rep.energy_gs = egs.diags.energy;
    rep.mu_g = egs.diags.mu;
    rep.e_rel_omega = std::abs(omega + rep.mu_g) / std::abs(omega);
    rep.e_rel_S = std::abs(s_g - (rep.energy_gs + m * omega)) / std::abs(s_g);
    rep.converged = ags.converged && egs.converged;
    rep.n_vortices_action = count_vortices(ags.field).count;
    rep.n_vortices_energy = count_vortices(egs.field).count;
    if (action_out) *action_out = std::move(ags);
    if (energy_out) *energy_out = std::move(egs);
    return rep;
}

struct ScanOptions {
    double mesh_step = 0.0;  // 0 -> 20x resolution
    int median_window = 7;   // one-sided window for the local median increment
    double jump_factor = 5.0;
};

namespace detail {

inline double local_median_step(const std::vector<double>& dm, std::size_t i, int window) {
    std::vector<double> vals;
    const long lo = std::max<long>(0, static_cast<long>(i) - window);
    const long hi = std::min<long>(static_cast<long>(dm.size()) - 1, static_cast<long>(i) + window);
    for (long j = lo; j <= hi; ++j)
        if (j != static_cast<long>(i)) vals.push_back(dm[j]);
    if (vals.empty()) return 0.0;
    std::sort(vals.begin(), vals.end());
    return vals[vals.size() / 2];
}

}  // namespace detail

/// Fine omega-mesh sweep with full multistart at every point; mass gaps larger
/// than jump_factor times the local median increment are refined by bisection
/// to `resolution` and reported as forbidden mass intervals.
inline std::vector<JumpReport> nonequivalence_scan(double Omega,
                                                   std::pair<double, double> omega_range,
                                                   double resolution, const GridPtr& grid,
                                                   const SolverConfig& cfg,
                                                   const ModelParams& model_base = {},
                                                   const ScanOptions& opt = {},
                                                   std::vector<SweepRecord>* mesh_out = nullptr) {
    if (!(resolution > 0.0))
        throw ParameterDomainError("nonequivalence_scan: resolution must be > 0");
    const double lo = std::min(omega_range.first, omega_range.second);
    const double hi = std::max(omega_range.first, omega_range.second);
    const double step = opt.mesh_step > 0.0 ? opt.mesh_step : 20.0 * resolution;

    ModelParams base = model_base;
    base.Omega = Omega;
    std::vector<double> mesh;
    for (double w = lo; w <= hi + 1e-12; w += step) mesh.push_back(std::min(w, hi));
    if (mesh.back() < hi - 1e-12) mesh.push_back(hi);

    SweepOptions sopt;
    sopt.warm_start = true;
    sopt.multistart_each = Omega > 0.0;
    std::vector<SweepRecord> recs = sweep_omega(base, mesh, grid, cfg, sopt);
    if (mesh_out) *mesh_out = recs;

    // adjacent mass increments over converged pairs
    std::vector<double> dm(recs.size() > 0 ? recs.size() - 1 : 0, 0.0);
    for (std::size_t i = 0; i + 1 < recs.size(); ++i)
        dm[i] = (recs[i].converged && recs[i + 1].converged)
                    ? std::abs(recs[i + 1].mass - recs[i].mass)
                    : 0.0;

    std::vector<std::pair<std::size_t, std::size_t>> groups;  // [i, j] trigger runs
    for (std::size_t i = 0; i < dm.size(); ++i) {
        const double med = detail::local_median_step(dm, i, opt.median_window);
        if (med > 0.0 && dm[i] > opt.jump_factor * med) {
            if (!groups.empty() && groups.back().second + 1 == i)
                groups.back().second = i;
            else
                groups.emplace_back(i, i);
        }
    }

    SolverConfig cp = cfg;
    cp.init = InitSpec{};  // default multistart during refinement
    auto solve_mass = [&](double w) {
        ModelParams prm = base;
        prm.omega = w;
        GroundStateResult r = action_ground_state(prm, grid, cp);
        return r.diags.mass;
    };

    std::vector<JumpReport> reports;
    for (auto [gi, gj] : groups) {
        double wl = recs[gi].omega;          // mass_below side (omega < critical)
        double wh = recs[gj + 1].omega;      // mass_above side
        double ml = recs[gi].mass;
        double mh = recs[gj + 1].mass;
        while (wh - wl > resolution) {
            const double wm = 0.5 * (wl + wh);
            const double mm = solve_mass(wm);
            // assign the midpoint to the branch whose mass it matches
            if (std::abs(mm - ml) < std::abs(mm - mh)) {
                wl = wm;
                ml = mm;
            } else {
                wh = wm;
                mh = mm;
            }
        }
        JumpReport rep;
        rep.bracket_lo = wl;
        rep.bracket_hi = wh;
        rep.bracket_width = wh - wl;
        rep.omega_critical = 0.5 * (wl + wh);
        rep.mass_below = ml;  // larger mass, omega below the critical value
        rep.mass_above = mh;
        rep.forbidden_lo = std::min(ml, mh);
        rep.forbidden_hi = std::max(ml, mh);
        reports.push_back(rep);
    }
    return reports;
}

// ---------------------------------------------------------------------------
// Derivative identity and dual value
// ---------------------------------------------------------------------------

/// Max relative deviation of the central difference of S_g(omega) from the
/// recorded mass, skipping triples adjacent to detected jumps.
inline double dSg_domega_check(const std::vector<SweepRecord>& records,
                               const ScanOptions& opt = {}) {
    if (records.size() < 3)
        throw ParameterDomainError("dSg_domega_check: need at least 3 records");
    std::vector<double> dm(records.size() - 1, 0.0);
    for (std::size_t i = 0; i + 1 < records.size(); ++i)
        dm[i] = (records[i].converged && records[i + 1].converged)
                    ? std::abs(records[i + 1].mass - records[i].mass)
                    : 0.0;
    std::vector<char> jump_pair(dm.size(), 0);
    for (std::size_t i = 0; i < dm.size(); ++i) {
        const double med = detail::local_median_step(dm, i, opt.median_window);
        if (med > 0.0 && dm[i] > opt.jump_factor * med) jump_pair[i] = 1;
    }
    double worst = 0.0;
    bool any = false;
    for (std::size_t i = 1; i + 1 < records.size(); ++i) {
        const auto& a = records[i - 1];
        const auto& b = records[i];
        const auto& c = records[i + 1];
        if (!a.converged || !b.converged || !c.converged) continue;
        if (jump_pair[i - 1] || jump_pair[i]) continue;
        const double fd = (c.action - a.action) / (c.omega - a.omega);
        const double dev = std::abs(fd - b.mass) / std::max(std::abs(b.mass), 1e-300);
        worst = std::max(worst, dev);
        any = true;
    }
    if (!any) throw ParameterDomainError("dSg_domega_check: no admissible triples");
    return worst;
}

/// Dual value sup_omega [S_g(omega) - omega m] over the swept grid with
/// parabolic refinement; flagged when the supremum sits at the range boundary.
inline DualValue dual_value(double m, const std::vector<SweepRecord>& records) {
    std::vector<std::pair<double, double>> pts;  // (omega, S_g - omega m)
    for (const auto& r : records)
        if (r.converged) pts.emplace_back(r.omega, r.action - r.omega * m);
    if (pts.size() < 3) throw ParameterDomainError("dual_value: need at least 3 converged records");
    std::sort(pts.begin(), pts.end());
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i].second > pts[best].second) best = i;

    DualValue out;
    out.omega_at = pts[best].first;
    out.value = pts[best].second;
    if (best == 0 || best + 1 == pts.size()) {
        out.at_boundary = true;
        return out;
    }
    // parabolic vertex through the three bracketing points
    const auto [x0, y0] = pts[best - 1];
    const auto [x1, y1] = pts[best];
    const auto [x2, y2] = pts[best + 1];
    const double d0 = (y1 - y0) / (x1 - x0);
    const double d1 = (y2 - y1) / (x2 - x1);
    const double curv = (d1 - d0) / (x2 - x0);
    if (curv < 0.0) {
        const double xv = 0.5 * (x0 + x1 - d0 / curv);
        if (xv > x0 && xv < x2) {
            const double yv = y1 + curv * (xv - x1) * (xv - x1) +
                              (d0 + curv * (x1 - x0)) * (xv - x1);
            if (yv > out.value) {
                out.value = yv;
                out.omega_at = xv;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Distance to the linear ground mode
// ---------------------------------------------------------------------------

namespace detail {

inline double x_norm_sq_of(const Field& f, const RealVec& V) {
    const Grid& g = *f.grid();
    CplxVec hat(g.size());
    fft::forward(g, f.data(), hat.data());
    const auto& k0 = g.freq(0);
    double gsq = 0.0;
    if (g.dim() == 1) {
        for (std::size_t i = 0; i < g.size(); ++i) gsq += k0[i] * k0[i] * std::norm(hat[i]);
    } else {
        const std::size_t n0 = g.n(0);
        const auto& k1 = g.freq(1);
        std::size_t i = 0;
        for (std::size_t j1 = 0; j1 < g.n(1); ++j1) {
            const double k1sq = k1[j1] * k1[j1];
            for (std::size_t j0 = 0; j0 < n0; ++j0, ++i)
                gsq += (k0[j0] * k0[j0] + k1sq) * std::norm(hat[i]);
        }
    }
    gsq *= g.cell_volume() / static_cast<double>(g.size());
    double pot1 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) pot1 += (1.0 + V[i]) * std::norm(f[i]);
    return gsq + pot1 * g.cell_volume();
}

inline cplx x_inner_of(const Field& f, const Field& h, const RealVec& V) {
    // grad pairing via partials
    cplx acc(0.0, 0.0);
    for (int a = 0; a < f.grid()->dim(); ++a) {
        Field df = apply_partial(f, a);
        Field dh = apply_partial(h, a);
        acc += inner(df, dh);
    }
    const double cv = f.grid()->cell_volume();
    cplx pot(0.0, 0.0);
    for (std::size_t i = 0; i < f.size(); ++i)
        pot += (1.0 + V[i]) * f[i] * std::conj(h[i]);
    return acc + pot * cv;
}

}  // namespace detail

/// min over a constant phase of || phi/|phi|_2 - e^{i theta} mode ||_X, the
/// phase minimized in closed form. The mode must be L2-normalized.
inline double distance_to_linear_mode(const GroundStateResult& result, const Field& mode,
                                      const PotentialSpec& potential) {
    detail::require_same_grid(result.field, mode, "distance_to_linear_mode");
    if (std::abs(norm_l2(mode) - 1.0) > 1e-8)
        throw ParameterDomainError("distance_to_linear_mode: mode is not L2-normalized");
    const Grid& g = *mode.grid();
    RealVec V = potential_values(potential, g);
    Field hat = result.field;
    const double nrm = norm_l2(hat);
    if (!(nrm > 0.0)) throw InvalidFieldError("distance_to_linear_mode: zero state");
    for (std::size_t i = 0; i < hat.size(); ++i) hat[i] /= nrm;

    const double a = detail::x_norm_sq_of(hat, V);
    const double b = detail::x_norm_sq_of(mode, V);
    const cplx ip = detail::x_inner_of(hat, mode, V);
    const double d2 = a + b - 2.0 * std::abs(ip);
    return std::sqrt(std::max(0.0, d2));
}

}  // namespace rnls
