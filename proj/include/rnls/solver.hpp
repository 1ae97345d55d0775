#pragma once

#include <algorithm>
#include <limits>
#include <random>
#include <sstream>

#include "rnls/model.hpp"
#include "rnls/parallel.hpp"

namespace rnls {

// ---------------------------------------------------------------------------
// Gradient-flow minimizers with a stabilized semi-implicit Fourier
// pseudospectral step:
//
//   phi_hat <- [ FFT(phi + tau * g) ] / (1 + tau (|k|^2/2 + alpha)),
//   g = alpha*phi - (V + omega_eff)*phi - beta |phi|^{p-1} phi + Omega Lz phi,
//
// i.e. Laplacian and stabilizer implicit, everything else explicit. The same
// step drives three flows: the unconstrained action flow, the mass-normalized
// energy flow, and the linear (beta = 0) Rayleigh-quotient flow.
// ---------------------------------------------------------------------------

struct InitSpec {
    enum class Kind { auto_default, gaussian, vortex, thomas_fermi, file, field, multistart };

    Kind kind = Kind::auto_default;
    double width = 1.0;
    double amplitude = 1.0;
    double noise_frac = 0.0;
    int winding = 0;
    std::string path;
    std::shared_ptr<const Field> warm;
    std::vector<InitSpec> starts;

    static InitSpec gaussian(double width = 1.0, double amplitude = 1.0) {
        InitSpec s;
        s.kind = Kind::gaussian;
        s.width = width;
        s.amplitude = amplitude;
        return s;
    }
    static InitSpec vortex(int winding, double width = 1.0, double amplitude = 1.0) {
        InitSpec s;
        s.kind = Kind::vortex;
        s.winding = winding;
        s.width = width;
        s.amplitude = amplitude;
        return s;
    }
    static InitSpec thomas_fermi() {
        InitSpec s;
        s.kind = Kind::thomas_fermi;
        return s;
    }
    static InitSpec from_file(std::string path) {
        InitSpec s;
        s.kind = Kind::file;
        s.path = std::move(path);
        return s;
    }
    static InitSpec from_field(std::shared_ptr<const Field> f) {
        InitSpec s;
        s.kind = Kind::field;
        s.warm = std::move(f);
        return s;
    }
    static InitSpec multistart(std::vector<InitSpec> list) {
        InitSpec s;
        s.kind = Kind::multistart;
        s.starts = std::move(list);
        return s;
    }
    InitSpec with_noise(double frac) const {
        InitSpec s = *this;
        s.noise_frac = frac;
        return s;
    }

    void validate() const {
        if (!(width > 0.0)) throw ConfigError("init: width must be > 0");
        if (!(amplitude > 0.0)) throw ConfigError("init: amplitude must be > 0");
        if (winding < 0) throw ConfigError("init: winding must be >= 0");
        if (noise_frac < 0.0) throw ConfigError("init: noise fraction must be >= 0");
        for (const auto& s : starts) s.validate();
    }

    std::string label() const {
        std::ostringstream os;
        switch (kind) {
            case Kind::auto_default: os << "auto"; break;
            case Kind::gaussian: os << "gaussian(" << width << ")"; break;
            case Kind::vortex: os << "vortex(" << winding << ";" << width << ")"; break;
            case Kind::thomas_fermi: os << "thomas_fermi"; break;
            case Kind::file: os << "file"; break;
            case Kind::field: os << "warm"; break;
            case Kind::multistart: {
                os << "multistart[";
                for (std::size_t i = 0; i < starts.size(); ++i)
                    os << (i ? ";" : "") << starts[i].label();
                os << "]";
                break;
            }
        }
        if (noise_frac > 0.0) os << "+noise(" << noise_frac << ")";
        return os.str();
    }
};

struct SolverConfig {
    double tau = 0.0;  // 0 -> per-flow default (0.01 action, 0.05 energy/linear)
    bool stab_auto = true;
    double stab_alpha = 0.0;  // used when !stab_auto
    double tol_step = 1e-10;
    double tol_residual = 1e-8;
    double tol_lambda = 1e-9;  // eigenvalue stagnation window (linear flow)
    long max_iters = 100000;
    InitSpec init;
    std::uint64_t seed = 12345;
    int residual_check_interval = 25;
    int tau_retries = 6;  // automatic tau-halving restarts on divergence
    bool record_history = true;
    double lambda0_hint = std::numeric_limits<double>::quiet_NaN();
    int workers = 0;  // 0 -> RNLS_THREADS, else hardware

    void validate() const {
        if (tau < 0.0) throw ConfigError("solver: tau must be > 0 (0 selects the default)");
        if (!(tol_step > 0.0) || !(tol_residual > 0.0))
            throw ConfigError("solver: tolerances must be > 0");
        if (max_iters <= 0) throw ConfigError("solver: max_iters must be > 0");
        init.validate();
    }
};

struct GroundStateResult {
    Field field;
    Diagnostics diags;
    long iters = 0;
    bool converged = false;
    std::vector<double> step_norm_history;
    std::vector<double> action_history;
    std::string init_used;
    int vortex_count = 0;  // filled by analysis::count_vortices
    double tau_used = 0.0;
    double alpha_last = 0.0;
    double lambda = 0.0;  // Rayleigh quotient (linear flow only)
};

enum class FlowKind { action, energy, linear };

/// Stabilization constant: half the spread of the explicit multiplier
/// V + beta |phi|^{p-1} + omega_eff over the nodes, clamped to >= 0.
inline double stabilizer_alpha(const Field& phi, const ModelParams& prm,
                               FlowKind flow = FlowKind::action) {
    const Grid& g = *phi.grid();
    RealVec V = potential_values(prm.potential, g);
    const double omega_eff = (flow == FlowKind::action) ? prm.omega : 0.0;
    const bool cubic = prm.p == 3.0;
    const double half_pm1 = 0.5 * (prm.p - 1.0);
    double wmin = std::numeric_limits<double>::infinity(), wmax = -wmin;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double r2 = std::norm(phi[i]);
        const double nl = cubic ? r2 : (r2 > 0.0 ? std::pow(r2, half_pm1) : 0.0);
        const double w = V[i] + prm.beta * nl + omega_eff;
        wmin = std::min(wmin, w);
        wmax = std::max(wmax, w);
    }
    return std::max(0.0, 0.5 * (wmax + wmin));
}

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

namespace detail {

inline Field build_init(const InitSpec& spec, const ModelParams& prm, const GridPtr& grid,
                        std::uint64_t seed);

inline Field init_gaussian(const GridPtr& grid, double width, double amplitude) {
    const double inv2w2 = 1.0 / (2.0 * width * width);
    return make_field(grid, [&](const std::array<double, 2>& x) {
        return cplx(amplitude * std::exp(-(x[0] * x[0] + x[1] * x[1]) * inv2w2), 0.0);
    });
}

inline Field init_vortex(const GridPtr& grid, int m, double width, double amplitude) {
    if (grid->dim() != 2)
        throw ParameterDomainError("init: vortex ansatz requires d = 2");
    const double inv2w2 = 1.0 / (2.0 * width * width);
    return make_field(grid, [&](const std::array<double, 2>& x) {
        cplx z(x[0], x[1]);
        cplx zm(1.0, 0.0);
        for (int k = 0; k < m; ++k) zm *= z;
        return amplitude * zm * std::exp(-(x[0] * x[0] + x[1] * x[1]) * inv2w2);
    });
}

inline Field init_thomas_fermi(const GridPtr& grid, const ModelParams& prm) {
    if (!(prm.beta > 0.0))
        throw ParameterDomainError("init: thomas_fermi requires beta > 0");
    if (!(prm.omega < 0.0))
        throw ParameterDomainError("init: thomas_fermi requires omega < 0");
    const double mu = -prm.omega;
    const double expo = 1.0 / (prm.p - 1.0);
    RealVec V = potential_values(prm.potential, *grid);
    Field f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double t = mu - V[i];
        f[i] = cplx(t > 0.0 ? std::pow(t / prm.beta, expo) : 0.0, 0.0);
    }
    return f;
}

inline void add_seeded_noise(Field& f, double frac, std::uint64_t seed) {
    if (frac <= 0.0) return;
    double amax = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) amax = std::max(amax, std::abs(f[i]));
    if (amax == 0.0) amax = 1.0;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const double s = frac * amax / std::sqrt(2.0);
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] += cplx(s * nd(rng), s * nd(rng));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Flow engine
// ---------------------------------------------------------------------------

namespace detail {

class FlowEngine {
public:
    FlowEngine(const ModelParams& prm, GridPtr grid, const SolverConfig& cfg, FlowKind flow,
               double target_mass)
        : prm_(prm), grid_(std::move(grid)), cfg_(cfg), flow_(flow), target_mass_(target_mass) {
        const Grid& g = *grid_;
        prm_.validate(g);
        cfg_.validate();
        V_ = potential_values(prm_.potential, g);
        omega_eff_ = (flow_ == FlowKind::action) ? prm_.omega : 0.0;
        beta_ = (flow_ == FlowKind::linear) ? 0.0 : prm_.beta;
        const std::size_t total = g.size();
        phi_.resize(total);
        phi_hat_.resize(total);
        work_.resize(total);
        work_hat_.resize(total);
        nl_.resize(total);
        if (g.dim() == 2) {
            d0_.resize(total);
            d1_.resize(total);
            lz_.resize(total);
        }
        // |k|^2 and derivative tables in flat order would cost memory; per-axis
        // tables plus the two-level loop keep it cache-friendly instead.
    }

    GroundStateResult run(const Field& init, const std::string& label) {
        if (!init.grid()->same_as(*grid_))
            throw GridMismatchError("solver: init field grid mismatch");
        double tau = cfg_.tau > 0.0 ? cfg_.tau : (flow_ == FlowKind::action ? 0.01 : 0.05);
        int attempt = 0;
        for (;;) {
            try {
                return run_once(init, label, tau);
            } catch (const DivergenceError&) {
                if (++attempt > cfg_.tau_retries) throw;
                tau *= 0.5;
            }
        }
    }

private:
    GroundStateResult run_once(const Field& init, const std::string& label, double tau) {
        const Grid& g = *grid_;
        const std::size_t total = g.size();
        const double cv = g.cell_volume();
        const double invN = 1.0 / static_cast<double>(total);
        const bool rotating = g.dim() == 2 && prm_.Omega != 0.0;
        const bool need_lz = g.dim() == 2;  // Lz pairing tracked for diagnostics
        const bool normalize = flow_ != FlowKind::action;
        const bool cubic = prm_.p == 3.0;
        const double half_pm1 = 0.5 * (prm_.p - 1.0);

        std::copy(init.data(), init.data() + total, phi_.begin());
        if (normalize) rescale_to_target(cv);
        fft::forward(g, phi_.data(), phi_hat_.data());
        double grad_sq = spectral_grad_sq(cv);

        GroundStateResult res;
        res.init_used = label;
        res.tau_used = tau;
        if (cfg_.record_history) {
            res.step_norm_history.reserve(static_cast<std::size_t>(std::min<long>(cfg_.max_iters, 1 << 20)));
            res.action_history.reserve(res.step_norm_history.capacity());
        }

        double lambda_prev_window = std::numeric_limits<double>::quiet_NaN();
        const int lambda_window = 50;
        long it = 0;
        double step_norm = std::numeric_limits<double>::infinity();
        bool step_converged = false;

        for (; it < cfg_.max_iters; ++it) {
            // partials of the current iterate (rotation term and Lz pairing)
            if (need_lz) compute_partials(invN);

            // pointwise sums and the explicit multiplier W = V + beta|phi|^{p-1} + omega_eff
            double mass_s = 0.0, pot_s = 0.0, lp_s = 0.0;
            double wmin = std::numeric_limits<double>::infinity(), wmax = -wmin;
            cplx lz_pair(0.0, 0.0);
            const std::size_t n0 = g.n(0);
            const auto& x0 = g.coords(0);
            const auto& x1g = g.dim() == 2 ? g.coords(1) : g.coords(0);
            for (std::size_t i = 0; i < total; ++i) {
                const double r2 = std::norm(phi_[i]);
                const double nl = cubic ? r2 : (r2 > 0.0 ? std::pow(r2, half_pm1) : 0.0);
                nl_[i] = nl;
                mass_s += r2;
                pot_s += V_[i] * r2;
                lp_s += nl * r2;
                const double w = V_[i] + beta_ * nl + omega_eff_;
                wmin = std::min(wmin, w);
                wmax = std::max(wmax, w);
            }
            if (need_lz) {
                std::size_t i = 0;
                for (std::size_t j1 = 0; j1 < g.n(1); ++j1) {
                    const double y = x1g[j1];
                    for (std::size_t j0 = 0; j0 < n0; ++j0, ++i) {
                        const cplx lz = cplx(0.0, 1.0) * (y * d0_[i] - x0[j0] * d1_[i]);
                        lz_[i] = lz;
                        lz_pair += lz * std::conj(phi_[i]);
                    }
                }
                lz_pair *= cv;
            }
            const double mass = mass_s * cv;
            const double pot = pot_s * cv;
            const double lp = lp_s * cv;
            const double l_rot = -prm_.Omega * lz_pair.real();
            const double energy =
                0.5 * grad_sq + pot + 2.0 * beta_ / (prm_.p + 1.0) * lp + l_rot;
            const double action = energy + prm_.omega * mass;
            const double lambda = mass > 0.0 ? (0.5 * grad_sq + pot + l_rot) / mass : 0.0;
            const double mu = mass > 0.0
                ? (energy + beta_ * (prm_.p - 1.0) / (prm_.p + 1.0) * lp) / mass
                : 0.0;

            if (!std::isfinite(action) || !std::isfinite(mass))
                throw DivergenceError("solver: flow diverged (try a smaller tau)");

            // For the normalized flows the explicit multiplier is recentered by
            // the running chemical potential; with the shift the exact discrete
            // stationary state is a fixed point of the map (the unshifted map
            // stalls at an O(tau) kinetic-rescaled eigenstate).
            const double mu_shift = (flow_ == FlowKind::action) ? 0.0 : mu;

            if (cfg_.record_history) {
                res.action_history.push_back(flow_ == FlowKind::action ? action : energy);
                if (it > 0) res.step_norm_history.push_back(step_norm);
            }

            // stopping tests use the step just taken
            if (it > 0 && step_norm < cfg_.tol_step) {
                step_converged = true;
                res.lambda = lambda;
                break;
            }
            if (flow_ == FlowKind::linear && it > 0 && it % lambda_window == 0) {
                if (std::isfinite(lambda_prev_window) &&
                    std::abs(lambda - lambda_prev_window) <
                        cfg_.tol_lambda * std::max(1.0, std::abs(lambda))) {
                    step_converged = true;
                    res.lambda = lambda;
                    break;
                }
                lambda_prev_window = lambda;
            }
            res.lambda = lambda;

            const double alpha =
                cfg_.stab_auto ? std::max(0.0, 0.5 * (wmax + wmin)) : cfg_.stab_alpha;
            res.alpha_last = alpha;

            // explicit part: u = phi + tau * [(alpha - W) phi + Omega Lz phi]
            if (rotating) {
                for (std::size_t i = 0; i < total; ++i) {
                    const double w = V_[i] + beta_ * nl_[i] + omega_eff_ - mu_shift;
                    work_[i] = phi_[i] + tau * ((alpha - w) * phi_[i] + prm_.Omega * lz_[i]);
                }
            } else {
                for (std::size_t i = 0; i < total; ++i) {
                    const double w = V_[i] + beta_ * nl_[i] + omega_eff_ - mu_shift;
                    work_[i] = phi_[i] + tau * (alpha - w) * phi_[i];
                }
            }

            // implicit diagonal solve in Fourier space
            fft::forward(g, work_.data(), work_hat_.data());
            double gsq_next = 0.0;
            apply_implicit(tau, alpha, invN, gsq_next, cv);
            fft::backward(g, work_hat_.data(), work_.data());

            double step_inf = 0.0;
            if (normalize) {
                double m_next = 0.0;
                for (std::size_t i = 0; i < total; ++i) {
                    work_[i] *= invN;
                    m_next += std::norm(work_[i]);
                }
                m_next *= cv;
                if (!(m_next > 0.0) || !std::isfinite(m_next))
                    throw DivergenceError("solver: flow collapsed (try a smaller tau)");
                const double c = std::sqrt(target_mass_ / m_next);
                for (std::size_t i = 0; i < total; ++i) {
                    const cplx nxt = work_[i] * c;
                    step_inf = std::max(step_inf, std::abs(nxt - phi_[i]));
                    phi_[i] = nxt;
                }
                // phi_hat_ stays the unnormalized forward transform of phi_
                for (std::size_t i = 0; i < total; ++i) phi_hat_[i] = work_hat_[i] * c;
                grad_sq = gsq_next * c * c;
            } else {
                for (std::size_t i = 0; i < total; ++i) {
                    const cplx nxt = work_[i] * invN;
                    step_inf = std::max(step_inf, std::abs(nxt - phi_[i]));
                    phi_[i] = nxt;
                }
                std::swap(phi_hat_, work_hat_);
                grad_sq = gsq_next;
            }
            if (!std::isfinite(step_inf))
                throw DivergenceError("solver: flow diverged (try a smaller tau)");
            step_norm = step_inf / tau;
        }

        res.iters = it;
        res.field = Field(grid_);
        std::copy(phi_.begin(), phi_.end(), res.field.data());
        align_phase(res.field);

        ModelParams eff = prm_;
        eff.beta = beta_;
        if (flow_ != FlowKind::action) {
            // report against the self-consistent frequency omega = -mu
            Diagnostics d0 = diag_without_residual(res.field, eff);
            eff.omega = -d0.mu;
        }
        res.diags = diagnostics(res.field, eff);
        const double resid_scale = std::sqrt(std::max(res.diags.mass, 0.0));
        res.converged =
            step_converged && res.diags.pde_residual_l2 <= cfg_.tol_residual * resid_scale;
        if (flow_ == FlowKind::linear) res.lambda = res.diags.mu;
        return res;
    }

    Diagnostics diag_without_residual(const Field& f, const ModelParams& prm) {
        RealVec& V = V_;
        auto t = functional_terms(f, prm, V);
        Diagnostics d;
        d.mass = t.mass;
        d.energy = 0.5 * t.grad_sq + t.pot + 2.0 * prm.beta / (prm.p + 1.0) * t.lp -
                   prm.Omega * t.lz_pair.real();
        d.mu = t.mass > 0.0
                   ? (d.energy + prm.beta * (prm.p - 1.0) / (prm.p + 1.0) * t.lp) / t.mass
                   : 0.0;
        return d;
    }

    void rescale_to_target(double cv) {
        double m = 0.0;
        for (const cplx& z : phi_) m += std::norm(z);
        m *= cv;
        if (!(m > 0.0)) throw ParameterDomainError("solver: initial state has zero mass");
        const double c = std::sqrt(target_mass_ / m);
        for (cplx& z : phi_) z *= c;
    }

    void compute_partials(double invN) {
        const Grid& g = *grid_;
        const std::size_t n0 = g.n(0), total = g.size();
        const auto& kd0 = g.freq_deriv(0);
        const auto& kd1 = g.freq_deriv(1);
        for (std::size_t i = 0; i < total; ++i)
            work_hat_[i] = phi_hat_[i] * cplx(0.0, kd0[i % n0] * invN);
        fft::backward(g, work_hat_.data(), d0_.data());
        for (std::size_t i = 0; i < total; ++i)
            work_hat_[i] = phi_hat_[i] * cplx(0.0, kd1[i / n0] * invN);
        fft::backward(g, work_hat_.data(), d1_.data());
    }

    // divide by (1 + tau(|k|^2/2 + alpha)) in place and accumulate |grad|^2 of
    // the updated iterate
    void apply_implicit(double tau, double alpha, double invN, double& gsq_next, double cv) {
        const Grid& g = *grid_;
        const std::size_t total = g.size();
        const auto& k0 = g.freq(0);
        double acc = 0.0;
        if (g.dim() == 1) {
            for (std::size_t i = 0; i < total; ++i) {
                const double k2 = k0[i] * k0[i];
                work_hat_[i] /= (1.0 + tau * (0.5 * k2 + alpha));
                acc += k2 * std::norm(work_hat_[i]);
            }
        } else {
            const std::size_t n0 = g.n(0);
            const auto& k1 = g.freq(1);
            std::size_t i = 0;
            for (std::size_t j1 = 0; j1 < g.n(1); ++j1) {
                const double k1sq = k1[j1] * k1[j1];
                for (std::size_t j0 = 0; j0 < n0; ++j0, ++i) {
                    const double k2 = k0[j0] * k0[j0] + k1sq;
                    work_hat_[i] /= (1.0 + tau * (0.5 * k2 + alpha));
                    acc += k2 * std::norm(work_hat_[i]);
                }
            }
        }
        gsq_next = acc * cv * invN;
    }

    double spectral_grad_sq(double cv) {
        const Grid& g = *grid_;
        const auto& k0 = g.freq(0);
        double acc = 0.0;
        if (g.dim() == 1) {
            for (std::size_t i = 0; i < g.size(); ++i)
                acc += k0[i] * k0[i] * std::norm(phi_hat_[i]);
        } else {
            const std::size_t n0 = g.n(0);
            const auto& k1 = g.freq(1);
            std::size_t i = 0;
            for (std::size_t j1 = 0; j1 < g.n(1); ++j1) {
                const double k1sq = k1[j1] * k1[j1];
                for (std::size_t j0 = 0; j0 < n0; ++j0, ++i)
                    acc += (k0[j0] * k0[j0] + k1sq) * std::norm(phi_hat_[i]);
            }
        }
        return acc * cv / static_cast<double>(g.size());
    }

    // rotate the global phase so the peak sample is real and positive
    static void align_phase(Field& f) {
        std::size_t amax = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double a = std::abs(f[i]);
            if (a > best) {
                best = a;
                amax = i;
            }
        }
        if (best <= 0.0) return;
        const cplx ph = std::conj(f[amax]) / std::abs(f[amax]);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] *= ph;
    }

    ModelParams prm_;
    GridPtr grid_;
    SolverConfig cfg_;
    FlowKind flow_;
    double target_mass_;
    double omega_eff_ = 0.0;
    double beta_ = 0.0;
    RealVec V_;
    RealVec nl_;
    CplxVec phi_, phi_hat_, work_, work_hat_, d0_, d1_, lz_;
};

inline Field build_init(const InitSpec& spec, const ModelParams& prm, const GridPtr& grid,
                        std::uint64_t seed) {
    Field f;
    switch (spec.kind) {
        case InitSpec::Kind::auto_default:
        case InitSpec::Kind::gaussian:
            f = init_gaussian(grid, spec.width, spec.amplitude);
            break;
        case InitSpec::Kind::vortex:
            f = init_vortex(grid, spec.winding, spec.width, spec.amplitude);
            break;
        case InitSpec::Kind::thomas_fermi:
            f = init_thomas_fermi(grid, prm);
            break;
        case InitSpec::Kind::field: {
            if (!spec.warm) throw ConfigError("init: empty warm-start field");
            if (spec.warm->grid()->same_as(*grid)) {
                f = *spec.warm;
            } else {
                f = resample(*spec.warm, grid);
            }
            break;
        }
        case InitSpec::Kind::file:
            throw ConfigError("init: file-based init must be resolved by the caller");
        case InitSpec::Kind::multistart:
            throw ConfigError("init: nested multistart is not a single start");
    }
    add_seeded_noise(f, spec.noise_frac, seed);
    return f;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Linear Rayleigh-quotient minimizer and lambda0 resolution
// ---------------------------------------------------------------------------

/// Smallest eigenvalue of R = -1/2 Lap + V - Omega Lz together with the
/// normalized mode, via the beta = 0 normalized flow.
inline std::pair<double, Field> linear_ground_mode(const PotentialSpec& potential, double Omega,
                                                   const GridPtr& grid, const SolverConfig& cfg) {
    ModelParams prm;
    prm.potential = potential;
    prm.Omega = Omega;
    prm.omega = 0.0;
    prm.beta = 0.0;
    detail::FlowEngine eng(prm, grid, cfg, FlowKind::linear, 1.0);
    InitSpec is = cfg.init;
    if (is.kind == InitSpec::Kind::multistart)
        throw ConfigError("linear_ground_mode: multistart is not supported here");
    if (is.kind == InitSpec::Kind::auto_default) is = InitSpec::gaussian(1.0);
    Field f0 = detail::build_init(is, prm, grid, cfg.seed);
    GroundStateResult r = eng.run(f0, is.label());
    return {r.lambda, std::move(r.field)};
}

/// lambda0(Omega) by closed form where one exists (harmonic traps), otherwise
/// by the linear flow. cfg.lambda0_hint short-circuits both.
inline double resolve_lambda0(const PotentialSpec& potential, double Omega, const GridPtr& grid,
                              const SolverConfig& cfg) {
    if (std::isfinite(cfg.lambda0_hint)) return cfg.lambda0_hint;
    if (potential.kind == PotentialSpec::Kind::harmonic) {
        if (grid->dim() == 1) return 0.5 * potential.coef[0];
        const double g0 = potential.coef[0], g1 = potential.coef[1];
        if (g0 == g1 && std::abs(Omega) < g0) return g0;  // isotropic, any |Omega| < gamma
        if (Omega == 0.0) return 0.5 * (g0 + g1);
    }
    SolverConfig c = cfg;
    c.init = InitSpec::gaussian(1.0);
    c.tau = 0.0;
    return linear_ground_mode(potential, Omega, grid, c).first;
}

// ---------------------------------------------------------------------------
// Ground-state drivers
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<InitSpec> expand_starts(const InitSpec& init, const ModelParams& prm,
                                           int dim) {
    if (init.kind == InitSpec::Kind::multistart) return init.starts;
    if (init.kind == InitSpec::Kind::auto_default) {
        if (dim == 2 && prm.Omega > 0.0) {
            // symmetry-broken minimizers are unreachable from symmetric data,
            // so always race a few vortex-carrying starts
            return {InitSpec::gaussian(1.0), InitSpec::vortex(1, 1.0), InitSpec::vortex(2, 1.0),
                    InitSpec::gaussian(1.0).with_noise(0.01)};
        }
        return {InitSpec::gaussian(1.0)};
    }
    return {init};
}

}  // namespace detail

/// Unconstrained action minimizer (requires omega < -lambda0(Omega)). With a
/// multistart init every start is flowed and the lowest-action result wins.
inline GroundStateResult action_ground_state(const ModelParams& prm, const GridPtr& grid,
                                             const SolverConfig& cfg) {
    prm.validate(*grid);
    cfg.validate();
    const double lambda0 = resolve_lambda0(prm.potential, prm.Omega, grid, cfg);
    if (!(prm.omega < -lambda0)) {
        std::ostringstream os;
        os << "action_ground_state: omega must be below -lambda0(Omega) = " << -lambda0
           << " (got omega = " << prm.omega << ")";
        throw ParameterDomainError(os.str());
    }

    std::vector<InitSpec> starts = detail::expand_starts(cfg.init, prm, grid->dim());
    std::vector<GroundStateResult> results(starts.size());
    std::vector<std::string> failures(starts.size());
    run_indexed_jobs(starts.size(), resolve_workers(cfg.workers), [&](std::size_t j) {
        detail::FlowEngine eng(prm, grid, cfg, FlowKind::action, 0.0);
        try {
            const std::uint64_t seed_j = cfg.seed + 0x9e3779b97f4a7c15ULL * j;
            Field f0 = detail::build_init(starts[j], prm, grid, seed_j);
            results[j] = eng.run(f0, starts[j].label());
        } catch (const Error& e) {
            failures[j] = e.what();
        }
    });

    long best = -1;
    for (std::size_t j = 0; j < results.size(); ++j) {
        if (!failures[j].empty()) continue;
        if (best < 0) {
            best = static_cast<long>(j);
            continue;
        }
        const auto& cand = results[j];
        const auto& cur = results[best];
        // converged results outrank unconverged ones, then lowest action wins
        if (std::make_pair(!cand.converged, cand.diags.action) <
            std::make_pair(!cur.converged, cur.diags.action))
            best = static_cast<long>(j);
    }
    if (best < 0) throw DivergenceError("action_ground_state: all starts diverged: " + failures[0]);
    return std::move(results[best]);
}

/// Mass-constrained energy minimizer: the same semi-implicit step applied to
/// grad E with renormalization to mass m after every step.
inline GroundStateResult energy_ground_state(double mass, const ModelParams& prm,
                                             const GridPtr& grid, const SolverConfig& cfg) {
    if (!(mass > 0.0)) throw ParameterDomainError("energy_ground_state: mass must be > 0");
    prm.validate(*grid);
    cfg.validate();

    std::vector<InitSpec> starts = detail::expand_starts(cfg.init, prm, grid->dim());
    std::vector<GroundStateResult> results(starts.size());
    std::vector<std::string> failures(starts.size());
    run_indexed_jobs(starts.size(), resolve_workers(cfg.workers), [&](std::size_t j) {
        detail::FlowEngine eng(prm, grid, cfg, FlowKind::energy, mass);
        try {
            const std::uint64_t seed_j = cfg.seed + 0x9e3779b97f4a7c15ULL * j;
            ModelParams pinit = prm;
            if (!(pinit.omega < 0.0)) pinit.omega = -1.0;  // thomas_fermi init fallback scale
            Field f0 = detail::build_init(starts[j], pinit, grid, seed_j);
            results[j] = eng.run(f0, starts[j].label());
        } catch (const Error& e) {
            failures[j] = e.what();
        }
    });

    long best = -1;
    for (std::size_t j = 0; j < results.size(); ++j) {
        if (!failures[j].empty()) continue;
        if (best < 0) {
            best = static_cast<long>(j);
            continue;
        }
        if (std::make_pair(!results[j].converged, results[j].diags.energy) <
            std::make_pair(!results[best].converged, results[best].diags.energy))
            best = static_cast<long>(j);
    }
    if (best < 0)
        throw DivergenceError("energy_ground_state: all starts diverged: " + failures[0]);
    return std::move(results[best]);
}

}  // namespace rnls
