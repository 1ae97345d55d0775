#pragma once

#include <cmath>

#include "rnls/potential.hpp"

namespace rnls {

// ---------------------------------------------------------------------------
// Full parameterization of the variational problem: the action
//   S(phi) = E(phi) + omega |phi|_2^2,
//   E(phi) = 1/2 |grad phi|_2^2 + int V|phi|^2 + 2 beta/(p+1) |phi|_{p+1}^{p+1}
//            - Omega int conj(phi) Lz phi,
// and the stationary operator
//   H(phi) = -1/2 Lap phi + V phi + beta |phi|^{p-1} phi - Omega Lz phi + omega phi.
// Note the nonlinear coefficient differs between E (2 beta/(p+1)) and the
// chemical potential mu (beta); both are kept verbatim.
// ---------------------------------------------------------------------------

struct ModelParams {
    double p = 3.0;
    double beta = 1.0;
    double Omega = 0.0;
    double omega = -2.0;
    PotentialSpec potential = PotentialSpec::harmonic({1.0, 1.0});

    double omega_max(int dim) const { return potential.omega_max(dim); }

    /// Library-level validation; beta == 0 is admitted as the linear edge case
    /// (used by the Rayleigh-quotient solver). The config layer additionally
    /// requires beta > 0.
    void validate(const Grid& grid) const {
        potential.validate(grid.dim());
        if (!(p > 1.0)) throw ParameterDomainError("model: p must be > 1");
        if (!(beta >= 0.0)) throw ParameterDomainError("model: beta must be >= 0 (defocusing)");
        if (grid.dim() == 1) {
            if (Omega != 0.0)
                throw ParameterDomainError("model: Omega must be 0 for d = 1");
        } else {
            if (!(Omega >= 0.0) || !(Omega < omega_max(grid.dim())))
                throw ParameterDomainError(
                    "model: Omega must satisfy 0 <= Omega < Omega_max(potential)");
        }
    }
};

struct Diagnostics {
    double mass = 0.0;        // |phi|_2^2
    double action = 0.0;      // S
    double energy = 0.0;      // E
    double quadratic = 0.0;   // Q = S - 2 beta/(p+1) |phi|_{p+1}^{p+1}
    double nehari = 0.0;      // K = Q + beta |phi|_{p+1}^{p+1}
    double mu = 0.0;          // chemical potential
    double lz_expect = 0.0;   // <Lz> = int conj(phi) Lz phi / mass
    double x_norm_sq = 0.0;   // |grad phi|^2 + int (1+V)|phi|^2
    double pde_residual_l2 = 0.0;  // |H(phi)|_2
    double lp_norm_pp = 0.0;  // |phi|_{p+1}^{p+1}
    double kinetic = 0.0;     // 1/2 |grad phi|^2
    double lz_imag = 0.0;     // Im of the Lz pairing (diagnostic, ~0)
};

namespace detail {

struct FunctionalTerms {
    double mass = 0.0, grad_sq = 0.0, pot = 0.0, lp = 0.0, pot1 = 0.0;
    cplx lz_pair{0.0, 0.0};  // int conj(phi) Lz phi
};

inline FunctionalTerms functional_terms(const Field& phi, const ModelParams& prm,
                                        const RealVec& V) {
    const Grid& g = *phi.grid();
    FunctionalTerms t;
    const double cv = g.cell_volume();
    const bool cubic = prm.p == 3.0;
    const double half_pm1 = 0.5 * (prm.p - 1.0);
    double mass = 0.0, pot = 0.0, pot1 = 0.0, lp = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double r2 = std::norm(phi[i]);
        mass += r2;
        pot += V[i] * r2;
        pot1 += (1.0 + V[i]) * r2;
        lp += cubic ? r2 * r2 : (r2 > 0.0 ? std::pow(r2, half_pm1) * r2 : 0.0);
    }
    t.mass = mass * cv;
    t.pot = pot * cv;
    t.pot1 = pot1 * cv;
    t.lp = lp * cv;

    // |grad phi|^2 via Parseval on the full spectrum (Nyquist included, so the
    // pairing <-Lap f, f> = |grad f|^2 holds exactly on the grid)
    CplxVec hat(g.size());
    fft::forward(g, phi.data(), hat.data());
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
    t.grad_sq = gsq * cv / static_cast<double>(g.size());

    if (g.dim() == 2) {
        Field lz = apply_lz(phi);
        cplx acc(0.0, 0.0);
        for (std::size_t i = 0; i < phi.size(); ++i) acc += lz[i] * std::conj(phi[i]);
        t.lz_pair = acc * cv;
    }
    return t;
}

}  // namespace detail

/// H(phi): the stationary operator whose zeros are the standing-wave profiles.
inline Field stationary_residual_field(const Field& phi, const ModelParams& prm) {
    detail::require_finite(phi, "stationary_residual");
    const Grid& g = *phi.grid();
    prm.validate(g);
    RealVec V = potential_values(prm.potential, g);
    Field lap = apply_laplacian(phi);
    Field h(phi.grid());
    const bool cubic = prm.p == 3.0;
    const double half_pm1 = 0.5 * (prm.p - 1.0);
    if (g.dim() == 2 && prm.Omega != 0.0) {
        Field lz = apply_lz(phi);
        for (std::size_t i = 0; i < phi.size(); ++i) {
            const double r2 = std::norm(phi[i]);
            const double nl = cubic ? r2 : (r2 > 0.0 ? std::pow(r2, half_pm1) : 0.0);
            h[i] = -0.5 * lap[i] + (V[i] + prm.omega + prm.beta * nl) * phi[i] -
                   prm.Omega * lz[i];
        }
    } else {
        for (std::size_t i = 0; i < phi.size(); ++i) {
            const double r2 = std::norm(phi[i]);
            const double nl = cubic ? r2 : (r2 > 0.0 ? std::pow(r2, half_pm1) : 0.0);
            h[i] = -0.5 * lap[i] + (V[i] + prm.omega + prm.beta * nl) * phi[i];
        }
    }
    return h;
}

/// L2 Frechet gradient of S with respect to (Re phi, Im phi): 2 H(phi).
inline Field action_gradient(const Field& phi, const ModelParams& prm) {
    Field h = stationary_residual_field(phi, prm);
    for (std::size_t i = 0; i < h.size(); ++i) h[i] *= 2.0;
    return h;
}

inline Diagnostics diagnostics(const Field& phi, const ModelParams& prm) {
    detail::require_finite(phi, "diagnostics");
    const Grid& g = *phi.grid();
    prm.validate(g);
    RealVec V = potential_values(prm.potential, g);
    const auto t = detail::functional_terms(phi, prm, V);

    Diagnostics d;
    d.mass = t.mass;
    d.kinetic = 0.5 * t.grad_sq;
    d.lp_norm_pp = t.lp;
    const double l_rot = -prm.Omega * t.lz_pair.real();
    d.lz_imag = t.lz_pair.imag();
    d.energy = d.kinetic + t.pot + 2.0 * prm.beta / (prm.p + 1.0) * t.lp + l_rot;
    d.action = d.energy + prm.omega * t.mass;
    d.quadratic = d.action - 2.0 * prm.beta / (prm.p + 1.0) * t.lp;
    d.nehari = d.quadratic + prm.beta * t.lp;
    d.mu = t.mass > 0.0
               ? (d.energy + prm.beta * (prm.p - 1.0) / (prm.p + 1.0) * t.lp) / t.mass
               : 0.0;
    d.lz_expect = t.mass > 0.0 ? t.lz_pair.real() / t.mass : 0.0;
    d.x_norm_sq = t.grad_sq + t.pot1;
    d.pde_residual_l2 = norm_l2(stationary_residual_field(phi, prm));
    return d;
}

}  // namespace rnls
