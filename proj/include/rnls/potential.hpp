#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rnls/grid.hpp"

namespace rnls {

// ---------------------------------------------------------------------------
// Confining trap potentials. All variants are nonnegative and grow at
// infinity, so ground states stay localized well inside the box.
//   harmonic          V = 1/2 sum_j gamma_j^2 x_j^2
//   harmonic_lattice  V = sum_j (1/2 gamma_j^2 x_j^2 + kappa sin^2(pi x_j / 2))
//   harmonic_quartic  V = c1/4 (|x|^2 - c2)^2
// ---------------------------------------------------------------------------

struct PotentialSpec {
    enum class Kind { harmonic, harmonic_lattice, harmonic_quartic };

    Kind kind = Kind::harmonic;
    std::vector<double> coef{1.0, 1.0};  // harmonic/lattice: gamma per axis (+kappa); quartic: c1,c2

    static PotentialSpec harmonic(std::vector<double> gammas) {
        return {Kind::harmonic, std::move(gammas)};
    }
    static PotentialSpec harmonic_lattice(std::vector<double> gammas, double kappa) {
        gammas.push_back(kappa);
        return {Kind::harmonic_lattice, std::move(gammas)};
    }
    static PotentialSpec harmonic_quartic(double c1, double c2) {
        return {Kind::harmonic_quartic, {c1, c2}};
    }

    void validate(int dim) const {
        switch (kind) {
            case Kind::harmonic:
                if (coef.size() != static_cast<std::size_t>(dim))
                    throw ConfigError("potential: harmonic needs one gamma per axis");
                for (double g : coef)
                    if (!(g > 0.0)) throw ConfigError("potential: gamma must be > 0");
                break;
            case Kind::harmonic_lattice:
                if (coef.size() != static_cast<std::size_t>(dim) + 1)
                    throw ConfigError("potential: harmonic_lattice needs gammas plus kappa");
                for (std::size_t j = 0; j + 1 < coef.size(); ++j)
                    if (!(coef[j] > 0.0)) throw ConfigError("potential: gamma must be > 0");
                if (!(coef.back() > 0.0)) throw ConfigError("potential: kappa must be > 0");
                break;
            case Kind::harmonic_quartic:
                if (coef.size() != 2)
                    throw ConfigError("potential: harmonic_quartic needs (c1, c2)");
                if (!(coef[0] > 0.0) || !(coef[1] > 0.0))
                    throw ConfigError("potential: c1, c2 must be > 0");
                break;
        }
    }

    double operator()(const std::array<double, 2>& x, int dim) const {
        switch (kind) {
            case Kind::harmonic: {
                double v = 0.0;
                for (int j = 0; j < dim; ++j) v += 0.5 * coef[j] * coef[j] * x[j] * x[j];
                return v;
            }
            case Kind::harmonic_lattice: {
                const double kappa = coef.back();
                double v = 0.0;
                for (int j = 0; j < dim; ++j) {
                    const double s = std::sin(std::numbers::pi * x[j] / 2.0);
                    v += 0.5 * coef[j] * coef[j] * x[j] * x[j] + kappa * s * s;
                }
                return v;
            }
            case Kind::harmonic_quartic: {
                double r2 = 0.0;
                for (int j = 0; j < dim; ++j) r2 += x[j] * x[j];
                const double t = r2 - coef[1];
                return 0.25 * coef[0] * t * t;
            }
        }
        return 0.0;
    }

    /// Largest rotation speed keeping V - (gamma^2/2)(x1^2+x2^2) confining.
    /// The lattice term is bounded, so it inherits the harmonic bound; the
    /// quartic trap dominates any quadratic, hence no bound.
    double omega_max(int dim) const {
        if (kind == Kind::harmonic_quartic) return std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        for (int j = 0; j < dim; ++j) gmin = std::min(gmin, coef[j]);
        return gmin;
    }

    bool is_harmonic() const { return kind == Kind::harmonic; }
    bool is_isotropic_harmonic(int dim) const {
        return kind == Kind::harmonic && (dim == 1 || coef[0] == coef[1]);
    }

    std::string to_string() const {
        std::ostringstream os;
        switch (kind) {
            case Kind::harmonic: {
                os << "harmonic(";
                for (std::size_t j = 0; j < coef.size(); ++j) os << (j ? "," : "") << coef[j];
                os << ")";
                break;
            }
            case Kind::harmonic_lattice: {
                os << "harmonic_lattice(";
                for (std::size_t j = 0; j < coef.size(); ++j) os << (j ? "," : "") << coef[j];
                os << ")";
                break;
            }
            case Kind::harmonic_quartic:
                os << "harmonic_quartic(" << coef[0] << "," << coef[1] << ")";
                break;
        }
        return os.str();
    }
};

/// Potential sampled at the grid nodes as plain reals.
inline RealVec potential_values(const PotentialSpec& spec, const Grid& grid) {
    spec.validate(grid.dim());
    RealVec v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        v[i] = spec(grid.node(i), grid.dim());
    return v;
}

/// Spec operation: V sampled at nodes as a (real-valued) Field.
inline Field eval_potential(const PotentialSpec& spec, const GridPtr& grid) {
    RealVec v = potential_values(spec, *grid);
    Field f(grid);
    for (std::size_t i = 0; i < v.size(); ++i) f[i] = cplx(v[i], 0.0);
    return f;
}

}  // namespace rnls
