#pragma once

#include <filesystem>
#include <iostream>

#include "rnls/config.hpp"
#include "rnls/field_io.hpp"
#include "rnls/records.hpp"

namespace rnls {

// ---------------------------------------------------------------------------
// Experiment runner shared by the CLI and the integration tests: executes one
// RunConfig, writes field/table outputs under the output directory, and prints
// a one-line summary. Exit codes: 0 success, 1 solver non-convergence,
// 2 configuration error (mapped by the CLI wrapper).
// ---------------------------------------------------------------------------

namespace detail {

/// Exclusive ownership of the output directory while a run writes into it.
class DirLock {
public:
    explicit DirLock(const std::filesystem::path& dir) : path_(dir / ".rnls-lock") {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (std::filesystem::exists(path_))
            throw IoError("output directory is locked by another run: " + path_.string());
        std::ofstream os(path_);
        os << "locked\n";
    }
    ~DirLock() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    DirLock(const DirLock&) = delete;
    DirLock& operator=(const DirLock&) = delete;

private:
    std::filesystem::path path_;
};

inline InitSpec resolve_file_inits(const InitSpec& init) {
    InitSpec out = init;
    if (out.kind == InitSpec::Kind::file) {
        auto [f, prm] = read_field(out.path);
        const double noise = out.noise_frac;
        out = InitSpec::from_field(std::make_shared<Field>(std::move(f)));
        out.noise_frac = noise;
    }
    for (auto& s : out.starts) s = resolve_file_inits(s);
    return out;
}

inline void warn_boundary(const Field& f, std::ostream& err) {
    const Grid& g = *f.grid();
    double interior_max = 0.0, boundary_max = 0.0;
    const std::size_t n0 = g.n(0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double a = std::abs(f[i]);
        interior_max = std::max(interior_max, a);
        const std::size_t i0 = i % n0;
        const std::size_t i1 = g.dim() == 2 ? i / n0 : 0;
        const bool edge = i0 == 0 || i0 + 1 == n0 ||
                          (g.dim() == 2 && (i1 == 0 || i1 + 1 == g.n(1)));
        if (edge) boundary_max = std::max(boundary_max, a);
    }
    if (interior_max > 0.0 && boundary_max > 1e-8 * interior_max)
        err << "warning: |phi| at the box boundary is " << format_g17(boundary_max)
            << " (max " << format_g17(interior_max)
            << "); enlarge the box for a trustworthy truncation\n";
}

inline void write_table(const std::vector<SweepRecord>& recs, const RunConfig& rc,
                        const std::string& stem) {
    for (TableFormat fmt : rc.formats) {
        const char* ext = fmt == TableFormat::csv ? ".csv" : ".jsonl";
        emit_records(recs, fmt, (std::filesystem::path(rc.out_dir) / (stem + ext)).string());
    }
}

template <class Report>
inline void write_report_table(const std::vector<Report>& reports, const RunConfig& rc,
                               const std::string& stem) {
    for (TableFormat fmt : rc.formats) {
        const char* ext = fmt == TableFormat::csv ? ".csv" : ".jsonl";
        emit_reports(reports, fmt, (std::filesystem::path(rc.out_dir) / (stem + ext)).string());
    }
}

inline SweepRecord record_of(const GroundStateResult& r, const ModelParams& prm) {
    SweepOptions opt;
    return record_from_result(r, prm, opt);
}

}  // namespace detail

inline int run_experiment(RunConfig rc, std::ostream& out = std::cout,
                          std::ostream& err = std::cerr) {
    if (rc.experiment == ExperimentType::info) {
        const GridPtr grid = rc.make_grid();
        out << "experiment=info dim=" << rc.dim;
        for (int a = 0; a < rc.dim; ++a)
            out << " axis" << a << "=[" << rc.axes[a].x_min << "," << rc.axes[a].x_max << ";"
                << rc.axes[a].n << "]";
        out << " p=" << rc.model.p << " beta=" << rc.model.beta << " Omega=" << rc.model.Omega
            << " omega=" << rc.model.omega << " potential=" << rc.model.potential.to_string()
            << " Omega_max=" << rc.model.potential.omega_max(rc.dim)
            << " lambda0=" << resolve_lambda0(rc.model.potential, rc.model.Omega, grid, rc.solver)
            << "\n";
        return 0;
    }

    detail::DirLock lock(rc.out_dir);
    const GridPtr grid = rc.make_grid();
    rc.solver.init = detail::resolve_file_inits(rc.solver.init);
    const auto outpath = [&](const std::string& name) {
        return (std::filesystem::path(rc.out_dir) / name).string();
    };

    switch (rc.experiment) {
        case ExperimentType::solve: {
            GroundStateResult r = action_ground_state(rc.model, grid, rc.solver);
            r.vortex_count = count_vortices(r.field).count;
            detail::warn_boundary(r.field, err);
            if (rc.write_fields) write_field(r.field, rc.model, outpath("gs.field"));
            std::vector<SweepRecord> recs{detail::record_of(r, rc.model)};
            detail::write_table(recs, rc, "gs");
            out << "action=" << format_g17(r.diags.action) << " mass=" << format_g17(r.diags.mass)
                << " n_v=" << r.vortex_count << " iters=" << r.iters
                << " converged=" << (r.converged ? 1 : 0) << "\n";
            return r.converged ? 0 : 1;
        }
        case ExperimentType::solve_energy: {
            GroundStateResult r = energy_ground_state(rc.exp_mass, rc.model, grid, rc.solver);
            r.vortex_count = count_vortices(r.field).count;
            detail::warn_boundary(r.field, err);
            ModelParams eff = rc.model;
            eff.omega = -r.diags.mu;
            if (rc.write_fields) write_field(r.field, eff, outpath("gs.field"));
            std::vector<SweepRecord> recs{detail::record_of(r, eff)};
            detail::write_table(recs, rc, "gs");
            out << "energy=" << format_g17(r.diags.energy) << " mu=" << format_g17(r.diags.mu)
                << " mass=" << format_g17(r.diags.mass) << " n_v=" << r.vortex_count
                << " iters=" << r.iters << " converged=" << (r.converged ? 1 : 0) << "\n";
            return r.converged ? 0 : 1;
        }
        case ExperimentType::sweep: {
            if (rc.omega_list.empty())
                throw ConfigError("sweep: model.omega_list is required");
            SweepOptions opt;
            opt.warm_start = rc.warm_start;
            std::vector<SweepRecord> recs =
                sweep_omega(rc.model, rc.omega_list, grid, rc.solver, opt);
            detail::write_table(recs, rc, "sweep");
            long bad = 0;
            for (const auto& r : recs) bad += r.converged ? 0 : 1;
            out << "sweep points=" << recs.size() << " unconverged=" << bad << "\n";
            return bad == 0 ? 0 : 1;
        }
        case ExperimentType::rates: {
            if (rc.omega_list.empty())
                throw ConfigError("rates: model.omega_list is required");
            const double lambda0 =
                resolve_lambda0(rc.model.potential, rc.model.Omega, grid, rc.solver);
            SweepOptions opt;
            opt.warm_start = true;  // continuation in omega
            opt.warm_rescale = rc.rates_regime == "near";
            SolverConfig cfg = rc.solver;
            cfg.lambda0_hint = lambda0;
            std::vector<SweepRecord> recs = sweep_omega(rc.model, rc.omega_list, grid, cfg, opt);
            detail::write_table(recs, rc, "rates");
            const bool near = rc.rates_regime == "near";
            auto xf = [near, lambda0](const SweepRecord& r) {
                return near ? std::abs(r.omega + lambda0) : std::abs(r.omega);
            };
            double wlo = rc.window_lo, whi = rc.window_hi;
            if (wlo == 0.0 && whi == 0.0) {
                wlo = std::numeric_limits<double>::min();
                whi = std::numeric_limits<double>::max();
            }
            RateFit fm = fit_rate(recs, xf, [](const SweepRecord& r) { return r.mass; }, wlo, whi);
            RateFit fs = fit_rate(recs, xf,
                                  [](const SweepRecord& r) { return std::abs(r.action); }, wlo, whi);
            nlohmann::json j{{"regime", rc.rates_regime},
                             {"lambda0", lambda0},
                             {"mass_fit", to_json(fm)},
                             {"action_fit", to_json(fs)}};
            std::ofstream(outpath("fits.json")) << j.dump(2) << "\n";
            out << "mass_slope=" << format_g17(fm.slope) << " action_slope=" << format_g17(fs.slope)
                << " points=" << fm.n_points << "\n";
            long bad = 0;
            for (const auto& r : recs) bad += r.converged ? 0 : 1;
            return bad == 0 ? 0 : 1;
        }
        case ExperimentType::omega_c: {
            OmegaCOptions opt;
            opt.omega_hi = rc.omega_hi;
            OmegaCResult r =
                critical_omega_c(rc.model.omega, grid, rc.solver, rc.bracket_tol, opt);
            std::ofstream(outpath("omegac.json")) << to_json(r).dump(2) << "\n";
            out << "omega_c_bracket=(" << format_g17(r.lo) << "," << format_g17(r.hi) << ")"
                << " ambiguous=" << (r.ambiguous ? 1 : 0) << "\n";
            return 0;
        }
        case ExperimentType::loop: {
            GroundStateResult ags, egs;
            LoopReport rep = equivalence_loop(rc.model.omega, rc.model.Omega, grid, rc.solver,
                                              rc.model, {}, &ags, &egs);
            if (rc.write_fields) {
                write_field(ags.field, rc.model, outpath("action_gs.field"));
                ModelParams eff = rc.model;
                eff.omega = -rep.mu_g;
                write_field(egs.field, eff, outpath("energy_gs.field"));
            }
            detail::warn_boundary(ags.field, err);
            std::vector<LoopReport> reps{rep};
            detail::write_report_table(reps, rc, "loop");
            out << "S_g=" << format_g17(rep.action_gs) << " mass=" << format_g17(rep.mass)
                << " E_g=" << format_g17(rep.energy_gs) << " mu_g=" << format_g17(rep.mu_g)
                << " e_rel_omega=" << format_g17(rep.e_rel_omega)
                << " e_rel_S=" << format_g17(rep.e_rel_S) << "\n";
            return rep.converged ? 0 : 1;
        }
        case ExperimentType::scan: {
            if (rc.omega_list.empty())
                throw ConfigError("scan: model.omega_list is required (range endpoints)");
            const auto [mn, mx] =
                std::minmax_element(rc.omega_list.begin(), rc.omega_list.end());
            ScanOptions opt;
            opt.mesh_step = rc.mesh_step;
            std::vector<SweepRecord> mesh;
            std::vector<JumpReport> jumps = nonequivalence_scan(
                rc.model.Omega, {*mn, *mx}, rc.resolution, grid, rc.solver, rc.model, opt, &mesh);
            detail::write_table(mesh, rc, "scan");
            detail::write_report_table(jumps, rc, "jumps");
            out << "jumps=" << jumps.size();
            for (const auto& j : jumps)
                out << " [omega_cr=" << format_g17(j.omega_critical) << " forbidden=("
                    << format_g17(j.forbidden_lo) << "," << format_g17(j.forbidden_hi) << ")]";
            out << "\n";
            return 0;
        }
        case ExperimentType::tf: {
            if (rc.omega_list.empty())
                throw ConfigError("tf: model.omega_list is required");
            nlohmann::json arr = nlohmann::json::array();
            bool all_ok = true;
            for (double w : rc.omega_list) {
                ModelParams prm = rc.model;
                prm.omega = w;
                SolverConfig cfg = rc.solver;
                if (cfg.init.kind == InitSpec::Kind::auto_default)
                    cfg.init = InitSpec::thomas_fermi();
                GroundStateResult r = action_ground_state(prm, grid, cfg);
                const double errv = tf_compare(r, prm);
                all_ok = all_ok && r.converged;
                arr.push_back({{"omega", w},
                               {"tf_l2_error", errv},
                               {"mass", r.diags.mass},
                               {"converged", r.converged}});
                out << "omega=" << format_g17(w) << " tf_error=" << format_g17(errv) << "\n";
            }
            std::ofstream(outpath("tf.json")) << arr.dump(2) << "\n";
            return all_ok ? 0 : 1;
        }
        case ExperimentType::lambda0: {
            auto [lam, mode] = linear_ground_mode(rc.model.potential, rc.model.Omega, grid,
                                                  rc.solver);
            if (rc.write_fields) {
                ModelParams eff = rc.model;
                eff.beta = 0.0;
                eff.omega = -lam;
                write_field(mode, eff, outpath("mode.field"));
            }
            nlohmann::json j{{"lambda0", lam}, {"Omega", rc.model.Omega}};
            std::ofstream(outpath("lambda0.json")) << j.dump(2) << "\n";
            out << "lambda0=" << format_g17(lam) << "\n";
            return 0;
        }
        case ExperimentType::info:
        case ExperimentType::none:
            break;
    }
    throw ConfigError("no experiment selected");
}

}  // namespace rnls
