#pragma once

#include <fstream>
#include <json.hpp>

#include "rnls/analysis.hpp"

namespace rnls {

// ---------------------------------------------------------------------------
// Tabular emission: CSV (fixed header, 17 significant digits) and JSON lines.
// Row order follows the input order; nothing here is reordered.
// ---------------------------------------------------------------------------

inline constexpr const char* kSweepCsvHeader =
    "omega,Omega,mass,action,energy,mu,lz_expect,n_vortices,iters,converged,residual,init_used";

inline std::string csv_row(const SweepRecord& r) {
    std::ostringstream os;
    os << format_g17(r.omega) << ',' << format_g17(r.Omega) << ',' << format_g17(r.mass) << ','
       << format_g17(r.action) << ',' << format_g17(r.energy) << ',' << format_g17(r.mu) << ','
       << format_g17(r.lz_expect) << ',' << r.n_vortices << ',' << r.iters << ','
       << (r.converged ? 1 : 0) << ',' << format_g17(r.residual) << ',' << r.init_used;
    return os.str();
}

inline nlohmann::json to_json(const SweepRecord& r) {
    return {{"omega", r.omega},
            {"Omega", r.Omega},
            {"mass", r.mass},
            {"action", r.action},
            {"energy", r.energy},
            {"mu", r.mu},
            {"lz_expect", r.lz_expect},
            {"n_vortices", r.n_vortices},
            {"iters", r.iters},
            {"converged", r.converged},
            {"residual", r.residual},
            {"init_used", r.init_used}};
}

inline nlohmann::json to_json(const LoopReport& r) {
    return {{"omega", r.omega},
            {"Omega", r.Omega},
            {"S_g", r.action_gs},
            {"mass", r.mass},
            {"E_g", r.energy_gs},
            {"mu_g", r.mu_g},
            {"e_rel_omega", r.e_rel_omega},
            {"e_rel_S", r.e_rel_S},
            {"converged", r.converged},
            {"n_vortices_action", r.n_vortices_action},
            {"n_vortices_energy", r.n_vortices_energy}};
}

inline nlohmann::json to_json(const JumpReport& r) {
    return {{"omega_critical", r.omega_critical},
            {"mass_below", r.mass_below},
            {"mass_above", r.mass_above},
            {"bracket_lo", r.bracket_lo},
            {"bracket_hi", r.bracket_hi},
            {"bracket_width", r.bracket_width},
            {"forbidden_lo", r.forbidden_lo},
            {"forbidden_hi", r.forbidden_hi}};
}

inline nlohmann::json to_json(const RateFit& f) {
    return {{"slope", f.slope},         {"intercept", f.intercept},
            {"r_squared", f.r_squared}, {"window_lo", f.window_lo},
            {"window_hi", f.window_hi}, {"n_points", f.n_points}};
}

inline nlohmann::json to_json(const OmegaCResult& r) {
    return {{"bracket_lo", r.lo},
            {"bracket_hi", r.hi},
            {"cross_bracket_lo", r.cross_lo},
            {"cross_bracket_hi", r.cross_hi},
            {"ambiguous", r.ambiguous},
            {"action_reference", r.action_reference}};
}

enum class TableFormat { csv, json_lines };

inline void emit_records(const std::vector<SweepRecord>& records, TableFormat fmt,
                         const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("emit_records: cannot open " + path);
    if (fmt == TableFormat::csv) {
        os << kSweepCsvHeader << '\n';
        for (const auto& r : records) os << csv_row(r) << '\n';
    } else {
        for (const auto& r : records) os << to_json(r).dump() << '\n';
    }
    if (!os) throw IoError("emit_records: write failed: " + path);
}

template <class Report>
inline void emit_reports(const std::vector<Report>& reports, TableFormat fmt,
                         const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("emit_reports: cannot open " + path);
    if (fmt == TableFormat::csv) {
        // header from the JSON field names, deterministic (sorted) order
        nlohmann::json probe = reports.empty() ? nlohmann::json::object() : to_json(reports.front());
        bool first = true;
        for (auto it = probe.begin(); it != probe.end(); ++it) {
            os << (first ? "" : ",") << it.key();
            first = false;
        }
        os << '\n';
        for (const auto& r : reports) {
            nlohmann::json j = to_json(r);
            first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) os << ',';
                first = false;
                if (it->is_number_float())
                    os << format_g17(it->get<double>());
                else
                    os << *it;
            }
            os << '\n';
        }
    } else {
        for (const auto& r : reports) os << to_json(r).dump() << '\n';
    }
    if (!os) throw IoError("emit_reports: write failed: " + path);
}

}  // namespace rnls
