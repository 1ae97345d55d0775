// Rotating ground state with a few vortices: Omega = 0.7, omega = -6. The
// multistart set breaks the radial symmetry; the winner carries the vortices.

#include <cstdio>

#include "rnls/rnls.hpp"

int main() {
    using namespace rnls;

    auto grid = Grid::make({{-9.0, 9.0, 128}, {-9.0, 9.0, 128}});
    ModelParams prm;
    prm.omega = -6.0;
    prm.Omega = 0.7;

    SolverConfig cfg;
    cfg.tau = 0.05;
    cfg.max_iters = 40000;

    GroundStateResult gs = action_ground_state(prm, grid, cfg);  // auto multistart
    VortexSet v = count_vortices(gs.field);
    std::printf("S = %.8f  mass = %.8f  <Lz> = %.6f  n_v = %d  init = %s\n", gs.diags.action,
                gs.diags.mass, gs.diags.lz_expect, v.count, gs.init_used.c_str());
    for (const auto& loc : v.locations)
        std::printf("  vortex near (%+.3f, %+.3f)\n", loc[0], loc[1]);
    return 0;
}
