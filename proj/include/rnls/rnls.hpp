#pragma once

// Umbrella header for the rnls library: spectral grids and FFT operators,
// variational functionals of the rotating defocusing NLS, gradient-flow
// ground-state solvers, experiment drivers, and file/table persistence.

#include "rnls/analysis.hpp"
#include "rnls/config.hpp"
#include "rnls/experiments.hpp"
#include "rnls/field_io.hpp"
#include "rnls/grid.hpp"
#include "rnls/model.hpp"
#include "rnls/potential.hpp"
#include "rnls/records.hpp"
#include "rnls/solver.hpp"
