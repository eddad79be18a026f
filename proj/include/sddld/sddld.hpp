#pragma once

// Umbrella header for the sddld library: log-determinant estimation for
// symmetric diagonally dominant matrices via graph preconditioners and
// Monte Carlo trace sampling, with deterministic stretch-based bounds.

#include "sddld/chain.hpp"
#include "sddld/dense.hpp"
#include "sddld/elimination.hpp"
#include "sddld/errors.hpp"
#include "sddld/generate.hpp"
#include "sddld/lapsolve.hpp"
#include "sddld/logdet.hpp"
#include "sddld/mmio.hpp"
#include "sddld/pcg.hpp"
#include "sddld/reduction.hpp"
#include "sddld/rng.hpp"
#include "sddld/sparse.hpp"
#include "sddld/sparsify.hpp"
#include "sddld/stretch.hpp"
#include "sddld/trace.hpp"
#include "sddld/tree.hpp"
