#pragma once

// Decentralized multi-radar target allocation: uncertainty-ellipse
// geometry, Kalman tracking, the two-round consensus auction, the exact
// centralized solvers and the deterministic simulator.

#include "radalloc/allocation.hpp"
#include "radalloc/cbba.hpp"
#include "radalloc/geometry.hpp"
#include "radalloc/ids.hpp"
#include "radalloc/oracle.hpp"
#include "radalloc/rng.hpp"
#include "radalloc/scenario.hpp"
#include "radalloc/sim.hpp"
#include "radalloc/svg.hpp"
#include "radalloc/tracking.hpp"
