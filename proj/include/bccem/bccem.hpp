#pragma once

// Umbrella header.

#include "bccem/bench.hpp"
#include "bccem/cem.hpp"
#include "bccem/centroid.hpp"
#include "bccem/config.hpp"
#include "bccem/gaussian.hpp"
#include "bccem/mpc.hpp"
#include "bccem/potential.hpp"
#include "bccem/rng.hpp"
#include "bccem/stats.hpp"
#include "bccem/svg.hpp"
#include "bccem/trust_region.hpp"
#include "bccem/vecmath.hpp"
