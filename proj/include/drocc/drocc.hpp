#pragma once

// Umbrella header for the drocc library.

#include "drocc/ambiguity.hpp"
#include "drocc/common.hpp"
#include "drocc/distribution.hpp"
#include "drocc/experiments.hpp"
#include "drocc/linalg.hpp"
#include "drocc/lp.hpp"
#include "drocc/problem.hpp"
#include "drocc/rng.hpp"
#include "drocc/set_distance.hpp"
#include "drocc/solver.hpp"
#include "drocc/stat_bounds.hpp"
#include "drocc/support.hpp"
#include "drocc/transport.hpp"
