#pragma once

// Umbrella header for the voxrec library: silhouette-supervised voxel
// reconstruction with a learned log-barrier manifold constraint, classical
// baselines, and the finite-distribution adversarial-optimality oracle.

#include "voxrec/barrier.hpp"
#include "voxrec/baselines.hpp"
#include "voxrec/geometry.hpp"
#include "voxrec/io.hpp"
#include "voxrec/losses.hpp"
#include "voxrec/metrics.hpp"
#include "voxrec/projection.hpp"
#include "voxrec/rng.hpp"
#include "voxrec/solver.hpp"
#include "voxrec/theory.hpp"
#include "voxrec/voxel.hpp"
