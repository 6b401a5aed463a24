#pragma once

// Shared fixtures for the test suites: deterministic random rotations,
// cameras, and grids.

#include <cmath>

#include "voxrec/geometry.hpp"
#include "voxrec/rng.hpp"
#include "voxrec/voxel.hpp"

namespace testutil {

using voxrec::Camera;
using voxrec::GridGeometry;
using voxrec::LogitGrid;
using voxrec::Mat3;
using voxrec::Rng;
using voxrec::Vec3;
using voxrec::VoxelGrid;

/// Uniform random rotation from a normalized quaternion of four normals.
inline Mat3 random_rotation(Rng& rng) {
    double q[4];
    double norm = 0.0;
    for (double& v : q) {
        v = rng.normal();
        norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : q) v /= norm;
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Mat3 r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

inline Camera random_camera(Rng& rng, int width = 64, int height = 48) {
    const Mat3 rot = random_rotation(rng);
    const Vec3 center(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0));
    const double fx = rng.uniform(40.0, 160.0);
    const double fy = rng.uniform(40.0, 160.0);
    const double cx = width / 2.0 + rng.uniform(-4.0, 4.0);
    const double cy = height / 2.0 + rng.uniform(-4.0, 4.0);
    return Camera(rot, center, fx, fy, cx, cy, width, height);
}

inline VoxelGrid random_grid(Rng& rng, int n, double lo = -0.5, double hi = 0.5) {
    GridGeometry geom{n, lo, hi};
    VoxelGrid g(geom);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = rng.uniform();
    return g;
}

inline LogitGrid random_logits(Rng& rng, int n, double scale = 2.0) {
    GridGeometry geom{n, -0.5, 0.5};
    LogitGrid lg(geom);
    for (std::size_t i = 0; i < lg.size(); ++i) lg[i] = rng.uniform(-scale, scale);
    return lg;
}

}  // namespace testutil
