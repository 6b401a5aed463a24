#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "voxrec/geometry.hpp"
#include "voxrec/voxel.hpp"

namespace voxrec {

/// Per-pixel foreground probability in [0, 1]. Row-major, y down.
class MaskImage {
public:
    MaskImage() = default;
    MaskImage(int width, int height, double fill = 0.0)
        : width_(width), height_(height), values_(static_cast<std::size_t>(width) * height, fill) {
        if (width <= 0 || height <= 0)
            throw std::invalid_argument("mask: image size must be positive");
        check_value(fill);
    }
    MaskImage(int width, int height, std::vector<double> values)
        : width_(width), height_(height), values_(std::move(values)) {
        if (width <= 0 || height <= 0)
            throw std::invalid_argument("mask: image size must be positive");
        if (values_.size() != static_cast<std::size_t>(width) * height)
            throw std::invalid_argument("mask: value count does not match size");
        for (double v : values_) check_value(v);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return values_.size(); }
    double at(int i, int j) const { return values_[static_cast<std::size_t>(j) * width_ + i]; }
    double& at(int i, int j) { return values_[static_cast<std::size_t>(j) * width_ + i]; }
    double operator[](std::size_t k) const { return values_[k]; }
    double& operator[](std::size_t k) { return values_[k]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    bool operator==(const MaskImage&) const = default;

private:
    static void check_value(double v) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("mask: value outside [0, 1]");
    }
    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
};

/// One voxel crossed by a ray: cell indices and the entry/exit parameters.
struct TraversalStep {
    int ix, iy, iz;
    double t_in;
    double t_out;
};

using TraversalRecord = std::vector<TraversalStep>;

/// Exact hit set of a ray against the grid: slab test against the bounding
/// box, then incremental 3D DDA stepping. Voxels are reported in visitation
/// order with strictly positive intersection length; a miss yields an empty
/// record. Only the t > 0 part of the ray counts.
inline TraversalRecord traverse(const GridGeometry& geom, const Ray& ray) {
    geom.validate();
    const Vec3& o = ray.origin;
    const Vec3& d = ray.direction;

    // Slab test: entry/exit parameters of the [lo, hi]^3 box.
    double t_enter = 0.0;
    double t_exit = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        if (d[a] != 0.0) {
            const double ta = (geom.lo - o[a]) / d[a];
            const double tb = (geom.hi - o[a]) / d[a];
            t_enter = std::max(t_enter, std::min(ta, tb));
            t_exit = std::min(t_exit, std::max(ta, tb));
        } else if (o[a] < geom.lo || o[a] > geom.hi) {
            return {};
        }
    }
    if (!(t_exit > t_enter)) return {};

    const int n = geom.n;
    const double side = geom.side();
    const Vec3 entry = o + t_enter * d;

    std::array<int, 3> cell;
    std::array<int, 3> step;
    std::array<double, 3> t_next;   // parameter at the next boundary crossing per axis
    std::array<double, 3> t_delta;  // parameter advance per cell per axis
    for (int a = 0; a < 3; ++a) {
        int c = static_cast<int>(std::floor((entry[a] - geom.lo) / side));
        cell[a] = std::clamp(c, 0, n - 1);
        if (d[a] > 0.0) {
            step[a] = 1;
            t_next[a] = (geom.lo + (cell[a] + 1) * side - o[a]) / d[a];
            t_delta[a] = side / d[a];
        } else if (d[a] < 0.0) {
            step[a] = -1;
            t_next[a] = (geom.lo + cell[a] * side - o[a]) / d[a];
            t_delta[a] = -side / d[a];
        } else {
            step[a] = 0;
            t_next[a] = std::numeric_limits<double>::infinity();
            t_delta[a] = std::numeric_limits<double>::infinity();
        }
    }

    TraversalRecord record;
    double t = t_enter;
    const int max_steps = 3 * n + 6;
    for (int iter = 0; iter < max_steps; ++iter) {
        const int axis = (t_next[0] <= t_next[1] && t_next[0] <= t_next[2]) ? 0
                         : (t_next[1] <= t_next[2])                         ? 1
                                                                            : 2;
        const double t_boundary = t_next[axis];
        const double t_end = std::min(t_boundary, t_exit);
        if (t_end > t) record.push_back({cell[0], cell[1], cell[2], t, t_end});
        if (t_boundary >= t_exit) break;
        cell[axis] += step[axis];
        if (cell[axis] < 0 || cell[axis] >= n) break;
        t = t_boundary;
        t_next[axis] += t_delta[axis];
    }
    return record;
}

/// Hit lists for every pixel of a camera against a fixed grid geometry.
/// Traversal depends only on geometry, so rendering many grids from the same
/// viewpoint can reuse this. Linear voxel indices, near-to-far order.
class PixelTraversals {
public:
    PixelTraversals(const GridGeometry& geom, const Camera& cam)
        : geom_(geom), width_(cam.width()), height_(cam.height()) {
        offsets_.reserve(static_cast<std::size_t>(width_) * height_ + 1);
        offsets_.push_back(0);
        for (int j = 0; j < height_; ++j)
            for (int i = 0; i < width_; ++i) {
                for (const TraversalStep& s : traverse(geom, pixel_ray(cam, i, j)))
                    hits_.push_back(static_cast<std::uint32_t>(geom.index(s.ix, s.iy, s.iz)));
                offsets_.push_back(hits_.size());
            }
    }

    const GridGeometry& geometry() const { return geom_; }
    int width() const { return width_; }
    int height() const { return height_; }

    std::span<const std::uint32_t> hits(int i, int j) const {
        const std::size_t k = static_cast<std::size_t>(j) * width_ + i;
        return {hits_.data() + offsets_[k], hits_.data() + offsets_[k + 1]};
    }

private:
    GridGeometry geom_;
    int width_, height_;
    std::vector<std::size_t> offsets_;
    std::vector<std::uint32_t> hits_;
};

/// Silhouette rendering by max pooling occupancy along each pixel's ray.
/// Pixels whose rays miss the grid read 0.
inline MaskImage rp_forward(const VoxelGrid& grid, const PixelTraversals& trav) {
    if (!(grid.geometry() == trav.geometry()))
        throw std::invalid_argument("rp_forward: grid geometry does not match traversals");
    MaskImage mask(trav.width(), trav.height());
    for (int j = 0; j < trav.height(); ++j)
        for (int i = 0; i < trav.width(); ++i) {
            double m = 0.0;
            for (std::uint32_t idx : trav.hits(i, j)) m = std::max(m, grid[idx]);
            mask.at(i, j) = m;
        }
    return mask;
}

inline MaskImage rp_forward(const VoxelGrid& grid, const Camera& cam) {
    return rp_forward(grid, PixelTraversals(grid.geometry(), cam));
}

/// Subgradient of rp_forward: each pixel's upstream gradient goes to the
/// first voxel along the ray attaining the per-ray maximum. Accumulates over
/// pixels in row-major order.
inline std::vector<double> rp_backward(const VoxelGrid& grid, const PixelTraversals& trav,
                                       const MaskImage& upstream) {
    if (!(grid.geometry() == trav.geometry()))
        throw std::invalid_argument("rp_backward: grid geometry does not match traversals");
    if (upstream.width() != trav.width() || upstream.height() != trav.height())
        throw std::invalid_argument("rp_backward: upstream size does not match camera");
    std::vector<double> grad(grid.size(), 0.0);
    for (int j = 0; j < trav.height(); ++j)
        for (int i = 0; i < trav.width(); ++i) {
            const auto hits = trav.hits(i, j);
            if (hits.empty()) continue;
            std::uint32_t best = hits[0];
            double best_val = grid[hits[0]];
            for (std::uint32_t idx : hits.subspan(1))
                if (grid[idx] > best_val) {
                    best_val = grid[idx];
                    best = idx;
                }
            grad[best] += upstream.at(i, j);
        }
    return grad;
}

inline std::vector<double> rp_backward(const VoxelGrid& grid, const Camera& cam,
                                       const MaskImage& upstream) {
    return rp_backward(grid, PixelTraversals(grid.geometry(), cam), upstream);
}

/// Trilinear occupancy interpolation at a world point; 0 outside the extent.
/// Values live at voxel centers; missing corners beyond the lattice read 0.
inline double sample_trilinear(const VoxelGrid& grid, const Vec3& p) {
    const GridGeometry& g = grid.geometry();
    for (int a = 0; a < 3; ++a)
        if (p[a] < g.lo || p[a] > g.hi) return 0.0;
    const double s = g.side();
    std::array<int, 3> i0;
    std::array<double, 3> f;
    for (int a = 0; a < 3; ++a) {
        const double x = (p[a] - g.lo) / s - 0.5;
        const double fl = std::floor(x);
        i0[a] = static_cast<int>(fl);
        f[a] = x - fl;
    }
    double acc = 0.0;
    for (int dx = 0; dx < 2; ++dx)
        for (int dy = 0; dy < 2; ++dy)
            for (int dz = 0; dz < 2; ++dz) {
                const int ix = i0[0] + dx, iy = i0[1] + dy, iz = i0[2] + dz;
                if (ix < 0 || ix >= g.n || iy < 0 || iy >= g.n || iz < 0 || iz >= g.n) continue;
                const double w = (dx ? f[0] : 1.0 - f[0]) * (dy ? f[1] : 1.0 - f[1]) *
                                 (dz ? f[2] : 1.0 - f[2]);
                acc += w * grid.at(ix, iy, iz);
            }
    return acc;
}

/// Depth range that covers the whole grid from this camera: distance to the
/// grid center plus/minus the half-diagonal.
inline std::pair<double, double> default_depth_range(const GridGeometry& geom, const Camera& cam) {
    const double dist = (geom.center() - cam.center()).norm();
    const double r = geom.half_diagonal();
    return {std::max(dist - r, 1e-6), dist + r};
}

/// Sampling-based projection: D points uniformly spaced in ray parameter
/// over [d_min, d_max], trilinear occupancy at each, max over samples.
/// Undersampling aliases thin structures away; that is the point of keeping
/// this projector around as a baseline.
inline MaskImage gs_forward(const VoxelGrid& grid, const Camera& cam, int depth_samples,
                            double d_min, double d_max) {
    if (depth_samples < 2) throw std::invalid_argument("gs_forward: need at least 2 depth samples");
    if (!(d_min > 0.0 && d_max > d_min))
        throw std::invalid_argument("gs_forward: invalid depth range");
    MaskImage mask(cam.width(), cam.height());
    const double step = (d_max - d_min) / (depth_samples - 1);
    for (int j = 0; j < cam.height(); ++j)
        for (int i = 0; i < cam.width(); ++i) {
            const Ray ray = pixel_ray(cam, i, j);
            double m = 0.0;
            for (int k = 0; k < depth_samples; ++k) {
                const Vec3 p = ray.origin + (d_min + k * step) * ray.direction;
                m = std::max(m, sample_trilinear(grid, p));
            }
            mask.at(i, j) = m;
        }
    return mask;
}

inline MaskImage gs_forward(const VoxelGrid& grid, const Camera& cam, int depth_samples) {
    const auto [d0, d1] = default_depth_range(grid.geometry(), cam);
    return gs_forward(grid, cam, depth_samples, d0, d1);
}

/// Subgradient of gs_forward: the first sample attaining the per-pixel max
/// routes the upstream gradient to its eight interpolation corners.
inline std::vector<double> gs_backward(const VoxelGrid& grid, const Camera& cam,
                                       int depth_samples, double d_min, double d_max,
                                       const MaskImage& upstream) {
    if (depth_samples < 2) throw std::invalid_argument("gs_backward: need at least 2 depth samples");
    if (!(d_min > 0.0 && d_max > d_min))
        throw std::invalid_argument("gs_backward: invalid depth range");
    if (upstream.width() != cam.width() || upstream.height() != cam.height())
        throw std::invalid_argument("gs_backward: upstream size does not match camera");
    const GridGeometry& g = grid.geometry();
    std::vector<double> grad(grid.size(), 0.0);
    const double step = (d_max - d_min) / (depth_samples - 1);
    for (int j = 0; j < cam.height(); ++j)
        for (int i = 0; i < cam.width(); ++i) {
            const Ray ray = pixel_ray(cam, i, j);
            double best = -1.0;
            Vec3 best_p = Vec3::Zero();
            bool best_inside = false;
            for (int k = 0; k < depth_samples; ++k) {
                const Vec3 p = ray.origin + (d_min + k * step) * ray.direction;
                const double v = sample_trilinear(grid, p);
                if (v > best) {
                    best = v;
                    best_p = p;
                    best_inside = p[0] >= g.lo && p[0] <= g.hi && p[1] >= g.lo && p[1] <= g.hi &&
                                  p[2] >= g.lo && p[2] <= g.hi;
                }
            }
            if (!best_inside) continue;
            const double up = upstream.at(i, j);
            if (up == 0.0) continue;
            const double s = g.side();
            std::array<int, 3> i0;
            std::array<double, 3> f;
            for (int a = 0; a < 3; ++a) {
                const double x = (best_p[a] - g.lo) / s - 0.5;
                const double fl = std::floor(x);
                i0[a] = static_cast<int>(fl);
                f[a] = x - fl;
            }
            for (int dx = 0; dx < 2; ++dx)
                for (int dy = 0; dy < 2; ++dy)
                    for (int dz = 0; dz < 2; ++dz) {
                        const int ix = i0[0] + dx, iy = i0[1] + dy, iz = i0[2] + dz;
                        if (ix < 0 || ix >= g.n || iy < 0 || iy >= g.n || iz < 0 || iz >= g.n)
                            continue;
                        const double w = (dx ? f[0] : 1.0 - f[0]) * (dy ? f[1] : 1.0 - f[1]) *
                                         (dz ? f[2] : 1.0 - f[2]);
                        grad[g.index(ix, iy, iz)] += up * w;
                    }
        }
    return grad;
}

}  // namespace voxrec
