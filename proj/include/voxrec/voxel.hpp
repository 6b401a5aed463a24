#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "voxrec/geometry.hpp"
#include "voxrec/rng.hpp"

namespace voxrec {

/// Cubic lattice of n x n x n cells over the axis-aligned cube [lo, hi]^3.
/// Linear storage order is fixed: x slowest, then y, then z fastest.
struct GridGeometry {
    int n = 32;
    double lo = -0.5;
    double hi = 0.5;

    double side() const { return (hi - lo) / n; }
    std::size_t cells() const { return static_cast<std::size_t>(n) * n * n; }
    std::size_t index(int ix, int iy, int iz) const {
        return (static_cast<std::size_t>(ix) * n + iy) * n + iz;
    }
    Vec3 center() const {
        const double c = 0.5 * (lo + hi);
        return Vec3(c, c, c);
    }
    Vec3 cell_center(int ix, int iy, int iz) const {
        const double s = side();
        return Vec3(lo + (ix + 0.5) * s, lo + (iy + 0.5) * s, lo + (iz + 0.5) * s);
    }
    Vec3 cell_corner(int ix, int iy, int iz) const {
        const double s = side();
        return Vec3(lo + ix * s, lo + iy * s, lo + iz * s);
    }
    double half_diagonal() const { return 0.5 * (hi - lo) * std::sqrt(3.0); }

    void validate() const {
        if (n <= 0) throw std::invalid_argument("grid: resolution must be positive");
        if (!(hi > lo)) throw std::invalid_argument("grid: extent must satisfy hi > lo");
    }
    bool operator==(const GridGeometry&) const = default;
};

/// Occupancy probabilities in [0, 1] over a GridGeometry.
class VoxelGrid {
public:
    VoxelGrid() : geom_{}, values_(geom_.cells(), 0.0) { geom_.validate(); }

    explicit VoxelGrid(const GridGeometry& geom, double fill = 0.0)
        : geom_(geom), values_(geom.cells(), fill) {
        geom_.validate();
        check_value(fill);
    }

    VoxelGrid(const GridGeometry& geom, std::vector<double> values)
        : geom_(geom), values_(std::move(values)) {
        geom_.validate();
        if (values_.size() != geom_.cells())
            throw std::invalid_argument("voxel grid: value count does not match resolution");
        for (double v : values_) check_value(v);
    }

    const GridGeometry& geometry() const { return geom_; }
    int n() const { return geom_.n; }
    double lo() const { return geom_.lo; }
    double hi() const { return geom_.hi; }
    std::size_t size() const { return values_.size(); }

    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    double at(int ix, int iy, int iz) const { return values_[geom_.index(ix, iy, iz)]; }
    double& at(int ix, int iy, int iz) { return values_[geom_.index(ix, iy, iz)]; }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    bool operator==(const VoxelGrid&) const = default;

private:
    static void check_value(double v) {
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("voxel grid: value outside [0, 1]");
    }

    GridGeometry geom_;
    std::vector<double> values_;
};

/// Unconstrained per-voxel logits; the optimization variable of the solver.
class LogitGrid {
public:
    explicit LogitGrid(const GridGeometry& geom, double fill = 0.0)
        : geom_(geom), logits_(geom.cells(), fill) {
        geom_.validate();
    }

    LogitGrid(const GridGeometry& geom, std::vector<double> logits)
        : geom_(geom), logits_(std::move(logits)) {
        geom_.validate();
        if (logits_.size() != geom_.cells())
            throw std::invalid_argument("logit grid: value count does not match resolution");
    }

    const GridGeometry& geometry() const { return geom_; }
    int n() const { return geom_.n; }
    std::size_t size() const { return logits_.size(); }
    double operator[](std::size_t i) const { return logits_[i]; }
    double& operator[](std::size_t i) { return logits_[i]; }
    const std::vector<double>& values() const { return logits_; }
    std::vector<double>& values() { return logits_; }

private:
    GridGeometry geom_;
    std::vector<double> logits_;
};

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Elementwise logistic squashing of logits into occupancy probabilities.
inline VoxelGrid occupancy(const LogitGrid& lg) {
    VoxelGrid out(lg.geometry());
    for (std::size_t i = 0; i < lg.size(); ++i) out[i] = logistic(lg[i]);
    return out;
}

/// Hard threshold: value >= tau maps to 1, else 0. tau must be in (0, 1).
inline VoxelGrid binarize(const VoxelGrid& g, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("binarize: tau outside (0, 1)");
    VoxelGrid out(g.geometry());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i] >= tau ? 1.0 : 0.0;
    return out;
}

enum class ShapeKind { box, cup, thin_plate, chair_l };

inline const char* to_string(ShapeKind k) {
    switch (k) {
        case ShapeKind::box: return "box";
        case ShapeKind::cup: return "cup";
        case ShapeKind::thin_plate: return "thin_plate";
        case ShapeKind::chair_l: return "chair_l";
    }
    return "?";
}

inline ShapeKind shape_kind_from_string(const std::string& s) {
    if (s == "box") return ShapeKind::box;
    if (s == "cup") return ShapeKind::cup;
    if (s == "thin_plate") return ShapeKind::thin_plate;
    if (s == "chair_l") return ShapeKind::chair_l;
    throw std::invalid_argument("unknown shape kind: " + s);
}

/// Size ratios for the procedural shapes. All ratios are relative to the
/// grid half-extent (for radii/half-sizes) or full extent (for heights).
struct ShapeParams {
    // box: half-size per axis as a fraction of the half-extent.
    double box_rx = 0.5, box_ry = 0.5, box_rz = 0.5;
    // cup: open-top cylinder with a solid bottom, axis along z.
    double cup_outer = 0.7;    // outer radius / half-extent
    double cup_wall = 0.22;    // wall thickness / half-extent
    double cup_height = 0.75;  // height / full extent
    double cup_bottom = 0.15;  // bottom slab height / full extent
    // thin_plate: one-voxel plate through the grid center.
    double plate_nx = 1.0, plate_ny = 1.0, plate_nz = 0.0;  // plane normal
    // chair_l: seat slab plus backrest slab.
    double chair_width = 0.7;   // along y, fraction of full extent
    double chair_depth = 0.7;   // along x
    double seat_height = 0.45;  // seat top z, fraction of full extent
    double seat_thickness = 0.16;
    double back_thickness = 0.16;
    double back_height = 0.85;  // backrest top z, fraction of full extent

    bool operator==(const ShapeParams&) const = default;
};

/// Procedural binary ground-truth shape. Every shape keeps at least one
/// empty voxel of margin to each grid face.
inline VoxelGrid gen_shape(ShapeKind kind, int n, const ShapeParams& p = {}) {
    if (n < 8) throw std::invalid_argument("gen_shape: resolution must be at least 8");
    GridGeometry geom{n, -0.5, 0.5};
    const double half = 0.5 * (geom.hi - geom.lo);
    const double extent = geom.hi - geom.lo;
    const double side = geom.side();
    const double margin_hi = half - side;  // max |coordinate| with 1-voxel margin
    VoxelGrid grid(geom);

    auto fill = [&](auto&& occupied) {
        for (int ix = 0; ix < n; ++ix)
            for (int iy = 0; iy < n; ++iy)
                for (int iz = 0; iz < n; ++iz) {
                    const Vec3 c = geom.cell_center(ix, iy, iz) - geom.center();
                    if (occupied(c)) grid.at(ix, iy, iz) = 1.0;
                }
    };

    switch (kind) {
        case ShapeKind::box: {
            if (!(p.box_rx > 0.0 && p.box_ry > 0.0 && p.box_rz > 0.0))
                throw std::invalid_argument("gen_shape: box half-sizes must be positive");
            const double hx = std::min(p.box_rx * half, margin_hi);
            const double hy = std::min(p.box_ry * half, margin_hi);
            const double hz = std::min(p.box_rz * half, margin_hi);
            fill([&](const Vec3& c) {
                return std::abs(c.x()) <= hx && std::abs(c.y()) <= hy && std::abs(c.z()) <= hz;
            });
            break;
        }
        case ShapeKind::cup: {
            if (!(p.cup_wall > 0.0) || !(p.cup_bottom > 0.0) || !(p.cup_outer > p.cup_wall) ||
                !(p.cup_height > p.cup_bottom))
                throw std::invalid_argument("gen_shape: degenerate cup parameters");
            const double r_outer = std::min(p.cup_outer * half, margin_hi);
            const double wall = std::max(p.cup_wall * half, side);  // at least one voxel thick
            const double r_inner = r_outer - wall;
            if (r_inner < 1.5 * side)
                throw std::invalid_argument("gen_shape: cup interior too small at this resolution");
            const double z0 = -margin_hi;
            const double z1 = std::min(z0 + p.cup_height * extent, margin_hi);
            const double z_bottom = z0 + std::max(p.cup_bottom * extent, side);
            fill([&](const Vec3& c) {
                if (c.z() < z0 || c.z() > z1) return false;
                const double rho = std::hypot(c.x(), c.y());
                if (rho > r_outer) return false;
                return c.z() <= z_bottom || rho >= r_inner;
            });
            break;
        }
        case ShapeKind::thin_plate: {
            Vec3 normal(p.plate_nx, p.plate_ny, p.plate_nz);
            if (normal.norm() < 1e-12)
                throw std::invalid_argument("gen_shape: plate normal is zero");
            normal.normalize();
            fill([&](const Vec3& c) {
                if (std::abs(c.x()) > margin_hi || std::abs(c.y()) > margin_hi ||
                    std::abs(c.z()) > margin_hi)
                    return false;
                return std::abs(normal.dot(c)) <= 0.5 * side;
            });
            break;
        }
        case ShapeKind::chair_l: {
            if (!(p.seat_thickness > 0.0) || !(p.back_thickness > 0.0) ||
                !(p.back_height > p.seat_height) || !(p.seat_height > p.seat_thickness))
                throw std::invalid_argument("gen_shape: degenerate chair parameters");
            const double hw = std::min(0.5 * p.chair_width * extent, margin_hi);
            const double hd = std::min(0.5 * p.chair_depth * extent, margin_hi);
            const double z_base = -margin_hi;
            const double seat_top = std::min(z_base + p.seat_height * extent, margin_hi);
            const double seat_bot = seat_top - std::max(p.seat_thickness * extent, side);
            const double back_top = std::min(z_base + p.back_height * extent, margin_hi);
            const double back_front = -hd + std::max(p.back_thickness * extent, side);
            fill([&](const Vec3& c) {
                if (std::abs(c.y()) > hw || c.x() < -hd || c.x() > hd) return false;
                const bool in_seat = c.z() >= seat_bot && c.z() <= seat_top;
                const bool in_back = c.x() <= back_front && c.z() >= seat_bot && c.z() <= back_top;
                return in_seat || in_back;
            });
            break;
        }
    }
    return grid;
}

/// Randomized parameters for one shape of the given kind, within ranges that
/// are valid for resolutions >= 8.
inline ShapeParams random_shape_params(ShapeKind kind, Rng& rng) {
    ShapeParams p;
    switch (kind) {
        case ShapeKind::box:
            p.box_rx = rng.uniform(0.3, 0.85);
            p.box_ry = rng.uniform(0.3, 0.85);
            p.box_rz = rng.uniform(0.3, 0.85);
            break;
        case ShapeKind::cup:
            p.cup_outer = rng.uniform(0.62, 0.85);
            p.cup_wall = rng.uniform(0.14, 0.24);
            p.cup_height = rng.uniform(0.6, 0.9);
            p.cup_bottom = rng.uniform(0.1, 0.2);
            break;
        case ShapeKind::thin_plate: {
            p.plate_nx = rng.uniform(0.5, 1.0);
            p.plate_ny = rng.uniform(0.5, 1.0);
            p.plate_nz = rng.uniform(0.0, 0.5);
            break;
        }
        case ShapeKind::chair_l:
            p.chair_width = rng.uniform(0.5, 0.85);
            p.chair_depth = rng.uniform(0.5, 0.85);
            p.seat_height = rng.uniform(0.35, 0.55);
            p.seat_thickness = rng.uniform(0.12, 0.2);
            p.back_thickness = rng.uniform(0.12, 0.2);
            p.back_height = rng.uniform(0.7, 0.9);
            break;
    }
    return p;
}

/// Pool of unlabeled binary shapes with randomized, pairwise-distinct
/// parameters. Kinds cycle through `mix`. Deterministic given the seed.
inline std::vector<VoxelGrid> shape_pool(std::uint64_t seed, int count, int n,
                                         const std::vector<ShapeKind>& mix) {
    if (count < 1) throw std::invalid_argument("shape_pool: count must be at least 1");
    if (mix.empty()) throw std::invalid_argument("shape_pool: kind mix is empty");
    Rng rng(seed);
    std::vector<VoxelGrid> pool;
    std::vector<ShapeParams> used;
    pool.reserve(count);
    for (int i = 0; i < count; ++i) {
        const ShapeKind kind = mix[i % mix.size()];
        ShapeParams p = random_shape_params(kind, rng);
        while (std::find(used.begin(), used.end(), p) != used.end())
            p = random_shape_params(kind, rng);
        used.push_back(p);
        pool.push_back(gen_shape(kind, n, p));
    }
    return pool;
}

}  // namespace voxrec
