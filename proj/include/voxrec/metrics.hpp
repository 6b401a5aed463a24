#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "voxrec/voxel.hpp"

namespace voxrec {

/// Intersection-over-union of the binarized prediction against a binary
/// ground truth. Both grids empty counts as a perfect match (IOU 1).
inline double iou(const VoxelGrid& pred, const VoxelGrid& gt, double tau = 0.4) {
    if (!(pred.geometry() == gt.geometry()))
        throw std::invalid_argument("iou: grid geometries differ");
    const VoxelGrid pb = binarize(pred, tau);
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < pb.size(); ++i) {
        const bool a = pb[i] != 0.0;
        const bool b = gt[i] >= 0.5;
        inter += a && b;
        uni += a || b;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Non-interpolated average precision of confidences against binary labels.
/// Elements are ranked by descending value, ties broken by ascending index.
/// No positives at all is reported as a perfect 1.
inline double average_precision(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size())
        throw std::invalid_argument("average_precision: size mismatch");
    std::vector<std::size_t> order(pred.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pred[a] > pred[b]; });
    std::size_t positives = 0;
    for (double t : target) positives += t >= 0.5;
    if (positives == 0) return 1.0;
    double ap = 0.0;
    std::size_t hits = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (target[order[rank]] >= 0.5) {
            ++hits;
            ap += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
    }
    return ap / static_cast<double>(positives);
}

inline double average_precision(const VoxelGrid& pred, const VoxelGrid& gt) {
    if (!(pred.geometry() == gt.geometry()))
        throw std::invalid_argument("average_precision: grid geometries differ");
    return average_precision(std::span<const double>(pred.values()),
                             std::span<const double>(gt.values()));
}

/// Visualization export entry. Voxels above 0.6 are the solid "high" class
/// (pure red); occupancy in [0.1, 0.6] grades linearly from green (0.1) to
/// red (0.6); anything below 0.1 is omitted.
struct ColoredVoxel {
    int x, y, z;
    int r, g, b;
    bool high;
    double grade;  // (p - 0.1) / 0.5 for graded voxels; 1 for the high class
};

inline std::vector<ColoredVoxel> export_colored(const VoxelGrid& grid) {
    std::vector<ColoredVoxel> out;
    const int n = grid.n();
    for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy)
            for (int iz = 0; iz < n; ++iz) {
                const double p = grid.at(ix, iy, iz);
                if (p < 0.1) continue;
                if (p > 0.6) {
                    out.push_back({ix, iy, iz, 255, 0, 0, true, 1.0});
                } else {
                    const double s = (p - 0.1) / 0.5;
                    const int r = static_cast<int>(std::lround(255.0 * s));
                    out.push_back({ix, iy, iz, r, 255 - r, 0, false, s});
                }
            }
    return out;
}

}  // namespace voxrec
