#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "voxrec/projection.hpp"
#include "voxrec/voxel.hpp"

namespace voxrec {

/// One weak-supervision observation: a camera and its binary silhouette.
struct View {
    Camera camera;
    MaskImage mask;
};

using ViewSet = std::vector<View>;

inline void validate_views(const ViewSet& views) {
    if (views.empty()) throw std::invalid_argument("view set is empty");
    for (const View& v : views)
        if (v.mask.width() != v.camera.width() || v.mask.height() != v.camera.height())
            throw std::invalid_argument("view: mask size does not match camera image size");
}

namespace detail {
constexpr double kCeEps = 1e-7;
}

/// Mean per-pixel binary cross-entropy. Predictions are clamped to
/// [1e-7, 1 - 1e-7] before the logs; the target must be binary.
inline double pixel_ce(const MaskImage& pred, const MaskImage& target) {
    if (pred.width() != target.width() || pred.height() != target.height())
        throw std::invalid_argument("pixel_ce: image dimensions differ");
    double sum = 0.0;
    for (std::size_t k = 0; k < pred.size(); ++k) {
        const double t = target[k];
        if (t != 0.0 && t != 1.0)
            throw std::invalid_argument("pixel_ce: target mask is not binary");
        const double p = std::clamp(pred[k], detail::kCeEps, 1.0 - detail::kCeEps);
        sum -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    }
    return sum / static_cast<double>(pred.size());
}

/// d pixel_ce / d pred, elementwise. Zero where the clamp is active, so the
/// result is the exact derivative of the implemented forward map.
inline MaskImage pixel_ce_grad(const MaskImage& pred, const MaskImage& target) {
    if (pred.width() != target.width() || pred.height() != target.height())
        throw std::invalid_argument("pixel_ce_grad: image dimensions differ");
    MaskImage grad(pred.width(), pred.height());
    const double inv_n = 1.0 / static_cast<double>(pred.size());
    for (int j = 0; j < pred.height(); ++j)
        for (int i = 0; i < pred.width(); ++i) {
            const double p = pred.at(i, j);
            if (p < detail::kCeEps || p > 1.0 - detail::kCeEps) continue;
            const double t = target.at(i, j);
            grad.at(i, j) = (-t / p + (1.0 - t) / (1.0 - p)) * inv_n;
        }
    return grad;
}

/// Mean over views of the silhouette cross-entropy of the rendered grid.
inline double reproj_loss(const VoxelGrid& grid, const ViewSet& views) {
    validate_views(views);
    double sum = 0.0;
    for (const View& v : views) sum += pixel_ce(rp_forward(grid, v.camera), v.mask);
    return sum / static_cast<double>(views.size());
}

struct ReprojResult {
    double loss;
    std::vector<double> logit_grad;
};

/// Loss and exact gradient of reproj_loss(occupancy(lg), views) with respect
/// to the logits: cross-entropy gradient, routed through the max-pooling
/// subgradient, times the logistic derivative. `traversals` must hold one
/// precomputed entry per view.
inline ReprojResult reproj_grad(const LogitGrid& lg, const ViewSet& views,
                                std::span<const PixelTraversals> traversals) {
    validate_views(views);
    if (traversals.size() != views.size())
        throw std::invalid_argument("reproj_grad: traversal count does not match views");
    const VoxelGrid grid = occupancy(lg);
    const double inv_m = 1.0 / static_cast<double>(views.size());
    double loss = 0.0;
    std::vector<double> grad(lg.size(), 0.0);
    for (std::size_t v = 0; v < views.size(); ++v) {
        const MaskImage pred = rp_forward(grid, traversals[v]);
        loss += pixel_ce(pred, views[v].mask) * inv_m;
        MaskImage up = pixel_ce_grad(pred, views[v].mask);
        for (double& g : up.values()) g *= inv_m;
        const std::vector<double> vg = rp_backward(grid, traversals[v], up);
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += vg[i];
    }
    for (std::size_t i = 0; i < grad.size(); ++i) {
        const double p = grid[i];
        grad[i] *= p * (1.0 - p);
    }
    return {loss, std::move(grad)};
}

inline ReprojResult reproj_grad(const LogitGrid& lg, const ViewSet& views) {
    std::vector<PixelTraversals> traversals;
    traversals.reserve(views.size());
    for (const View& v : views) traversals.emplace_back(lg.geometry(), v.camera);
    return reproj_grad(lg, views, traversals);
}

}  // namespace voxrec
