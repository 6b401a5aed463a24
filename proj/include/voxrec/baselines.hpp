#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "voxrec/losses.hpp"
#include "voxrec/metrics.hpp"
#include "voxrec/voxel.hpp"

namespace voxrec {

/// Visual hull by voxel carving. A voxel survives only if its projected
/// footprint touches the foreground in every view; the footprint test
/// projects the voxel center and its eight corners and keeps the voxel if
/// any of the nine points lands on a foreground pixel. Points behind the
/// camera or outside the image count as background.
inline VoxelGrid carve(const GridGeometry& geom, const ViewSet& views) {
    validate_views(views);
    geom.validate();
    VoxelGrid hull(geom);
    const int n = geom.n;
    for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy)
            for (int iz = 0; iz < n; ++iz) {
                bool survives = true;
                for (const View& view : views) {
                    bool touches_foreground = false;
                    for (int corner = 0; corner < 9 && !touches_foreground; ++corner) {
                        Vec3 p;
                        if (corner == 8) {
                            p = geom.cell_center(ix, iy, iz);
                        } else {
                            p = geom.cell_corner(ix + (corner & 1), iy + ((corner >> 1) & 1),
                                                 iz + ((corner >> 2) & 1));
                        }
                        const auto px = project_point(view.camera, p);
                        if (!px) continue;
                        const int i = static_cast<int>(std::floor(px->u));
                        const int j = static_cast<int>(std::floor(px->v));
                        if (i < 0 || i >= view.mask.width() || j < 0 || j >= view.mask.height())
                            continue;
                        if (view.mask.at(i, j) >= 0.5) touches_foreground = true;
                    }
                    if (!touches_foreground) {
                        survives = false;
                        break;
                    }
                }
                if (survives) hull.at(ix, iy, iz) = 1.0;
            }
    return hull;
}

struct Retrieval {
    std::size_t index;
    VoxelGrid shape;
};

/// Nearest-neighbor retrieval from an unlabeled pool: the member with the
/// highest IOU against the binarized prediction wins, ties going to the
/// lowest index.
inline Retrieval nn_retrieve(const VoxelGrid& pred, std::span<const VoxelGrid> pool,
                             double tau = 0.4) {
    if (pool.empty()) throw std::invalid_argument("nn_retrieve: pool is empty");
    const VoxelGrid pb = binarize(pred, tau);
    std::size_t best = 0;
    double best_iou = -1.0;
    for (std::size_t k = 0; k < pool.size(); ++k) {
        if (!(pool[k].geometry() == pred.geometry()))
            throw std::invalid_argument("nn_retrieve: pool grid geometry differs from prediction");
        const double v = iou(pb, pool[k], 0.5);
        if (v > best_iou) {
            best_iou = v;
            best = k;
        }
    }
    return {best, pool[best]};
}

}  // namespace voxrec
