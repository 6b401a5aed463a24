#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "voxrec/barrier.hpp"
#include "voxrec/losses.hpp"
#include "voxrec/projection.hpp"
#include "voxrec/rng.hpp"
#include "voxrec/voxel.hpp"

namespace voxrec {

struct SolverConfig {
    int iterations = 40000;
    double lr_f = 1e-2;  // drops by 10x after 10000 and again after 30000 iterations
    int batch_real = 8;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;

    void validate() const {
        if (iterations < 0) throw std::invalid_argument("solver: iterations must be nonnegative");
        if (!(lr_f > 0.0)) throw std::invalid_argument("solver: lr_f must be positive");
        if (batch_real < 1) throw std::invalid_argument("solver: batch_real must be at least 1");
    }
};

/// Step-decay schedule: lr_f until iteration 9999, lr_f/10 from 10000,
/// lr_f/100 from 30000.
inline double learning_rate(const SolverConfig& cfg, int iteration) {
    if (iteration >= 30000) return cfg.lr_f / 100.0;
    if (iteration >= 10000) return cfg.lr_f / 10.0;
    return cfg.lr_f;
}

/// First/second moment accumulators for Adam.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long step = 0;

    explicit AdamState(std::size_t size) : m(size, 0.0), v(size, 0.0) {}
};

/// One bias-corrected Adam update, in place.
inline void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad,
                      double lr, double beta1, double beta2, double eps) {
    if (params.size() != grad.size() || params.size() != state.m.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
}

struct LogEntry {
    int iteration;
    double reproj;
    double penalty;
    double disc_error;
    bool gated;
    double lr;
};

struct ReconResult {
    VoxelGrid grid;
    std::vector<LogEntry> log;
};

namespace detail {

struct ReconLoop {
    const ViewSet& views;
    const SolverConfig& cfg;
    GridGeometry geom;
    std::vector<PixelTraversals> traversals;

    ReconLoop(const ViewSet& v, const GridGeometry& g, const SolverConfig& c)
        : views(v), cfg(c), geom(g) {
        validate_views(views);
        cfg.validate();
        geom.validate();
        traversals.reserve(views.size());
        for (const View& view : views) traversals.emplace_back(geom, view.camera);
    }
};

}  // namespace detail

/// Barrier-constrained reconstruction: direct optimization of per-voxel
/// logits against the multi-view silhouette loss plus the learned log
/// barrier. Each iteration first trains the penalty function on the current
/// reconstruction (ring buffer of recent snapshots) against pool samples,
/// then takes one Adam step on the logits. Instance noise anneals linearly
/// to zero over the run. Deterministic given the config seed.
inline ReconResult reconstruct(const ViewSet& views, std::span<const VoxelGrid> pool,
                               const SolverConfig& cfg, const BarrierConfig& bcfg,
                               const GridGeometry& geom = {16, -0.5, 0.5}) {
    if (pool.empty()) throw std::invalid_argument("reconstruct: shape pool is empty");
    bcfg.validate();
    for (const VoxelGrid& x : pool)
        if (!(x.geometry() == geom))
            throw std::invalid_argument("reconstruct: pool grid geometry differs");

    detail::ReconLoop loop(views, geom, cfg);
    Rng rng(cfg.seed);
    Discriminator disc(geom.n, rng.bits());
    LogitGrid logits(geom, 0.0);
    AdamState adam(logits.size());
    std::deque<VoxelGrid> ring;
    std::vector<LogEntry> log;
    log.reserve(cfg.iterations);

    for (int iter = 0; iter < cfg.iterations; ++iter) {
        const VoxelGrid current = occupancy(logits);

        BarrierConfig step_cfg = bcfg;
        UpdateDiagnostics diag{0.0, 0.0, true};
        if (!bcfg.freeze) {
            ring.push_back(current);
            if (static_cast<int>(ring.size()) > cfg.batch_real) ring.pop_front();
            std::vector<VoxelGrid> recon_batch(ring.begin(), ring.end());
            std::vector<VoxelGrid> real_batch;
            real_batch.reserve(cfg.batch_real);
            for (int b = 0; b < cfg.batch_real; ++b)
                real_batch.push_back(pool[rng.index(pool.size())]);
            step_cfg.sigma_noise =
                bcfg.sigma_noise * (1.0 - static_cast<double>(iter) / cfg.iterations);
            diag = update_penalty(disc, recon_batch, real_batch, step_cfg, rng);
        }

        ReprojResult rp = reproj_grad(logits, views, loop.traversals);
        const double pen = penalty(disc, current, bcfg.t);
        const std::vector<double> pgrad = penalty_grad(disc, logits, bcfg.t);
        if (!std::isfinite(rp.loss) || !std::isfinite(pen))
            throw std::runtime_error("reconstruct: non-finite loss at iteration " +
                                     std::to_string(iter));
        for (std::size_t i = 0; i < rp.logit_grad.size(); ++i) rp.logit_grad[i] += pgrad[i];

        const double lr = learning_rate(cfg, iter);
        adam_step(adam, logits.values(), rp.logit_grad, lr, cfg.beta1, cfg.beta2, cfg.adam_eps);
        log.push_back({iter, rp.loss, pen, diag.error, diag.gated, lr});
    }
    return {occupancy(logits), std::move(log)};
}

/// Silhouette-only reconstruction: the same loop with the barrier removed.
inline ReconResult reconstruct_unconstrained(const ViewSet& views, const SolverConfig& cfg,
                                             const GridGeometry& geom = {16, -0.5, 0.5}) {
    detail::ReconLoop loop(views, geom, cfg);
    LogitGrid logits(geom, 0.0);
    AdamState adam(logits.size());
    std::vector<LogEntry> log;
    log.reserve(cfg.iterations);
    for (int iter = 0; iter < cfg.iterations; ++iter) {
        ReprojResult rp = reproj_grad(logits, views, loop.traversals);
        if (!std::isfinite(rp.loss))
            throw std::runtime_error("reconstruct: non-finite loss at iteration " +
                                     std::to_string(iter));
        const double lr = learning_rate(cfg, iter);
        adam_step(adam, logits.values(), rp.logit_grad, lr, cfg.beta1, cfg.beta2, cfg.adam_eps);
        log.push_back({iter, rp.loss, 0.0, 0.0, true, lr});
    }
    return {occupancy(logits), std::move(log)};
}

/// Rendering intrinsics shared by the dataset generator and the viewpoint
/// search.
struct Intrinsics {
    int width = 127;
    int height = 127;
    double fx = 120.0;
    double fy = 120.0;
    double cx = 63.5;
    double cy = 63.5;
};

struct ViewpointSearch {
    int bins = 10;
    double az_min = 0.0;
    double az_max = 2.0 * 3.14159265358979323846;
    double el_min = 0.0;
    double el_max = 3.14159265358979323846 / 3.0;  // 60 degrees
    double depth_min_factor = 1.5;                 // in units of the grid half-diagonal
    double depth_max_factor = 3.5;
    Intrinsics intrinsics;
};

struct ViewpointEstimate {
    int az_bin, el_bin, depth_bin;
    double azimuth, elevation, depth;
    double score;  // sum of squared pixel differences
};

inline Camera viewpoint_camera(const GridGeometry& geom, double azimuth, double elevation,
                               double depth, const Intrinsics& intr) {
    return spherical_camera(geom.center(), azimuth, elevation, depth, intr.fx, intr.fy, intr.cx,
                            intr.cy, intr.width, intr.height);
}

/// Discretized viewpoint estimation: exhaustive search over bins^3 cameras
/// on a look-at sphere (bin centers), scoring each rendering of the
/// reference shape against the mask by summed squared pixel difference.
/// Ties go to the lowest (azimuth, elevation, depth) bin triple.
inline ViewpointEstimate estimate_viewpoint(const MaskImage& mask, const VoxelGrid& reference,
                                            const ViewpointSearch& search = {}) {
    if (search.bins < 2) throw std::invalid_argument("estimate_viewpoint: need at least 2 bins");
    const GridGeometry& geom = reference.geometry();
    const double r = geom.half_diagonal();
    auto bin_value = [&](double lo, double hi, int k) {
        return lo + (k + 0.5) * (hi - lo) / search.bins;
    };
    ViewpointEstimate best{-1, -1, -1, 0.0, 0.0, 0.0, std::numeric_limits<double>::infinity()};
    for (int a = 0; a < search.bins; ++a)
        for (int e = 0; e < search.bins; ++e)
            for (int d = 0; d < search.bins; ++d) {
                const double az = bin_value(search.az_min, search.az_max, a);
                const double el = bin_value(search.el_min, search.el_max, e);
                const double depth =
                    bin_value(search.depth_min_factor * r, search.depth_max_factor * r, d);
                const Camera cam = viewpoint_camera(geom, az, el, depth, search.intrinsics);
                if (mask.width() != cam.width() || mask.height() != cam.height())
                    throw std::invalid_argument(
                        "estimate_viewpoint: mask size does not match intrinsics");
                const MaskImage rendered = rp_forward(reference, cam);
                double score = 0.0;
                for (std::size_t k = 0; k < rendered.size(); ++k) {
                    const double diff = rendered[k] - mask[k];
                    score += diff * diff;
                }
                if (score < best.score) best = {a, e, d, az, el, depth, score};
            }
    return best;
}

}  // namespace voxrec
