#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "voxrec/rng.hpp"
#include "voxrec/voxel.hpp"

namespace voxrec {

namespace detail {
constexpr double kGEps = 1e-7;

/// 2x max-downsample of a grid, flattened in the fixed linear order.
/// Grid resolution must be even.
inline Eigen::VectorXd downsample2(const VoxelGrid& grid) {
    const int n = grid.n();
    if (n % 2 != 0) throw std::invalid_argument("discriminator: grid resolution must be even");
    const int m = n / 2;
    Eigen::VectorXd out(static_cast<Eigen::Index>(m) * m * m);
    Eigen::Index k = 0;
    for (int ix = 0; ix < m; ++ix)
        for (int iy = 0; iy < m; ++iy)
            for (int iz = 0; iz < m; ++iz) {
                double v = 0.0;
                for (int dx = 0; dx < 2; ++dx)
                    for (int dy = 0; dy < 2; ++dy)
                        for (int dz = 0; dz < 2; ++dz)
                            v = std::max(v, grid.at(2 * ix + dx, 2 * iy + dy, 2 * iz + dz));
                out[k++] = v;
            }
    return out;
}

/// Index of the first voxel attaining the block max, in scan order.
inline std::size_t downsample2_argmax(const VoxelGrid& grid, int bx, int by, int bz) {
    double best = -1.0;
    std::size_t best_idx = 0;
    for (int dx = 0; dx < 2; ++dx)
        for (int dy = 0; dy < 2; ++dy)
            for (int dz = 0; dz < 2; ++dz) {
                const std::size_t idx =
                    grid.geometry().index(2 * bx + dx, 2 * by + dy, 2 * bz + dz);
                if (grid[idx] > best) {
                    best = grid[idx];
                    best_idx = idx;
                }
            }
    return best_idx;
}
}  // namespace detail

/// Feed-forward scorer g(x) in (0, 1) over a flattened 2x max-downsampled
/// occupancy grid. Rectifier hidden layers, logistic output. This is the
/// learned barrier: realistic shapes should score near 1.
class Discriminator {
public:
    struct Layer {
        Eigen::MatrixXd weights;  // rows = outputs, cols = inputs
        Eigen::VectorXd bias;
    };

    /// He-initialized hidden layers; the output layer starts near zero so
    /// the initial score is close to 0.5.
    Discriminator(int grid_n, std::uint64_t seed, std::vector<int> hidden = {128, 64})
        : grid_n_(grid_n) {
        if (grid_n < 2 || grid_n % 2 != 0)
            throw std::invalid_argument("discriminator: grid resolution must be even and >= 2");
        Rng rng(seed);
        const int m = grid_n / 2;
        int in = m * m * m;
        std::vector<int> widths = std::move(hidden);
        widths.push_back(1);
        for (std::size_t l = 0; l < widths.size(); ++l) {
            const int out = widths[l];
            const bool is_output = l + 1 == widths.size();
            Layer layer;
            layer.weights.resize(out, in);
            const double scale = is_output ? 0.01 : std::sqrt(2.0 / in);
            for (int r = 0; r < out; ++r)
                for (int c = 0; c < in; ++c) layer.weights(r, c) = scale * rng.normal();
            layer.bias = Eigen::VectorXd::Zero(out);
            layers_.push_back(std::move(layer));
            in = out;
        }
        reset_pending();
    }

    int grid_n() const { return grid_n_; }
    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }

    /// Deterministic forward evaluation, clamped to [1e-7, 1 - 1e-7].
    double eval(const VoxelGrid& grid) const { return score(forward(grid)); }

    /// Accumulate coeff * d(pre-logistic output)/d(parameters).
    void accumulate_score_grad(const VoxelGrid& grid, double coeff) {
        const Activations acts = forward(grid);
        Eigen::VectorXd delta(1);
        delta[0] = coeff;
        for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
            pending_[l].weights.noalias() += delta * acts.inputs[l].transpose();
            pending_[l].bias += delta;
            if (l > 0) {
                Eigen::VectorXd prev = layers_[l].weights.transpose() * delta;
                for (Eigen::Index k = 0; k < prev.size(); ++k)
                    if (acts.inputs[l][k] <= 0.0) prev[k] = 0.0;  // rectifier mask
                delta = std::move(prev);
            }
        }
    }

    /// Apply the accumulated gradient: theta += lr * pending, then reset.
    void apply_step(double lr) {
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            layers_[l].weights += lr * pending_[l].weights;
            layers_[l].bias += lr * pending_[l].bias;
        }
        reset_pending();
    }

    /// d(clamped g)/d(grid values). Zero when the output clamp is active.
    std::vector<double> input_grad(const VoxelGrid& grid, double* g_out = nullptr) const {
        const Activations acts = forward(grid);
        const double g_raw = logistic(acts.output_z);
        if (g_out) *g_out = std::clamp(g_raw, detail::kGEps, 1.0 - detail::kGEps);
        std::vector<double> grad(grid.size(), 0.0);
        if (g_raw < detail::kGEps || g_raw > 1.0 - detail::kGEps) return grad;
        Eigen::VectorXd delta(1);
        delta[0] = g_raw * (1.0 - g_raw);
        for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
            Eigen::VectorXd prev = layers_[l].weights.transpose() * delta;
            if (l > 0)
                for (Eigen::Index k = 0; k < prev.size(); ++k)
                    if (acts.inputs[l][k] <= 0.0) prev[k] = 0.0;
            delta = std::move(prev);
        }
        // Route each downsampled input's gradient to the voxel that won its
        // 2x2x2 block.
        const int m = grid_n_ / 2;
        Eigen::Index k = 0;
        for (int bx = 0; bx < m; ++bx)
            for (int by = 0; by < m; ++by)
                for (int bz = 0; bz < m; ++bz, ++k)
                    grad[detail::downsample2_argmax(grid, bx, by, bz)] += delta[k];
        return grad;
    }

    bool operator==(const Discriminator& other) const {
        if (grid_n_ != other.grid_n_ || layers_.size() != other.layers_.size()) return false;
        for (std::size_t l = 0; l < layers_.size(); ++l)
            if (layers_[l].weights != other.layers_[l].weights ||
                layers_[l].bias != other.layers_[l].bias)
                return false;
        return true;
    }

private:
    struct Activations {
        std::vector<Eigen::VectorXd> inputs;  // input to each layer
        double output_z;
    };

    Activations forward(const VoxelGrid& grid) const {
        if (grid.n() != grid_n_)
            throw std::invalid_argument("discriminator: grid resolution does not match");
        Activations acts;
        Eigen::VectorXd h = detail::downsample2(grid);
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            acts.inputs.push_back(h);
            Eigen::VectorXd z = layers_[l].weights * h + layers_[l].bias;
            if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
            h = std::move(z);
        }
        acts.output_z = h[0];
        return acts;
    }

    double score(const Activations& acts) const {
        return std::clamp(logistic(acts.output_z), detail::kGEps, 1.0 - detail::kGEps);
    }

    void reset_pending() {
        pending_.clear();
        for (const Layer& l : layers_)
            pending_.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
                                Eigen::VectorXd::Zero(l.bias.size())});
    }

    int grid_n_;
    std::vector<Layer> layers_;
    std::vector<Layer> pending_;
};

/// Lookup-table scorer over a fixed finite set of grids: one logit per
/// outcome. Used to study what the adversarial update converges to.
class TabularDiscriminator {
public:
    explicit TabularDiscriminator(std::vector<VoxelGrid> outcomes)
        : outcomes_(std::move(outcomes)),
          logits_(outcomes_.size(), 0.0),
          pending_(outcomes_.size(), 0.0) {
        if (outcomes_.empty())
            throw std::invalid_argument("tabular discriminator: outcome set is empty");
    }

    std::size_t find(const VoxelGrid& grid) const {
        for (std::size_t k = 0; k < outcomes_.size(); ++k)
            if (outcomes_[k] == grid) return k;
        throw std::invalid_argument("tabular discriminator: grid not in outcome set");
    }

    double eval(const VoxelGrid& grid) const {
        return std::clamp(logistic(logits_[find(grid)]), detail::kGEps, 1.0 - detail::kGEps);
    }

    void accumulate_score_grad(const VoxelGrid& grid, double coeff) {
        pending_[find(grid)] += coeff;
    }

    void apply_step(double lr) {
        for (std::size_t k = 0; k < logits_.size(); ++k) {
            logits_[k] += lr * pending_[k];
            pending_[k] = 0.0;
        }
    }

    const std::vector<double>& logits() const { return logits_; }

private:
    std::vector<VoxelGrid> outcomes_;
    std::vector<double> logits_;
    std::vector<double> pending_;
};

/// Barrier and discriminator-training knobs.
struct BarrierConfig {
    double t = 100.0;            // barrier sharpness; penalty weight is 1/t
    double sigma_noise = 0.1;    // instance-noise stddev at the start of training
    double gate_threshold = 0.2; // skip the update at or below this classification error
    double lr_g = 1e-4;
    bool gate_enabled = true;
    bool freeze = false;         // skip updates entirely (diagnostics still gated)

    void validate() const {
        if (!(t > 0.0)) throw std::invalid_argument("barrier: t must be positive");
        if (!(gate_threshold >= 0.0 && gate_threshold < 0.5))
            throw std::invalid_argument("barrier: gate threshold outside [0, 0.5)");
    }
};

template <class Scorer>
double g_eval(const Scorer& d, const VoxelGrid& grid) {
    return d.eval(grid);
}

/// Log-barrier value -(1/t) log g(x). Finite by the output clamp.
template <class Scorer>
double penalty(const Scorer& d, const VoxelGrid& grid, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("penalty: t must be positive");
    return -std::log(g_eval(d, grid)) / t;
}

/// Gradient of the barrier with respect to the logits. The discriminator is
/// treated as fixed; only the reconstruction receives gradient.
inline std::vector<double> penalty_grad(const Discriminator& d, const LogitGrid& lg, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("penalty_grad: t must be positive");
    const VoxelGrid grid = occupancy(lg);
    double g = 0.0;
    std::vector<double> grad = d.input_grad(grid, &g);
    const double chain = -1.0 / (t * g);
    for (std::size_t i = 0; i < grad.size(); ++i) {
        const double p = grid[i];
        grad[i] *= chain * p * (1.0 - p);
    }
    return grad;
}

struct UpdateDiagnostics {
    double error;      // mean misclassification rate on the noisy batches
    double objective;  // E log g(real) + E log(1 - g(recon)), pre-step
    bool gated;
};

namespace detail {
inline VoxelGrid add_instance_noise(const VoxelGrid& grid, double sigma, Rng& rng) {
    VoxelGrid noisy = grid;
    if (sigma <= 0.0) return noisy;
    for (std::size_t i = 0; i < noisy.size(); ++i)
        noisy[i] = std::clamp(noisy[i] + sigma * rng.normal(), 0.0, 1.0);
    return noisy;
}
}  // namespace detail

/// One discriminator training step. Instance noise is added to both batches
/// so their supports overlap; the step is skipped while the classification
/// error is at or below the gate, which keeps the discriminator imperfect
/// and the barrier gradient alive. Otherwise ascends
/// E log g(real) + E log(1 - g(recon)) once at rate lr_g.
template <class Scorer>
UpdateDiagnostics update_penalty(Scorer& d, std::span<const VoxelGrid> recon_batch,
                                 std::span<const VoxelGrid> real_batch,
                                 const BarrierConfig& cfg, Rng& rng) {
    cfg.validate();
    if (recon_batch.empty() || real_batch.empty())
        throw std::invalid_argument("update_penalty: empty batch");

    std::vector<VoxelGrid> noisy_recon, noisy_real;
    noisy_recon.reserve(recon_batch.size());
    noisy_real.reserve(real_batch.size());
    for (const VoxelGrid& x : recon_batch)
        noisy_recon.push_back(detail::add_instance_noise(x, cfg.sigma_noise, rng));
    for (const VoxelGrid& x : real_batch)
        noisy_real.push_back(detail::add_instance_noise(x, cfg.sigma_noise, rng));

    double real_wrong = 0.0, recon_wrong = 0.0, objective = 0.0;
    for (const VoxelGrid& x : noisy_real) {
        const double g = d.eval(x);
        real_wrong += g < 0.5;
        objective += std::log(g) / static_cast<double>(noisy_real.size());
    }
    for (const VoxelGrid& x : noisy_recon) {
        const double g = d.eval(x);
        recon_wrong += g >= 0.5;
        objective += std::log(1.0 - g) / static_cast<double>(noisy_recon.size());
    }
    const double error = 0.5 * (real_wrong / noisy_real.size() + recon_wrong / noisy_recon.size());

    if (cfg.freeze || (cfg.gate_enabled && error <= cfg.gate_threshold))
        return {error, objective, true};

    const double inv_real = 1.0 / static_cast<double>(noisy_real.size());
    const double inv_recon = 1.0 / static_cast<double>(noisy_recon.size());
    for (const VoxelGrid& x : noisy_real) d.accumulate_score_grad(x, (1.0 - d.eval(x)) * inv_real);
    for (const VoxelGrid& x : noisy_recon) d.accumulate_score_grad(x, -d.eval(x) * inv_recon);
    d.apply_step(cfg.lr_g);
    return {error, objective, false};
}

}  // namespace voxrec
