#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "voxrec/rng.hpp"

namespace voxrec::theory {

/// Finite probability table: nonnegative entries summing to 1 within 1e-12.
class DiscreteDist {
public:
    explicit DiscreteDist(std::vector<double> probs) : p_(std::move(probs)) {
        if (p_.empty()) throw std::invalid_argument("distribution: empty support");
        double sum = 0.0;
        for (double v : p_) {
            if (v < 0.0) throw std::invalid_argument("distribution: negative probability");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("distribution: probabilities do not sum to 1");
    }

    std::size_t size() const { return p_.size(); }
    double operator[](std::size_t i) const { return p_[i]; }
    const std::vector<double>& probs() const { return p_; }

    static DiscreteDist uniform(std::size_t n) {
        return DiscreteDist(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    static DiscreteDist random(std::size_t n, Rng& rng) {
        std::vector<double> p(n);
        double sum = 0.0;
        for (double& v : p) {
            v = -std::log(rng.uniform() + 1e-300);
            sum += v;
        }
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            p[i] /= sum;
            acc += p[i];
        }
        p[n - 1] = 1.0 - acc;  // exact unit sum
        if (p[n - 1] < 0.0) p[n - 1] = 0.0;
        return DiscreteDist(std::move(p));
    }

private:
    std::vector<double> p_;
};

/// Category marginal plus per-category conditional rows; the joint is
/// joint(c, x) = cond(c, x) * marginal(c).
class JointDist {
public:
    JointDist(DiscreteDist marginal, std::vector<std::vector<double>> conditionals)
        : marginal_(std::move(marginal)), cond_(std::move(conditionals)) {
        if (cond_.size() != marginal_.size())
            throw std::invalid_argument("joint: conditional row count does not match marginal");
        if (cond_.empty() || cond_[0].empty())
            throw std::invalid_argument("joint: empty table");
        for (const auto& row : cond_) {
            if (row.size() != cond_[0].size())
                throw std::invalid_argument("joint: ragged conditional table");
            double sum = 0.0;
            for (double v : row) {
                if (v < 0.0) throw std::invalid_argument("joint: negative probability");
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw std::invalid_argument("joint: conditional row does not sum to 1");
        }
    }

    std::size_t categories() const { return cond_.size(); }
    std::size_t outcomes() const { return cond_[0].size(); }
    const DiscreteDist& marginal() const { return marginal_; }
    double conditional(std::size_t c, std::size_t x) const { return cond_[c][x]; }
    double joint(std::size_t c, std::size_t x) const { return cond_[c][x] * marginal_[c]; }

    static JointDist random(std::size_t categories, std::size_t outcomes, Rng& rng) {
        std::vector<std::vector<double>> cond;
        for (std::size_t c = 0; c < categories; ++c)
            cond.push_back(DiscreteDist::random(outcomes, rng).probs());
        return JointDist(DiscreteDist::random(categories, rng), std::move(cond));
    }

private:
    DiscreteDist marginal_;
    std::vector<std::vector<double>> cond_;
};

/// Kullback-Leibler divergence with the 0 log 0 = 0 convention. Returns
/// +infinity when the support condition fails.
inline double kl(const DiscreteDist& p, const DiscreteDist& q) {
    if (p.size() != q.size()) throw std::invalid_argument("kl: supports differ in size");
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
        sum += p[i] * std::log(p[i] / q[i]);
    }
    return sum;
}

/// Jensen-Shannon divergence against the midpoint mixture (natural log).
/// Always finite, in [0, log 2].
inline double js(const DiscreteDist& p, const DiscreteDist& q) {
    if (p.size() != q.size()) throw std::invalid_argument("js: supports differ in size");
    std::vector<double> mix(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) mix[i] = 0.5 * (p[i] + q[i]);
    const DiscreteDist m(std::move(mix));
    return 0.5 * kl(p, m) + 0.5 * kl(q, m);
}

/// Optimal discriminator table D*(c, x) = P(c,x) / (P(c,x) + Q(c,x)).
/// Cells where both joints vanish are undefined and reported as NaN.
inline std::vector<std::vector<double>> optimal_disc(const JointDist& p, const JointDist& q) {
    if (p.categories() != q.categories() || p.outcomes() != q.outcomes())
        throw std::invalid_argument("optimal_disc: table shapes differ");
    std::vector<std::vector<double>> d(p.categories(), std::vector<double>(p.outcomes()));
    for (std::size_t c = 0; c < p.categories(); ++c)
        for (std::size_t x = 0; x < p.outcomes(); ++x) {
            const double pj = p.joint(c, x), qj = q.joint(c, x);
            d[c][x] = (pj + qj == 0.0) ? std::numeric_limits<double>::quiet_NaN()
                                       : pj / (pj + qj);
        }
    return d;
}

/// GAN criterion at the optimal discriminator:
/// C = E_P log D* + E_Q log(1 - D*), as exact finite sums. Cells with zero
/// mass under both joints are excluded.
inline double criterion(const JointDist& p, const JointDist& q) {
    const auto d = optimal_disc(p, q);
    double c_val = 0.0;
    for (std::size_t c = 0; c < p.categories(); ++c)
        for (std::size_t x = 0; x < p.outcomes(); ++x) {
            const double pj = p.joint(c, x), qj = q.joint(c, x);
            if (pj + qj == 0.0) continue;
            if (pj > 0.0) c_val += pj * std::log(d[c][x]);
            if (qj > 0.0) c_val += qj * std::log(1.0 - d[c][x]);
        }
    return c_val;
}

struct TrialResult {
    double gap;          // criterion - lower bound
    double max_cond_l1;  // max over categories of the L1 conditional gap
    bool equality;       // |gap| <= 1e-9
};

struct GlobalMinReport {
    double bound;  // -log 4 + 2 js(p_c, q_c)
    double min_gap = std::numeric_limits<double>::infinity();
    int bound_violations = 0;     // gap below -1e-10
    int equality_mismatches = 0;  // equality without matching conditionals or vice versa
    std::vector<TrialResult> trials;

    bool pass() const { return bound_violations == 0 && equality_mismatches == 0; }
};

/// Numerical check of the global-minimum statement: over random generator
/// conditionals with both category marginals fixed, the criterion never
/// drops below -log 4 + 2 js(p_c, q_c), and it attains the bound exactly
/// when the conditionals match. Trial 0 is the matched-conditional anchor;
/// the remaining trials draw random conditionals.
inline GlobalMinReport verify_global_min(const JointDist& p, const DiscreteDist& q_marginal,
                                         int trials, Rng& rng) {
    if (trials < 1) throw std::invalid_argument("verify_global_min: need at least 1 trial");
    if (q_marginal.size() != p.categories())
        throw std::invalid_argument("verify_global_min: marginal size mismatch");
    GlobalMinReport report;
    report.bound = -std::log(4.0) + 2.0 * js(p.marginal(), q_marginal);
    auto sample_q = [&](bool matched) {
        std::vector<std::vector<double>> cond;
        for (std::size_t c = 0; c < p.categories(); ++c) {
            if (matched) {
                std::vector<double> row(p.outcomes());
                for (std::size_t x = 0; x < p.outcomes(); ++x) row[x] = p.conditional(c, x);
                cond.push_back(std::move(row));
            } else {
                cond.push_back(DiscreteDist::random(p.outcomes(), rng).probs());
            }
        }
        return JointDist(q_marginal, std::move(cond));
    };
    for (int trial = 0; trial < trials; ++trial) {
        const JointDist q = sample_q(trial == 0);
        TrialResult r{};
        r.gap = criterion(p, q) - report.bound;
        r.max_cond_l1 = 0.0;
        for (std::size_t c = 0; c < p.categories(); ++c) {
            double l1 = 0.0;
            for (std::size_t x = 0; x < p.outcomes(); ++x)
                l1 += std::abs(q.conditional(c, x) - p.conditional(c, x));
            r.max_cond_l1 = std::max(r.max_cond_l1, l1);
        }
        r.equality = std::abs(r.gap) <= 1e-9;
        if (r.gap < -1e-10) ++report.bound_violations;
        if (r.equality != (r.max_cond_l1 < 1e-6)) ++report.equality_mismatches;
        report.min_gap = std::min(report.min_gap, r.gap);
        report.trials.push_back(r);
    }
    return report;
}

}  // namespace voxrec::theory
