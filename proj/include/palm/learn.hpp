#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "palm/errors.hpp"
#include "palm/mpalm.hpp"
#include "palm/parallel.hpp"
#include "palm/rng.hpp"

namespace palm {

// ---------------------------------------------------------------------------
// schedule parameterization: theta_j = log sigma_j keeps penalties positive

struct ScheduleParams {
    Vector theta;
};

/// Iteration geometry shared by every schedule a training run produces.
struct ScheduleShape {
    int total_iters = 0;
    int segment_length = 1;
    double step_size = 1.618;
};

inline PenaltySchedule to_schedule(const ScheduleParams& params, const ScheduleShape& shape) {
    PenaltySchedule sched;
    sched.sigmas.reserve(params.theta.size());
    for (double t : params.theta) {
        if (!std::isfinite(t)) throw std::invalid_argument("schedule parameter not finite");
        sched.sigmas.push_back(std::exp(t));
    }
    sched.segment_length = shape.segment_length;
    sched.total_iters = shape.total_iters;
    sched.step_size = shape.step_size;
    sched.validate();
    return sched;
}

// ---------------------------------------------------------------------------
// training data: one example is a solver closure plus its oracle solution

struct TrainExample {
    std::function<Vector(const PenaltySchedule&)> solve;
    Vector x_star;
};

using TrainSet = std::vector<TrainExample>;

struct TrainConfig {
    double lr = 0.001;
    double beta1 = 0.999;
    double beta2 = 0.999;
    int epochs = 0;
    int batch_size = 50;
    int restarts = 1; // schedule length J
    double fd_step = 1e-4;
    double weight_decay = 0.0;
    double eps = 1e-8;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(lr > 0.0)) throw std::invalid_argument("train: lr must be positive");
        if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
            throw std::invalid_argument("train: betas must lie in [0,1)");
        if (epochs < 0) throw std::invalid_argument("train: negative epoch count");
        if (batch_size < 1) throw std::invalid_argument("train: batch size must be positive");
        if (restarts < 1) throw std::invalid_argument("train: need at least one segment");
        if (!(fd_step > 0.0)) throw std::invalid_argument("train: fd step must be positive");
    }
};

// ---------------------------------------------------------------------------
// loss and metric

namespace detail {

inline double squared_distance(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("erm: output/oracle size mismatch");
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const double d = a[t] - b[t];
        s += d * d;
    }
    return s;
}

} // namespace detail

/// Mean squared distance between solver outputs under the schedule and the
/// oracle solutions, over the indexed subset of the set.
inline double erm_loss(const ScheduleParams& params, const ScheduleShape& shape,
                       const TrainSet& set, const std::vector<std::size_t>& subset) {
    if (subset.empty()) throw std::invalid_argument("erm: empty batch");
    const PenaltySchedule sched = to_schedule(params, shape);
    Vector losses(subset.size());
    parallel_for(subset.size(), [&](std::size_t t) {
        const std::size_t i = subset[t];
        try {
            losses[t] = detail::squared_distance(set[i].solve(sched), set[i].x_star);
        } catch (const std::exception& e) {
            throw std::runtime_error("training instance " + std::to_string(i) + ": " + e.what());
        }
    });
    double sum = 0.0;
    for (double v : losses) sum += v; // fixed index order keeps the reduction deterministic
    return sum / static_cast<double>(subset.size());
}

inline double erm_loss(const ScheduleParams& params, const ScheduleShape& shape,
                       const TrainSet& set) {
    std::vector<std::size_t> all(set.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return erm_loss(params, shape, set, all);
}

/// Mean of 10*log10(||x - x*|| / ||x*||) in dB, ratio clamped below at 1e-16
/// (-160 dB floor for exact recoveries).
inline double nmse(const std::vector<Vector>& predicted, const std::vector<Vector>& truth) {
    if (predicted.size() != truth.size() || predicted.empty())
        throw std::invalid_argument("nmse: need matching nonempty lists");
    double acc = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double tn = norm2(truth[i]);
        if (!(tn > 0.0)) throw std::invalid_argument("nmse: zero-norm truth vector");
        const double ratio =
            std::max(std::sqrt(detail::squared_distance(predicted[i], truth[i])) / tn, 1e-16);
        acc += 10.0 * std::log10(ratio);
    }
    return acc / static_cast<double>(predicted.size());
}

/// Held-out NMSE of a schedule over a set.
inline double schedule_nmse(const PenaltySchedule& sched, const TrainSet& set) {
    if (set.empty()) throw std::invalid_argument("nmse: empty set");
    std::vector<Vector> outputs(set.size());
    parallel_for(set.size(), [&](std::size_t i) { outputs[i] = set[i].solve(sched); });
    std::vector<Vector> truths(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) truths[i] = set[i].x_star;
    return nmse(outputs, truths);
}

// ---------------------------------------------------------------------------
// finite-difference gradient in log-sigma

using LossFn = std::function<double(const ScheduleParams&)>;

inline Vector fd_gradient(const ScheduleParams& params, const LossFn& loss, double fd_step) {
    if (!(fd_step > 0.0)) throw std::invalid_argument("fd_gradient: step must be positive");
    const std::size_t J = params.theta.size();
    Vector grad(J);
    ScheduleParams probe = params;
    for (std::size_t j = 0; j < J; ++j) {
        const double h = fd_step * std::max(1.0, std::abs(params.theta[j]));
        probe.theta[j] = params.theta[j] + h;
        const double up = loss(probe);
        probe.theta[j] = params.theta[j] - h;
        const double down = loss(probe);
        probe.theta[j] = params.theta[j];
        if (!std::isfinite(up) || !std::isfinite(down))
            throw nonfinite_gradient_error("finite-difference probe produced non-finite loss",
                                           static_cast<int>(j));
        grad[j] = (up - down) / (2.0 * h);
    }
    return grad;
}

inline Vector fd_gradient(const ScheduleParams& params, const ScheduleShape& shape,
                          const TrainSet& set, const std::vector<std::size_t>& subset,
                          double fd_step) {
    return fd_gradient(
        params, [&](const ScheduleParams& p) { return erm_loss(p, shape, set, subset); }, fd_step);
}

// ---------------------------------------------------------------------------
// decoupled-weight-decay adaptive-moment optimizer

struct AdamState {
    Vector m;
    Vector v;
    long step = 0;
};

inline AdamState make_adam_state(std::size_t dim) {
    return {Vector(dim, 0.0), Vector(dim, 0.0), 0};
}

inline void adam_step(AdamState& state, ScheduleParams& params, const Vector& grad,
                      const TrainConfig& cfg) {
    const std::size_t J = params.theta.size();
    if (state.m.size() != J || state.v.size() != J || grad.size() != J)
        throw std::invalid_argument("adam: dimension mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t j = 0; j < J; ++j) {
        state.m[j] = cfg.beta1 * state.m[j] + (1.0 - cfg.beta1) * grad[j];
        state.v[j] = cfg.beta2 * state.v[j] + (1.0 - cfg.beta2) * grad[j] * grad[j];
        const double mhat = state.m[j] / bc1;
        const double vhat = state.v[j] / bc2;
        params.theta[j] -= cfg.lr * cfg.weight_decay * params.theta[j]; // decoupled decay
        params.theta[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

// ---------------------------------------------------------------------------
// training loop and grid-search fallback

struct TrainReport {
    Vector loss_history;      // per-epoch ERM loss over the full train set
    Vector test_nmse_history; // per-epoch held-out NMSE
    PenaltySchedule final_schedule;
    double best_test_nmse = std::numeric_limits<double>::infinity();
};

/// Epoch loop of seeded shuffled mini-batches; one FD gradient + optimizer
/// step per batch. Returns the schedule with the best held-out NMSE seen,
/// the all-ones initialization included.
inline TrainReport train(const TrainSet& trainset, const TrainSet& testset,
                         const ScheduleShape& shape, const TrainConfig& cfg) {
    cfg.validate();
    if (trainset.empty()) throw std::invalid_argument("train: empty train set");
    if (testset.empty()) throw std::invalid_argument("train: empty test set");
    if (static_cast<std::size_t>(cfg.batch_size) > trainset.size())
        throw std::invalid_argument("train: batch size exceeds train set");

    ScheduleParams params{Vector(static_cast<std::size_t>(cfg.restarts), 0.0)};
    TrainReport rep;
    rep.final_schedule = to_schedule(params, shape);
    if (cfg.epochs == 0) return rep;

    rep.best_test_nmse = schedule_nmse(rep.final_schedule, testset);
    AdamState state = make_adam_state(params.theta.size());
    Rng rng(cfg.seed);
    std::vector<std::size_t> order(trainset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle(order, rng);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                                 order.begin() + static_cast<std::ptrdiff_t>(stop));
            const Vector grad = fd_gradient(params, shape, trainset, batch, cfg.fd_step);
            adam_step(state, params, grad, cfg);
        }
        rep.loss_history.push_back(erm_loss(params, shape, trainset));
        const PenaltySchedule sched = to_schedule(params, shape);
        const double tn = schedule_nmse(sched, testset);
        rep.test_nmse_history.push_back(tn);
        if (tn < rep.best_test_nmse) {
            rep.best_test_nmse = tn;
            rep.final_schedule = sched;
        }
    }
    return rep;
}

struct GridSearchResult {
    double sigma = 1.0;
    double loss = std::numeric_limits<double>::infinity();
    PenaltySchedule schedule;
};

/// Best constant schedule over the grid by ERM loss; ties go to the smaller
/// sigma.
inline GridSearchResult grid_search(const TrainSet& set, const ScheduleShape& shape,
                                    const Vector& grid) {
    if (grid.empty()) throw std::invalid_argument("grid_search: empty grid");
    Vector sorted = grid;
    std::sort(sorted.begin(), sorted.end());
    GridSearchResult best;
    for (double sigma : sorted) {
        ScheduleParams p{Vector(1, std::log(sigma))};
        ScheduleShape constant = shape;
        constant.segment_length = std::max(shape.total_iters, 1);
        const double loss = erm_loss(p, constant, set);
        if (loss < best.loss) {
            best.loss = loss;
            best.sigma = sigma;
            best.schedule = to_schedule(p, constant);
        }
    }
    return best;
}

} // namespace palm
