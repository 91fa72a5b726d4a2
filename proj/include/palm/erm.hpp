#pragma once

// Glue binding the concrete solvers to the schedule-training machinery:
// each instance becomes a closure returning the multiplier iterate x^K,
// paired with its oracle solution.

#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "palm/lasso.hpp"
#include "palm/learn.hpp"
#include "palm/ot.hpp"

namespace palm {

inline TrainSet make_lasso_trainset(const std::vector<LassoInstance>& instances,
                                    const std::vector<Vector>& solutions) {
    if (instances.size() != solutions.size())
        throw std::invalid_argument("trainset: instance/solution count mismatch");
    TrainSet set;
    set.reserve(instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i) {
        // cache the dictionary eigendecomposition once; thousands of runs
        // reuse it across schedule probes
        auto cache = std::make_shared<const SpectralCache>(build_spectral_cache(instances[i].D));
        const LassoInstance inst = instances[i];
        TrainExample ex;
        ex.solve = [inst, cache](const PenaltySchedule& sched) {
            return lasso_mpalm_run(inst, *cache, sched, zero_lasso_state(inst), false)
                .x_iters.back();
        };
        ex.x_star = solutions[i];
        set.push_back(std::move(ex));
    }
    return set;
}

inline TrainSet make_ot_trainset(const std::vector<OtInstance>& instances,
                                 const std::vector<Vector>& plans) {
    if (instances.size() != plans.size())
        throw std::invalid_argument("trainset: instance/plan count mismatch");
    TrainSet set;
    set.reserve(instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const OtInstance inst = instances[i];
        TrainExample ex;
        ex.solve = [inst](const PenaltySchedule& sched) {
            return ot_mpalm_run(inst, sched, zero_ot_state(inst), false).x_iters.back();
        };
        ex.x_star = plans[i];
        set.push_back(std::move(ex));
    }
    return set;
}

} // namespace palm
