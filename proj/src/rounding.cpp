#include "psos/rounding.hpp"

#include <algorithm>
#include <cmath>

#include "psos/errors.hpp"

namespace psos {

Assignment sign_round(const GramState& state) {
    const GramIndex& index = *state.index;
    std::vector<Spin> x(static_cast<std::size_t>(index.num_vertices()));
    for (int i = 0; i < index.num_vertices(); ++i) {
        x[static_cast<std::size_t>(i)] = state.inner(index.vertex(i), GramIndex::kEmpty) < 0.0 ? Spin{-1} : Spin{1};
    }
    return Assignment(std::move(x));
}

ClapState ClapState::fresh(const GramIndex& index) {
    ClapState clap;
    clap.reliables.assign(static_cast<std::size_t>(index.size()), 0);
    clap.reliables[GramIndex::kEmpty] = 1;
    return clap;
}

bool ClapState::all_reliable() const {
    return std::all_of(reliables.begin(), reliables.end(), [](char c) { return c != 0; });
}

namespace {

void snap(GramState& state, int s) {
    const double sign = state.inner(s, GramIndex::kEmpty) < 0.0 ? -1.0 : 1.0;
    state.vectors.col(s) = sign * state.vectors.col(GramIndex::kEmpty);
}

// Confidence moves in steps of 0.1; keep it on the decimal grid.
double lower_confidence(double c) { return std::round((c - 0.1) * 10.0) / 10.0; }

}  // namespace

ClapState promote(GramState& state, ClapState clap) {
    if (!(clap.confidence > 0.0 && clap.confidence <= 1.0)) throw StructureError("confidence must lie in (0, 1]");
    const int count = state.index->size();
    if (clap.reliables.size() != static_cast<std::size_t>(count)) throw DimensionError("reliable mask size mismatch");
    clap.promotions.clear();
    for (int s = 1; s < count; ++s) {
        if (clap.reliables[static_cast<std::size_t>(s)]) continue;
        if (std::abs(state.inner(GramIndex::kEmpty, s)) > clap.confidence) {
            snap(state, s);
            clap.promotions.push_back(s);
        }
    }
    for (int s : clap.promotions) clap.reliables[static_cast<std::size_t>(s)] = 1;
    if (clap.promotions.empty()) clap.confidence = lower_confidence(clap.confidence);
    return clap;
}

ClapResult clap(const GraphModel& model, const ConstraintCatalog& catalog, const ClapOptions& options) {
    ClapResult result;
    GramState state = init_state(catalog, options.solver);
    ClapState round = ClapState::fresh(*catalog.index);

    while (!round.all_reliable()) {
        if (options.reset_multipliers && result.lifts > 0) {
            std::fill(state.multipliers.begin(), state.multipliers.end(), 0.0);
        }
        PartialSosResult lift = partial_sos(model, catalog, options.solver, std::move(state), round.reliables);
        state = std::move(lift.state);
        if (result.lifts == 0 && !lift.trace.empty()) {
            result.first_lift_objective = lift.trace.back().objective;
            result.first_lift_residual = lift.trace.back().residual;
        }
        for (SweepRecord r : lift.trace) {
            r.sweep += result.sweeps;
            result.trace.push_back(r);
        }
        result.sweeps += static_cast<int>(lift.trace.size());
        result.converged = result.converged && lift.converged;
        ++result.lifts;

        round.confidence = 0.9;
        while (true) {
            round = promote(state, std::move(round));
            if (!round.promotions.empty()) break;
            if (round.confidence <= 0.0) {
                // Nothing cleared any threshold: fix the rest by sign.
                for (int s = 1; s < state.index->size(); ++s) {
                    if (round.reliables[static_cast<std::size_t>(s)]) continue;
                    snap(state, s);
                    round.reliables[static_cast<std::size_t>(s)] = 1;
                }
                break;
            }
        }
    }
    result.assignment = sign_round(state);
    result.state = std::move(state);
    return result;
}

ClapResult clap(const GraphModel& model, const RegionCovering& cov, const ClapOptions& options) {
    return clap(model, compile_constraints(model.num_vertices(), cov), options);
}

}  // namespace psos
