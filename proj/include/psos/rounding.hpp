#pragma once

// From Gram states to +1/-1 assignments: direct sign rounding and the
// confidence lift-and-project loop.

#include <vector>

#include "psos/model.hpp"
#include "psos/sdp.hpp"

namespace psos {

/// x_i = sign(<sigma_i, sigma_empty>), with exact zeros mapped to +1.
Assignment sign_round(const GramState& state);

struct ClapState {
    ReliableMask reliables;    // over the Gram index; entry 0 (sigma_empty) is always set
    double confidence = 0.9;
    std::vector<int> promotions;

    static ClapState fresh(const GramIndex& index);
    bool all_reliable() const;
};

/// One projection scan at the current confidence. Every non-reliable variable
/// with |<sigma_empty, sigma_s>| > confidence is snapped to +-sigma_empty and
/// made reliable. When nothing qualifies the confidence drops by 0.1.
ClapState promote(GramState& state, ClapState clap);

struct ClapOptions {
    SolverConfig solver;
    /// Zero the multipliers before every lift after the first.
    bool reset_multipliers = false;
};

struct ClapResult {
    Assignment assignment;
    GramState state;
    std::vector<SweepRecord> trace;  // every lift, concatenated
    int lifts = 0;
    int sweeps = 0;
    bool converged = true;           // every lift reached tolerance
    double first_lift_objective = 0.0;
    double first_lift_residual = 0.0;
};

/// Alternates partial SOS solves over the non-reliable variables with
/// projection rounds until every vertex and covered pair is fixed.
ClapResult clap(const GraphModel& model, const ConstraintCatalog& catalog, const ClapOptions& options);
ClapResult clap(const GraphModel& model, const RegionCovering& cov, const ClapOptions& options);

}  // namespace psos
