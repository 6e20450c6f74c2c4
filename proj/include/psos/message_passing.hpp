#pragma once

// Baseline MAP decoders: loopy belief propagation (sum-product and
// max-product) and parent-to-child generalized belief propagation.

#include <array>
#include <iosfwd>
#include <vector>

#include "psos/model.hpp"

namespace psos {

struct MessagePassingOptions {
    double damping = 0.5;  // weight of the previous message
    int max_iters = 2000;
    double tol = 1e-8;     // on the largest log-message change

    void validate() const;
};

inline MessagePassingOptions bp_defaults() { return {0.5, 2000, 1e-8}; }
// GBP inertia 0.1 is read as the weight of the new message.
inline MessagePassingOptions gbp_defaults() { return {0.9, 2000, 1e-8}; }

/// Log-domain messages on directed edges; entry [0] is x_j = +1, [1] is x_j = -1.
/// Directed edge 2k runs edges()[k].i -> edges()[k].j, 2k+1 the reverse.
struct MessageSet {
    std::vector<std::array<double, 2>> messages;
};

struct Beliefs {
    std::vector<double> plus;  // b_i(+1); b_i(-1) = 1 - b_i(+1)
};

struct IterationRecord {
    int iter = 0;
    double max_delta = 0.0;
};

struct SumProductResult {
    Beliefs beliefs;
    Assignment assignment;
    bool converged = false;
    int iterations = 0;
    std::vector<IterationRecord> trace;
};

struct DecodeResult {
    Assignment assignment;
    bool converged = false;
    int iterations = 0;
    std::vector<IterationRecord> trace;
};

/// Damped synchronous sum-product; decodes x_i = +1 iff b_i(+1) >= 0.5.
SumProductResult bp_sum_product(const GraphModel& model, const MessagePassingOptions& options = bp_defaults());

/// Damped synchronous min-sum (max-product); decodes by max-marginal, ties to +1.
DecodeResult bp_max_product(const GraphModel& model, const MessagePassingOptions& options = bp_defaults());

enum class Semiring { kSumProduct, kMaxProduct };

/// Region graph built from `top_regions` closed under intersection, with
/// cluster-variation counting numbers.
struct RegionGraph {
    struct Region {
        std::vector<int> vars;  // sorted
        int counting = 0;
        std::vector<int> parents;
        std::vector<int> children;
    };
    std::vector<Region> regions;
};

/// Any factor (vertex or edge) not inside a listed region gets its own top region.
RegionGraph build_region_graph(const GraphModel& model, const RegionCovering& top_regions);

/// Parent-to-child generalized BP; decodes each vertex from the smallest region holding it.
DecodeResult gbp(const GraphModel& model, const RegionCovering& top_regions, const MessagePassingOptions& options,
                 Semiring semiring = Semiring::kMaxProduct);

/// GBP with unit plaquettes as the largest regions on a side x side grid.
DecodeResult gbp_plaquette(const GraphModel& model, int side, const MessagePassingOptions& options = gbp_defaults());

void write_iteration_csv(std::ostream& out, const std::vector<IterationRecord>& trace);

}  // namespace psos
