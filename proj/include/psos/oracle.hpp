#pragma once

// Ground-truth oracles and certificate checks on moment matrices.

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psos/model.hpp"
#include "psos/sdp.hpp"

namespace psos {

inline constexpr int kMaxExhaustiveVertices = 28;

struct MapResult {
    Assignment assignment;
    double value = 0.0;
};

/// Global maximizer by Gray-code enumeration. Ties go to the lexicographically
/// smallest assignment with +1 ordered before -1.
MapResult exhaustive_map(const GraphModel& model);

struct CycleList {
    std::vector<std::vector<int>> cycles;
};

/// Every chordless cycle of length 3..max_len, once each. A cycle is reported
/// starting at its smallest vertex, walking toward the smaller of its two neighbors.
CycleList enumerate_chordless_cycles(const GraphModel& model, int max_len);

struct Violation {
    std::string kind;  // bound | triangle | cyclic
    std::string ids;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;  // lhs - rhs; negative means violated
};

struct ViolationReport {
    std::vector<Violation> violations;
    double max_violation = 0.0;
    std::size_t checked = 0;
    bool ok() const { return violations.empty(); }
};

inline constexpr double kCertificateTolerance = 1e-6;
inline constexpr double kIterativeTolerance = 1e-4;

/// |M_ij| <= 1 for every off-diagonal entry, |M_ij + M_jk| <= 1 + M_ik on every
/// 3-cycle, and M(F) - M(C \ F) >= 2 - |C| for every odd F on every listed cycle.
ViolationReport check_metric_polytope(const MomentMatrix& moments, const CycleList& cycles,
                                      double tol = kCertificateTolerance);

using Triple = std::array<int, 3>;

/// All three orientations of |M_ij + M_jk| <= 1 + M_ik per triple.
ViolationReport check_triangle_inequalities(const MomentMatrix& moments, std::span<const Triple> triples,
                                            double tol = kIterativeTolerance);

/// Every vertex triple that lies inside a single region.
std::vector<Triple> region_triples(const RegionCovering& cov);

void write_violation_csv(std::ostream& out, const ViolationReport& report);

struct RatioResult {
    std::vector<double> ratios;
    bool raw_fallback = false;
};

/// Values divided by `reference` (or by the best value when absent); falls back
/// to the raw values when the divisor is not positive.
RatioResult ratio_to_best(std::span<const double> values, std::optional<double> reference = std::nullopt);

}  // namespace psos
