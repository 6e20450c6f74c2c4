#pragma once

// Degree-4 partial sum-of-squares relaxation in Gram (Burer–Monteiro) form:
// constraint compilation, the rank-r state, and trust-region coordinate
// ascent on the augmented Lagrangian.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "psos/model.hpp"

namespace psos {

/// Index space of the Gram vectors: 0 is the empty set, 1..n the vertices,
/// then every pair contained in some region, in lexicographic order.
class GramIndex {
public:
    static constexpr int kEmpty = 0;

    GramIndex() = default;
    GramIndex(int num_vertices, std::vector<std::pair<int, int>> covered_pairs);

    int num_vertices() const { return num_vertices_; }
    int size() const { return 1 + num_vertices_ + static_cast<int>(pairs_.size()); }
    const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }

    int vertex(int i) const { return 1 + i; }
    std::optional<int> find_pair(int i, int j) const;
    int pair(int i, int j) const;

    bool is_vertex(int s) const { return s >= 1 && s <= num_vertices_; }
    bool is_pair(int s) const { return s > num_vertices_ && s < size(); }
    int vertex_of(int s) const { return s - 1; }
    std::pair<int, int> pair_of(int s) const { return pairs_[static_cast<std::size_t>(s - 1 - num_vertices_)]; }
    std::string label(int s) const;

private:
    int num_vertices_ = 0;
    std::vector<std::pair<int, int>> pairs_;
    std::map<std::pair<int, int>, int> lookup_;
};

/// <sigma_s, sigma_r> = <sigma_t, sigma_p>; the left pair is the canonical
/// (lexicographically least) representative of the shared moment.
struct Equality {
    int s = 0, r = 0, t = 0, p = 0;
    friend auto operator<=>(const Equality&, const Equality&) = default;
};

/// One occurrence of a variable inside an equality, rewritten so that the
/// variable enters linearly: sign * (<sigma_var, sigma_partner> - <sigma_a, sigma_b>).
struct Incidence {
    int equality = 0;
    int partner = 0;
    int target_a = 0;
    int target_b = 0;
    double sign = 1.0;
};

struct ConstraintCatalog {
    std::shared_ptr<const GramIndex> index;
    std::vector<Equality> equalities;
    std::vector<std::vector<Incidence>> by_variable;  // indexed by Gram index
};

/// Emits the Undirected, Directed, V-shaped, Triangle and Loop identities of
/// every region, one equality per non-canonical Gram pair of each moment.
/// Sphere constraints are implicit (vectors are kept normalized).
ConstraintCatalog compile_constraints(int num_vertices, const RegionCovering& cov,
                                      std::size_t max_region_size = 4);

/// Linear term of an edge variable's subproblem. kObjectiveOnly uses the
/// gradient of the relaxation objective, which does not involve sigma_ij, so
/// c = 0. kPrinted uses theta_ij sigma_0 + theta_i sigma_j + theta_j sigma_i.
enum class EdgeLinearTerm { kObjectiveOnly, kPrinted };

/// kPerSweep: every multiplier steps by its residual once after each sweep.
/// kPerVariable: the multipliers of a variable's rows step right after it is
/// updated, so an equality moves once per variable it touches.
enum class MultiplierUpdate { kPerSweep, kPerVariable };

struct SolverConfig {
    int rank = 10;
    double rho = 1.0;
    double tol = 1e-4;
    int max_sweeps = 500;
    std::uint64_t seed = 0;
    /// Sweeps in a row with falling objective and rising residual before giving up.
    int divergence_window = 50;
    EdgeLinearTerm edge_term = EdgeLinearTerm::kObjectiveOnly;
    MultiplierUpdate multiplier_update = MultiplierUpdate::kPerSweep;

    void validate() const;
};

struct GramState {
    int rank = 0;
    std::shared_ptr<const GramIndex> index;
    Eigen::MatrixXd vectors;          // rank x index->size(), one column per Gram index
    std::vector<double> multipliers;  // scaled multipliers, one per catalog equality

    auto column(int s) const { return vectors.col(s); }
    auto column(int s) { return vectors.col(s); }
    double inner(int a, int b) const { return vectors.col(a).dot(vectors.col(b)); }
};

/// sigma_empty = e_1, every other vector uniform on the sphere from the seeded stream.
GramState init_state(const ConstraintCatalog& catalog, const SolverConfig& config);

/// Rank-`rank` state of the cut vector x: sigma_i = x_i e_1, sigma_ij = x_i x_j e_1.
GramState integral_state(const ConstraintCatalog& catalog, int rank, const Assignment& x);

struct LocalSystem {
    Eigen::MatrixXd A;  // one row per equality containing the variable
    Eigen::VectorXd b;
    Eigen::VectorXd c;
    Eigen::VectorXd lambda;
};

LocalSystem assemble_local(int s, const GramState& state, const GraphModel& model,
                           const ConstraintCatalog& catalog,
                           EdgeLinearTerm edge_term = EdgeLinearTerm::kObjectiveOnly);

/// argmax_{||x||=1} <c, x> - rho/2 ||A x - b + lambda||^2.
Eigen::VectorXd solve_subproblem(const LocalSystem& sys, double rho,
                                 const Eigen::VectorXd& hint = Eigen::VectorXd());

double sdp_objective(const GramState& state, const GraphModel& model);

double residual_norm(const GramState& state, const ConstraintCatalog& catalog);

struct SweepRecord {
    int sweep = 0;
    double objective = 0.0;
    double residual = 0.0;
    double delta = 0.0;
};

struct PartialSosResult {
    GramState state;
    std::vector<SweepRecord> trace;
    bool converged = false;
};

/// Marks Gram indices that are frozen (reliable); sigma_empty is always frozen.
using ReliableMask = std::vector<char>;

/// Coordinate ascent over the non-reliable variables until the per-sweep
/// change Delta drops to config.tol or config.max_sweeps is reached.
PartialSosResult partial_sos(const GraphModel& model, const ConstraintCatalog& catalog,
                             const SolverConfig& config, GramState state, const ReliableMask& reliables);

PartialSosResult partial_sos(const GraphModel& model, const ConstraintCatalog& catalog,
                             const SolverConfig& config, GramState state);

struct MomentMatrix {
    Eigen::MatrixXd vertex_block;
    std::map<std::pair<int, int>, double> edge_moments;
};

MomentMatrix moment_matrix(const GramState& state);

void write_trace_csv(std::ostream& out, const std::vector<SweepRecord>& trace);

}  // namespace psos
