#pragma once

// Algorithm dispatch and seeded batch benchmarks.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psos/message_passing.hpp"
#include "psos/model.hpp"
#include "psos/sdp.hpp"

namespace psos {

enum class Algorithm { kPsos4, kPsos2, kBpSum, kBpMax, kGbp, kExact };

std::string algorithm_name(Algorithm alg);
Algorithm algorithm_from_string(const std::string& name);
std::vector<Algorithm> all_algorithms();

enum class RegionChoice { kTriangle, kPlaquette, kVertex };

RegionChoice region_choice_from_string(const std::string& name);

struct GridShape {
    int rows = 0;
    int cols = 0;
};

struct SolveSettings {
    SolverConfig solver;
    /// Regions for psos4; kVertex turns psos4 into the psos2 configuration.
    RegionChoice regions = RegionChoice::kTriangle;
    /// Grid layout for triangle/plaquette regions and GBP; inferred (square) when absent.
    std::optional<GridShape> grid;
    MessagePassingOptions bp = bp_defaults();
    MessagePassingOptions gbp = gbp_defaults();
};

struct SolveOutcome {
    Algorithm algorithm = Algorithm::kExact;
    Assignment assignment;
    double objective = 0.0;
    int iterations = 0;       // sweeps for psos, message rounds for BP/GBP, 0 for exact
    bool converged = true;
    std::optional<double> residual;  // constraint residual of the final Gram state
    double runtime_ms = 0.0;
    std::vector<SweepRecord> sweeps;
    std::vector<IterationRecord> rounds;
    std::optional<GramState> state;
};

SolveOutcome solve(const GraphModel& model, Algorithm alg, const SolveSettings& settings);

/// The grid used for `model`: settings.grid if given, else the inferred square side.
GridShape resolve_grid(const GraphModel& model, const SolveSettings& settings);

enum class Family { kSpinGlass, kDenoise };

struct BenchPlan {
    Family family = Family::kSpinGlass;
    int side = 4;
    int dist = 1;
    NoiseKind noise = NoiseKind::kBernoulli;
    double p = 0.1;
    double theta0 = 1.0;
    int reps = 1;
    std::uint64_t seed = 0;
    std::vector<Algorithm> algs = all_algorithms();
    SolverConfig solver;
    /// Clean image for the denoise family; a synthetic side x side image when empty.
    std::string image;

    void validate() const;
    std::uint64_t replication_seed(int rep) const { return seed + static_cast<std::uint64_t>(rep); }
};

/// key=value lines; '#' comments. Keys: family side dist noise p theta0 reps
/// seed algs rank rho tol max_sweeps image.
BenchPlan parse_plan(std::istream& in);
BenchPlan read_plan_file(const std::string& path);

struct BenchRecord {
    std::string instance;
    Algorithm algorithm = Algorithm::kExact;
    int n = 0;
    std::uint64_t seed = 0;
    double objective = 0.0;  // NaN when the run failed
    double ratio = 0.0;      // NaN when failed or no positive reference
    int iterations = 0;
    bool converged = false;
    double runtime_ms = 0.0;
    std::optional<double> residual;
    std::string error;
};

/// Generates every replication, runs each algorithm and fills in ratios. The
/// exhaustive optimum is the reference when n <= 28 and exact is planned;
/// otherwise the best objective of the replication.
std::vector<BenchRecord> run_bench(const BenchPlan& plan, std::ostream* log = nullptr);

/// Instance of replication `rep` (seeded with plan.replication_seed(rep)).
GraphModel bench_instance(const BenchPlan& plan, int rep);
BinaryImage synthetic_image(int side);

struct QuantileRow {
    Algorithm algorithm = Algorithm::kExact;
    std::size_t count = 0;
    double q05 = 0.0, q10 = 0.0, q60 = 0.0;
};

/// Linear interpolation between order statistics, h = (N - 1) q.
double quantile(std::vector<double> values, double q);
std::vector<QuantileRow> summarize(std::span<const BenchRecord> records, std::span<const Algorithm> order);

void write_bench_csv(std::ostream& out, std::span<const BenchRecord> records);
void write_summary_csv(std::ostream& out, std::span<const QuantileRow> rows);

}  // namespace psos
