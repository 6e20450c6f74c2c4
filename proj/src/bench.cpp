#include "psos/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "psos/errors.hpp"
#include "psos/io.hpp"
#include "psos/oracle.hpp"
#include "psos/rounding.hpp"

namespace psos {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::pair<Algorithm, const char*> kAlgorithmNames[] = {
    {Algorithm::kPsos4, "psos4"}, {Algorithm::kPsos2, "psos2"}, {Algorithm::kBpSum, "bp-sp"},
    {Algorithm::kBpMax, "bp-mp"}, {Algorithm::kGbp, "gbp"},     {Algorithm::kExact, "exact"},
};

RegionCovering grid_covering(const GraphModel& model, RegionChoice choice, const GridShape& grid) {
    RegionCovering cov;
    switch (choice) {
        case RegionChoice::kTriangle: cov = triangle_covering(grid.rows, grid.cols); break;
        case RegionChoice::kPlaquette: cov = plaquette_covering(grid.rows, grid.cols); break;
        case RegionChoice::kVertex: cov = vertex_covering(model.num_vertices()); break;
    }
    cov = canonical_covering(model, std::move(cov));
    if (!validate_covering(model, cov).ok()) throw StructureError("regions do not cover the model's edges");
    return cov;
}

SolveOutcome run_psos2(const GraphModel& model, const SolveSettings& settings) {
    const ConstraintCatalog catalog = compile_constraints(model.num_vertices(), vertex_covering(model.num_vertices()));
    PartialSosResult lift = partial_sos(model, catalog, settings.solver, init_state(catalog, settings.solver));
    SolveOutcome out;
    out.assignment = sign_round(lift.state);
    out.iterations = static_cast<int>(lift.trace.size());
    out.converged = lift.converged;
    out.residual = residual_norm(lift.state, catalog);
    out.sweeps = std::move(lift.trace);
    out.state = std::move(lift.state);
    return out;
}

SolveOutcome run_psos4(const GraphModel& model, const SolveSettings& settings) {
    if (settings.regions == RegionChoice::kVertex) return run_psos2(model, settings);
    const RegionCovering cov = grid_covering(model, settings.regions, resolve_grid(model, settings));
    ClapOptions options;
    options.solver = settings.solver;
    ClapResult r = clap(model, cov, options);
    SolveOutcome out;
    out.assignment = std::move(r.assignment);
    out.iterations = r.sweeps;
    out.converged = r.converged;
    if (!r.trace.empty()) out.residual = r.trace.back().residual;
    out.sweeps = std::move(r.trace);
    out.state = std::move(r.state);
    return out;
}

SolveOutcome run_gbp(const GraphModel& model, const SolveSettings& settings) {
    const GridShape grid = resolve_grid(model, settings);
    for (const Edge& e : model.edges()) {
        const bool right = e.j == e.i + 1 && e.i % grid.cols + 1 < grid.cols;
        const bool down = e.j == e.i + grid.cols;
        if (!right && !down) throw StructureError("GBP expects a grid without diagonals");
    }
    const RegionCovering top = grid.rows >= 2 && grid.cols >= 2 ? plaquette_covering(grid.rows, grid.cols)
                                                                : vertex_covering(model.num_vertices());
    DecodeResult r = gbp(model, top, settings.gbp, Semiring::kMaxProduct);
    SolveOutcome out;
    out.assignment = std::move(r.assignment);
    out.iterations = r.iterations;
    out.converged = r.converged;
    out.rounds = std::move(r.trace);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string csv_real(double v) { return std::isnan(v) ? "nan" : format_real(v); }

}  // namespace

std::string algorithm_name(Algorithm alg) {
    for (const auto& [a, name] : kAlgorithmNames) {
        if (a == alg) return name;
    }
    throw StructureError("unknown algorithm");
}

Algorithm algorithm_from_string(const std::string& name) {
    for (const auto& [a, n] : kAlgorithmNames) {
        if (name == n) return a;
    }
    throw StructureError("unknown algorithm '" + name + "'");
}

std::vector<Algorithm> all_algorithms() {
    std::vector<Algorithm> out;
    for (const auto& entry : kAlgorithmNames) out.push_back(entry.first);
    return out;
}

RegionChoice region_choice_from_string(const std::string& name) {
    if (name == "triangle") return RegionChoice::kTriangle;
    if (name == "plaquette") return RegionChoice::kPlaquette;
    if (name == "vertex") return RegionChoice::kVertex;
    throw StructureError("unknown region family '" + name + "'");
}

GridShape resolve_grid(const GraphModel& model, const SolveSettings& settings) {
    if (settings.grid) {
        if (settings.grid->rows * settings.grid->cols != model.num_vertices()) {
            throw DimensionError("grid shape does not match the vertex count");
        }
        return *settings.grid;
    }
    const auto side = infer_grid_side(model);
    if (!side) throw StructureError("model is not a square grid; grid regions need a grid");
    return {*side, *side};
}

SolveOutcome solve(const GraphModel& model, Algorithm alg, const SolveSettings& settings) {
    const auto start = std::chrono::steady_clock::now();
    SolveOutcome out;
    switch (alg) {
        case Algorithm::kPsos4: out = run_psos4(model, settings); break;
        case Algorithm::kPsos2: out = run_psos2(model, settings); break;
        case Algorithm::kBpSum: {
            SumProductResult r = bp_sum_product(model, settings.bp);
            out.assignment = std::move(r.assignment);
            out.iterations = r.iterations;
            out.converged = r.converged;
            out.rounds = std::move(r.trace);
            break;
        }
        case Algorithm::kBpMax: {
            DecodeResult r = bp_max_product(model, settings.bp);
            out.assignment = std::move(r.assignment);
            out.iterations = r.iterations;
            out.converged = r.converged;
            out.rounds = std::move(r.trace);
            break;
        }
        case Algorithm::kGbp: out = run_gbp(model, settings); break;
        case Algorithm::kExact: out.assignment = exhaustive_map(model).assignment; break;
    }
    out.algorithm = alg;
    out.objective = objective_value(model, out.assignment);
    out.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return out;
}

void BenchPlan::validate() const {
    if (reps < 1) throw StructureError("reps must be at least 1");
    if (side < 1) throw StructureError("side must be positive");
    if (algs.empty()) throw StructureError("no algorithms listed");
    if (family == Family::kSpinGlass) spin_glass_distribution_from_int(dist);
    if (family == Family::kDenoise && !(p >= 0.0 && p <= 1.0)) throw StructureError("p must lie in [0, 1]");
    solver.validate();
}

BenchPlan parse_plan(std::istream& in) {
    BenchPlan plan;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key=value", number);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            std::size_t used = 0;
            auto whole = [&](std::size_t n) {
                if (n != value.size()) throw std::invalid_argument(value);
            };
            if (key == "family") {
                if (value == "spinglass") plan.family = Family::kSpinGlass;
                else if (value == "denoise") plan.family = Family::kDenoise;
                else throw ParseError("family must be spinglass or denoise", number);
            } else if (key == "side") {
                plan.side = std::stoi(value, &used); whole(used);
            } else if (key == "dist") {
                plan.dist = std::stoi(value, &used); whole(used);
            } else if (key == "noise") {
                plan.noise = noise_kind_from_string(value);
            } else if (key == "p") {
                plan.p = std::stod(value, &used); whole(used);
            } else if (key == "theta0") {
                plan.theta0 = std::stod(value, &used); whole(used);
            } else if (key == "reps") {
                plan.reps = std::stoi(value, &used); whole(used);
            } else if (key == "seed") {
                plan.seed = std::stoull(value, &used); whole(used);
            } else if (key == "algs") {
                plan.algs.clear();
                std::stringstream list(value);
                for (std::string name; std::getline(list, name, ',');) {
                    name = trim(name);
                    if (name == "all") {
                        plan.algs = all_algorithms();
                    } else if (!name.empty()) {
                        plan.algs.push_back(algorithm_from_string(name));
                    }
                }
            } else if (key == "rank") {
                plan.solver.rank = std::stoi(value, &used); whole(used);
            } else if (key == "rho") {
                plan.solver.rho = std::stod(value, &used); whole(used);
            } else if (key == "tol") {
                plan.solver.tol = std::stod(value, &used); whole(used);
            } else if (key == "max_sweeps") {
                plan.solver.max_sweeps = std::stoi(value, &used); whole(used);
            } else if (key == "image") {
                plan.image = value;
            } else {
                throw ParseError("unknown key '" + key + "'", number);
            }
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError("bad value for '" + key + "': '" + value + "'", number);
        }
    }
    plan.validate();
    return plan;
}

BenchPlan read_plan_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open '" + path + "' for reading");
    return parse_plan(f);
}

BinaryImage synthetic_image(int side) {
    if (side < 1) throw StructureError("side must be positive");
    std::vector<Spin> pixels(static_cast<std::size_t>(side) * static_cast<std::size_t>(side), Spin{-1});
    const double c = 0.5 * (side - 1);
    const double radius = side / 4.0;
    for (int r = 0; r < side; ++r) {
        for (int col = 0; col < side; ++col) {
            const double dr = r - c * 0.8;
            const double dc = col - c * 0.8;
            const bool disc = dr * dr + dc * dc <= radius * radius;
            const bool bar = r >= side * 3 / 4 && r < side * 7 / 8 && col >= side / 8 && col < side * 7 / 8;
            if (disc || bar) pixels[static_cast<std::size_t>(r * side + col)] = Spin{1};
        }
    }
    return BinaryImage(side, side, std::move(pixels));
}

namespace {

BinaryImage clean_image(const BenchPlan& plan) {
    return plan.image.empty() ? synthetic_image(plan.side) : read_pgm_file(plan.image);
}

GraphModel make_instance(const BenchPlan& plan, int rep, const BinaryImage* clean) {
    const std::uint64_t seed = plan.replication_seed(rep);
    if (plan.family == Family::kSpinGlass) {
        return gen_spinglass(plan.side, spin_glass_distribution_from_int(plan.dist), seed);
    }
    return gen_denoise_model(add_noise(*clean, plan.noise, plan.p, seed), plan.theta0);
}

}  // namespace

GraphModel bench_instance(const BenchPlan& plan, int rep) {
    if (plan.family == Family::kSpinGlass) return make_instance(plan, rep, nullptr);
    const BinaryImage clean = clean_image(plan);
    return make_instance(plan, rep, &clean);
}

std::vector<BenchRecord> run_bench(const BenchPlan& plan, std::ostream* log) {
    plan.validate();
    std::vector<BenchRecord> records;
    std::optional<BinaryImage> clean;
    if (plan.family == Family::kDenoise) clean = clean_image(plan);

    for (int rep = 0; rep < plan.reps; ++rep) {
        const std::uint64_t seed = plan.replication_seed(rep);
        SolveSettings settings;
        settings.solver = plan.solver;
        settings.solver.seed = seed;
        std::ostringstream id;
        if (clean) {
            id << "denoise-" << clean->width << "x" << clean->height << "-r" << rep;
            settings.grid = GridShape{clean->height, clean->width};
        } else {
            id << "spinglass-s" << plan.side << "-d" << plan.dist << "-r" << rep;
        }
        const GraphModel model = make_instance(plan, rep, clean ? &*clean : nullptr);

        const std::size_t first = records.size();
        std::optional<double> reference;
        for (Algorithm alg : plan.algs) {
            BenchRecord rec;
            rec.instance = id.str();
            rec.algorithm = alg;
            rec.n = model.num_vertices();
            rec.seed = seed;
            try {
                const SolveOutcome out = solve(model, alg, settings);
                rec.objective = out.objective;
                rec.iterations = out.iterations;
                rec.converged = out.converged;
                rec.runtime_ms = out.runtime_ms;
                rec.residual = out.residual;
                if (alg == Algorithm::kExact && model.num_vertices() <= kMaxExhaustiveVertices) reference = out.objective;
            } catch (const std::exception& e) {
                rec.objective = kNaN;
                rec.error = e.what();
            }
            if (log) {
                *log << rec.instance << ' ' << algorithm_name(alg) << ' '
                     << (rec.error.empty() ? format_real(rec.objective) : "failed: " + rec.error) << '\n';
            }
            records.push_back(std::move(rec));
        }

        std::vector<double> values;
        std::vector<std::size_t> rows;
        for (std::size_t k = first; k < records.size(); ++k) {
            records[k].ratio = kNaN;
            if (records[k].error.empty()) {
                values.push_back(records[k].objective);
                rows.push_back(k);
            }
        }
        if (values.empty()) continue;
        const RatioResult ratios = ratio_to_best(values, reference);
        if (ratios.raw_fallback) continue;
        for (std::size_t k = 0; k < rows.size(); ++k) records[rows[k]].ratio = ratios.ratios[k];
    }
    return records;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) return kNaN;
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<QuantileRow> summarize(std::span<const BenchRecord> records, std::span<const Algorithm> order) {
    std::vector<QuantileRow> rows;
    for (Algorithm alg : order) {
        std::vector<double> ratios;
        for (const BenchRecord& r : records) {
            if (r.algorithm == alg && !std::isnan(r.ratio)) ratios.push_back(r.ratio);
        }
        QuantileRow row;
        row.algorithm = alg;
        row.count = ratios.size();
        row.q05 = quantile(ratios, 0.05);
        row.q10 = quantile(ratios, 0.10);
        row.q60 = quantile(ratios, 0.60);
        rows.push_back(row);
    }
    return rows;
}

void write_bench_csv(std::ostream& out, std::span<const BenchRecord> records) {
    out << "instance,algorithm,n,seed,objective,ratio,iterations,converged,runtime_ms,residual\n";
    for (const BenchRecord& r : records) {
        out << r.instance << ',' << algorithm_name(r.algorithm) << ',' << r.n << ',' << r.seed << ','
            << csv_real(r.objective) << ',' << csv_real(r.ratio) << ',' << r.iterations << ',' << (r.converged ? 1 : 0)
            << ',' << csv_real(r.runtime_ms) << ',' << (r.residual ? csv_real(*r.residual) : "nan") << '\n';
    }
}

void write_summary_csv(std::ostream& out, std::span<const QuantileRow> rows) {
    out << "algorithm,count,q05,q10,q60\n";
    for (const QuantileRow& r : rows) {
        out << algorithm_name(r.algorithm) << ',' << r.count << ',' << csv_real(r.q05) << ',' << csv_real(r.q10) << ','
            << csv_real(r.q60) << '\n';
    }
}

}  // namespace psos
