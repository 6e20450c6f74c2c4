// psos: instance generation, solving, certificate checks and benchmarks.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "psos/bench.hpp"
#include "psos/errors.hpp"
#include "psos/io.hpp"
#include "psos/message_passing.hpp"
#include "psos/oracle.hpp"
#include "psos/sdp.hpp"

namespace {

using namespace psos;

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct GenSpinGlassArgs {
    int side = 4;
    int dist = 1;
    std::uint64_t seed = 0;
    std::string out;
};

struct GenDenoiseArgs {
    std::string image;
    std::string noise = "bernoulli";
    double p = 0.1;
    double theta0 = 1.0;
    std::uint64_t seed = 0;
    std::string out_model;
    std::string out_noisy;
};

struct SolveArgs {
    std::string model;
    std::string alg = "psos4";
    SolverConfig solver;
    std::string regions = "triangle";
    std::string out_assignment;
    std::string out_state;
    std::string trace;
};

struct VerifyArgs {
    std::string model;
    std::string state;
    int cycles_max_len = 4;
    double tol = kCertificateTolerance;
    std::string out;
};

struct BenchArgs {
    std::string plan;
    std::string out;
};

void run_gen_spinglass(const GenSpinGlassArgs& a) {
    const GraphModel model = gen_spinglass(a.side, spin_glass_distribution_from_int(a.dist), a.seed);
    if (a.out.empty()) {
        write_model(std::cout, model);
    } else {
        write_model_file(a.out, model);
    }
}

void run_gen_denoise(const GenDenoiseArgs& a) {
    const BinaryImage clean = read_pgm_file(a.image);
    const BinaryImage noisy = add_noise(clean, noise_kind_from_string(a.noise), a.p, a.seed);
    const GraphModel model = gen_denoise_model(noisy, a.theta0);
    write_model_file(a.out_model, model);
    if (!a.out_noisy.empty()) write_pgm_file(a.out_noisy, noisy);
}

void run_solve(const SolveArgs& a) {
    const GraphModel model = read_model_file(a.model);
    SolveSettings settings;
    settings.solver = a.solver;
    settings.regions = region_choice_from_string(a.regions);
    const SolveOutcome out = solve(model, algorithm_from_string(a.alg), settings);

    std::cout << "algorithm " << algorithm_name(out.algorithm) << '\n';
    std::cout << "objective " << format_real(out.objective) << '\n';
    std::cout << "iterations " << out.iterations << '\n';
    std::cout << "converged " << (out.converged ? 1 : 0) << '\n';
    if (out.residual) std::cout << "residual " << format_real(*out.residual) << '\n';
    std::cout << "runtime_ms " << format_real(out.runtime_ms) << '\n';
    std::cout << "assignment ";
    write_assignment(std::cout, out.assignment);

    if (!a.out_assignment.empty()) write_assignment_file(a.out_assignment, out.assignment);
    if (!a.out_state.empty()) {
        if (!out.state) throw StructureError("--out-state needs a psos algorithm");
        write_gram_state_file(a.out_state, *out.state);
    }
    if (!a.trace.empty()) {
        std::ofstream f(a.trace);
        if (!f) throw Error("cannot open '" + a.trace + "' for writing");
        if (!out.sweeps.empty()) {
            write_trace_csv(f, out.sweeps);
        } else {
            write_iteration_csv(f, out.rounds);
        }
    }
}

void run_verify(const VerifyArgs& a) {
    const GraphModel model = read_model_file(a.model);
    const GramState state = read_gram_state_file(a.state);
    if (state.index->num_vertices() != model.num_vertices()) throw DimensionError("state and model sizes differ");

    // Cycles of the model graph together with every pair the state carries.
    std::vector<Edge> edges(model.edges().begin(), model.edges().end());
    std::set<std::pair<int, int>> present;
    for (const Edge& e : edges) present.emplace(e.i, e.j);
    for (const auto& pr : state.index->pairs()) {
        if (present.insert(pr).second) edges.push_back({pr.first, pr.second, 0.0});
    }
    const GraphModel support(model.num_vertices(), std::move(edges),
                             std::vector<double>(static_cast<std::size_t>(model.num_vertices()), 0.0));
    const CycleList cycles = enumerate_chordless_cycles(support, a.cycles_max_len);
    const ViolationReport report = check_metric_polytope(moment_matrix(state), cycles, a.tol);

    std::cout << "cycles " << cycles.cycles.size() << '\n';
    std::cout << "checked " << report.checked << '\n';
    std::cout << "violations " << report.violations.size() << '\n';
    std::cout << "max_violation " << format_real(report.max_violation) << '\n';
    std::cout << (report.ok() ? "ok" : "violated") << '\n';
    if (!a.out.empty()) {
        std::ofstream f(a.out);
        if (!f) throw Error("cannot open '" + a.out + "' for writing");
        write_violation_csv(f, report);
    }
}

void run_bench_cmd(const BenchArgs& a) {
    const BenchPlan plan = read_plan_file(a.plan);
    const auto records = run_bench(plan, &std::cerr);
    {
        std::ofstream f(a.out);
        if (!f) throw Error("cannot open '" + a.out + "' for writing");
        write_bench_csv(f, records);
    }
    const auto rows = summarize(records, plan.algs);
    const std::string summary_path = a.out + ".summary.csv";
    std::ofstream f(summary_path);
    if (!f) throw Error("cannot open '" + summary_path + "' for writing");
    write_summary_csv(f, rows);
    write_summary_csv(std::cout, rows);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MAP inference on binary pairwise models with degree-4 partial SOS"};
    app.require_subcommand(1);

    GenSpinGlassArgs gs;
    auto* gen_sg = app.add_subcommand("gen-spinglass", "Generate a side x side spin-glass model");
    gen_sg->add_option("--side", gs.side, "Grid side")->required()->check(CLI::PositiveNumber);
    gen_sg->add_option("--dist", gs.dist, "Distribution 1..4")->required()->check(CLI::Range(1, 4));
    gen_sg->add_option("--seed", gs.seed, "Random seed");
    gen_sg->add_option("--out", gs.out, "Output model file (stdout when omitted)");

    GenDenoiseArgs gd;
    auto* gen_dn = app.add_subcommand("gen-denoise", "Corrupt a PGM image and build its denoising model");
    gen_dn->add_option("--image", gd.image, "Clean PGM image")->required();
    gen_dn->add_option("--noise", gd.noise, "Noise model")->check(CLI::IsMember({"bernoulli", "blockwise"}));
    gen_dn->add_option("--p", gd.p, "Flip or block probability")->check(CLI::Range(0.0, 1.0));
    gen_dn->add_option("--theta0", gd.theta0, "Field strength");
    gen_dn->add_option("--seed", gd.seed, "Random seed");
    gen_dn->add_option("--out-model", gd.out_model, "Output model file")->required();
    gen_dn->add_option("--out-noisy", gd.out_noisy, "Output noisy PGM");

    SolveArgs sv;
    auto* solve_cmd = app.add_subcommand("solve", "Run one algorithm on a model file");
    solve_cmd->add_option("--model", sv.model, "Model file")->required();
    solve_cmd->add_option("--alg", sv.alg, "Algorithm")
        ->check(CLI::IsMember({"psos4", "psos2", "bp-sp", "bp-mp", "gbp", "exact"}));
    solve_cmd->add_option("--rank", sv.solver.rank, "Gram vector dimension");
    solve_cmd->add_option("--rho", sv.solver.rho, "Penalty parameter");
    solve_cmd->add_option("--tol", sv.solver.tol, "Stop when a sweep's change falls below this");
    solve_cmd->add_option("--max-sweeps", sv.solver.max_sweeps, "Sweep limit per lift");
    solve_cmd->add_option("--seed", sv.solver.seed, "Initialization seed");
    solve_cmd->add_option("--regions", sv.regions, "Region family for psos4")
        ->check(CLI::IsMember({"triangle", "plaquette", "vertex"}));
    solve_cmd->add_option("--out-assignment", sv.out_assignment, "Write the assignment here");
    solve_cmd->add_option("--out-state", sv.out_state, "Write the final Gram state here (psos only)");
    solve_cmd->add_option("--trace", sv.trace, "Write the per-sweep or per-iteration trace CSV here");

    VerifyArgs vf;
    auto* verify_cmd = app.add_subcommand("verify", "Check a Gram state against the metric polytope");
    verify_cmd->add_option("--model", vf.model, "Model file")->required();
    verify_cmd->add_option("--state", vf.state, "Gram state file")->required();
    verify_cmd->add_option("--cycles-max-len", vf.cycles_max_len, "Longest chordless cycle to check")
        ->check(CLI::Range(3, 12));
    verify_cmd->add_option("--tol", vf.tol, "Violation tolerance");
    verify_cmd->add_option("--out", vf.out, "Write violations as CSV here");

    BenchArgs bn;
    auto* bench_cmd = app.add_subcommand("bench", "Run a seeded benchmark plan");
    bench_cmd->add_option("--plan", bn.plan, "Plan file (key=value lines)")->required();
    bench_cmd->add_option("--out", bn.out, "Results CSV; the quantile summary goes to <out>.summary.csv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*gen_sg) run_gen_spinglass(gs);
        if (*gen_dn) run_gen_denoise(gd);
        if (*solve_cmd) run_solve(sv);
        if (*verify_cmd) run_verify(vf);
        if (*bench_cmd) run_bench_cmd(bn);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
