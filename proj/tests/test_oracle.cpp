#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "psos/errors.hpp"
#include "psos/model.hpp"
#include "psos/oracle.hpp"
#include "psos/sdp.hpp"

using namespace psos;

namespace {

// Plain binary counting, no Gray code, no incremental updates.
double naive_optimum(const GraphModel& m) {
    const int n = m.num_vertices();
    double best = -INFINITY;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        double u = 0.0;
        auto x = [mask](int i) { return (mask >> i) & 1u ? -1.0 : 1.0; };
        for (const Edge& e : m.edges()) u += e.weight * x(e.i) * x(e.j);
        for (int i = 0; i < n; ++i) u += m.vertex_weight(i) * x(i);
        best = std::max(best, u);
    }
    return best;
}

GraphModel random_graph(int n, double density, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal;
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (unit(rng) < density) edges.push_back({i, j, normal(rng)});
        }
    }
    std::vector<double> h(static_cast<std::size_t>(n));
    for (double& v : h) v = normal(rng);
    return GraphModel(n, std::move(edges), std::move(h));
}

// Vertex subsets whose induced subgraph is a single cycle.
std::size_t brute_force_cycles(const GraphModel& m, int max_len) {
    const int n = m.num_vertices();
    std::size_t count = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        const int size = __builtin_popcount(mask);
        if (size < 3 || size > max_len) continue;
        bool degrees_ok = true;
        int start = -1;
        for (int i = 0; i < n && degrees_ok; ++i) {
            if (!((mask >> i) & 1u)) continue;
            start = i;
            int deg = 0;
            for (const Neighbor& nb : m.neighbors(i)) deg += (mask >> nb.vertex) & 1u;
            degrees_ok = deg == 2;
        }
        if (!degrees_ok) continue;
        // 2-regular: a single cycle iff connected.
        std::uint32_t seen = 1u << start;
        std::vector<int> stack{start};
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (const Neighbor& nb : m.neighbors(v)) {
                const std::uint32_t bit = 1u << nb.vertex;
                if ((mask & bit) && !(seen & bit)) {
                    seen |= bit;
                    stack.push_back(nb.vertex);
                }
            }
        }
        if (seen == mask) ++count;
    }
    return count;
}

MomentMatrix from_matrix(const Eigen::MatrixXd& m) {
    MomentMatrix mm;
    mm.vertex_block = m;
    return mm;
}

CycleList all_triangles(int n) {
    CycleList c;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            for (int k = j + 1; k < n; ++k) c.cycles.push_back({i, j, k});
        }
    }
    return c;
}

}  // namespace

TEST_CASE("exhaustive optimum on tiny models") {
    const MapResult single = exhaustive_map(GraphModel(1, {}, {-2.0}));
    CHECK(single.assignment == Assignment({-1}));
    CHECK(single.value == 2.0);
    const GraphModel tri(3, {{0, 1, -1.0}, {0, 2, -1.0}, {1, 2, -1.0}}, {0.0, 0.0, 0.0});
    CHECK(exhaustive_map(tri).value == 1.0);
    // Ties go to the lexicographically smallest assignment with +1 first.
    CHECK(exhaustive_map(GraphModel(2, {}, {0.0, 0.0})).assignment == Assignment({1, 1}));
    CHECK(exhaustive_map(tri).assignment == Assignment({1, 1, -1}));
}

TEST_CASE("exhaustive optimum matches an independent enumerator") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 1 + trial % 16;
        const GraphModel m = random_graph(n, 0.4, rng);
        const MapResult r = exhaustive_map(m);
        CHECK(r.value == doctest::Approx(naive_optimum(m)).epsilon(1e-12));
        CHECK(objective_value(m, r.assignment) == doctest::Approx(r.value).epsilon(1e-12));
    }
    const GraphModel g16 = gen_spinglass(4, SpinGlassDistribution::kUniformFieldOne, 7);
    CHECK(exhaustive_map(g16).value == naive_optimum(g16));
}

TEST_CASE("exhaustive search refuses large models") {
    CHECK_THROWS_AS(exhaustive_map(GraphModel(kMaxExhaustiveVertices + 1, {},
                                              std::vector<double>(kMaxExhaustiveVertices + 1, 0.0))),
                    LimitError);
}

TEST_CASE("chordless cycles of small graphs") {
    const GraphModel tri(3, {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}}, {0.0, 0.0, 0.0});
    const CycleList t = enumerate_chordless_cycles(tri, 4);
    REQUIRE(t.cycles.size() == 1);
    CHECK(t.cycles[0] == std::vector<int>{0, 1, 2});

    const GraphModel square(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {0, 3, 1.0}}, std::vector<double>(4, 0.0));
    const CycleList s = enumerate_chordless_cycles(square, 4);
    REQUIRE(s.cycles.size() == 1);
    CHECK(s.cycles[0] == std::vector<int>{0, 1, 2, 3});

    const GraphModel chorded(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {0, 3, 1.0}, {0, 2, 1.0}},
                             std::vector<double>(4, 0.0));
    const CycleList c = enumerate_chordless_cycles(chorded, 4);
    CHECK(c.cycles.size() == 2);
    for (const auto& cyc : c.cycles) CHECK(cyc.size() == 3);
}

TEST_CASE("chordless cycles match a brute-force search") {
    std::vector<double> w(12, 1.0), h(9, 0.0);
    const GraphModel g3 = grid_model(3, w, h);
    for (int len = 3; len <= 9; ++len) CHECK(enumerate_chordless_cycles(g3, len).cycles.size() == brute_force_cycles(g3, len));
    CHECK(enumerate_chordless_cycles(g3, 4).cycles.size() == 4);

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const GraphModel m = random_graph(10, 0.35, rng);
        CHECK(enumerate_chordless_cycles(m, 10).cycles.size() == brute_force_cycles(m, 10));
    }
    const GraphModel diag = augment_with_diagonals(gen_spinglass(4, SpinGlassDistribution::kUniformFieldOne, 0), 4);
    CHECK(enumerate_chordless_cycles(diag, 8).cycles.size() == brute_force_cycles(diag, 8));
}

TEST_CASE("cut matrices lie in the metric polytope") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + trial % 10;
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x(i) = coin(rng) ? 1.0 : -1.0;
        const GraphModel complete = random_graph(n, 1.0, rng);
        const ViolationReport r =
            check_metric_polytope(from_matrix(x * x.transpose()), enumerate_chordless_cycles(complete, 3));
        CHECK(r.ok());
        CHECK(r.checked > 0);
    }
}

TEST_CASE("the PSD matrix with off-diagonal -1/2 is not a cut combination") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(3, 3, -0.5);
    m.diagonal().setOnes();
    const ViolationReport r = check_metric_polytope(from_matrix(m), all_triangles(3));
    CHECK_FALSE(r.ok());
    bool triangle = false, cyclic = false;
    for (const Violation& v : r.violations) {
        if (v.kind == "triangle") {
            triangle = true;
            CHECK(v.slack == doctest::Approx(-0.5));
        }
        if (v.kind == "cyclic") {
            cyclic = true;
            CHECK(v.slack == doctest::Approx(-0.5));
        }
    }
    CHECK(triangle);
    CHECK(cyclic);
    CHECK(r.max_violation == doctest::Approx(0.5));

    const std::vector<Triple> triples{{0, 1, 2}};
    CHECK_FALSE(check_triangle_inequalities(from_matrix(m), triples).ok());
    std::ostringstream csv;
    write_violation_csv(csv, r);
    CHECK(csv.str().find("triangle") != std::string::npos);
}

TEST_CASE("bound violations") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2, 2);
    m(0, 1) = m(1, 0) = 1.2;
    const ViolationReport r = check_metric_polytope(from_matrix(m), CycleList{});
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].kind == "bound");
}

TEST_CASE("region triples") {
    CHECK(region_triples(triangle_covering(2)).size() == 2);
    CHECK(region_triples(plaquette_covering(2)).size() == 4);
    CHECK(region_triples(RegionCovering{{{0, 1, 2}, {0, 1, 2}}}).size() == 1);
}

TEST_CASE("ratios") {
    const std::vector<double> v{4.0, 2.0};
    const RatioResult r = ratio_to_best(v, 4.0);
    CHECK(r.ratios == std::vector<double>{1.0, 0.5});
    CHECK_FALSE(r.raw_fallback);
    CHECK(ratio_to_best(std::vector<double>{3.0}).ratios == std::vector<double>{1.0});
    const RatioResult neg = ratio_to_best(std::vector<double>{-1.0, -2.0});
    CHECK(neg.raw_fallback);
    CHECK(neg.ratios == std::vector<double>{-1.0, -2.0});
}
