#include "psos/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <set>

#include "psos/errors.hpp"

namespace psos {

namespace {

Assignment assignment_from_mask(std::uint32_t mask, int n) {
    std::vector<Spin> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = (mask >> i) & 1u ? Spin{-1} : Spin{1};
    return Assignment(std::move(v));
}

// Lexicographic order on (x_0, x_1, ...) with +1 < -1, where bit i set means x_i = -1.
bool lex_less(std::uint32_t a, std::uint32_t b) {
    const std::uint32_t diff = a ^ b;
    if (diff == 0) return false;
    const std::uint32_t low = diff & (~diff + 1u);
    return (a & low) == 0;
}

}  // namespace

MapResult exhaustive_map(const GraphModel& model) {
    const int n = model.num_vertices();
    if (n > kMaxExhaustiveVertices) {
        throw LimitError("exhaustive search limited to n <= " + std::to_string(kMaxExhaustiveVertices));
    }
    std::vector<double> x(static_cast<std::size_t>(n), 1.0);
    double scale = 1.0;
    double value = 0.0;
    for (const Edge& e : model.edges()) {
        value += e.weight;
        scale += std::abs(e.weight);
    }
    for (double h : model.vertex_weights()) {
        value += h;
        scale += std::abs(h);
    }
    const double tie_tol = 1e-9 * scale;

    std::uint32_t mask = 0;
    std::uint32_t best_mask = 0;
    double best = value;
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t k = 1; k < total; ++k) {
        const int b = std::countr_zero(k);
        const auto bi = static_cast<std::size_t>(b);
        double field = model.vertex_weight(b);
        for (const Neighbor& nb : model.neighbors(b)) field += nb.weight * x[static_cast<std::size_t>(nb.vertex)];
        value -= 2.0 * x[bi] * field;
        x[bi] = -x[bi];
        mask ^= (1u << b);

        if (value > best + tie_tol) {
            best = value;
            best_mask = mask;
        } else if (value >= best - tie_tol) {
            // Incremental sums drift; settle near-ties on exactly recomputed values.
            const double exact_new = objective_value(model, assignment_from_mask(mask, n));
            const double exact_best = objective_value(model, assignment_from_mask(best_mask, n));
            if (exact_new > exact_best || (exact_new == exact_best && lex_less(mask, best_mask))) {
                best = value;
                best_mask = mask;
            }
        }
    }
    MapResult result{assignment_from_mask(best_mask, n), 0.0};
    result.value = objective_value(model, result.assignment);
    return result;
}

CycleList enumerate_chordless_cycles(const GraphModel& model, int max_len) {
    const int n = model.num_vertices();
    if (n > 64) throw LimitError("chordless cycle enumeration limited to n <= 64");
    if (max_len > 12) throw LimitError("chordless cycle enumeration limited to length <= 12");
    std::vector<std::uint64_t> adj(static_cast<std::size_t>(n), 0);
    for (const Edge& e : model.edges()) {
        adj[static_cast<std::size_t>(e.i)] |= std::uint64_t{1} << e.j;
        adj[static_cast<std::size_t>(e.j)] |= std::uint64_t{1} << e.i;
    }
    CycleList out;
    std::vector<int> path;

    // path[0] is the smallest vertex; `inner` holds path[1..k-1] (vertices a new
    // vertex may not touch).
    auto extend = [&](auto&& self, std::uint64_t inner) -> void {
        const int start = path.front();
        const int last = path.back();
        const std::uint64_t start_bit = std::uint64_t{1} << start;
        std::uint64_t candidates = adj[static_cast<std::size_t>(last)];
        while (candidates) {
            const int v = std::countr_zero(candidates);
            candidates &= candidates - 1;
            if (v <= start) continue;
            const std::uint64_t vb = std::uint64_t{1} << v;
            if ((inner & vb) || v == last) continue;
            const std::uint64_t nbrs = adj[static_cast<std::size_t>(v)];
            if (nbrs & inner) continue;  // chord to an interior path vertex
            if (nbrs & start_bit) {
                if (path.size() >= 2 && path[1] < v) {
                    path.push_back(v);
                    out.cycles.push_back(path);
                    path.pop_back();
                }
                continue;
            }
            if (static_cast<int>(path.size()) + 1 >= max_len) continue;
            path.push_back(v);
            self(self, path.size() > 2 ? inner | (std::uint64_t{1} << last) : inner);
            path.pop_back();
        }
    };

    for (int s = 0; s < n; ++s) {
        path.assign(1, s);
        std::uint64_t first = adj[static_cast<std::size_t>(s)];
        while (first) {
            const int v = std::countr_zero(first);
            first &= first - 1;
            if (v <= s) continue;
            path.push_back(v);
            extend(extend, 0);
            path.pop_back();
        }
    }
    return out;
}

namespace {

std::string join_ids(std::initializer_list<int> ids) {
    std::string s;
    for (int id : ids) {
        if (!s.empty()) s += '-';
        s += std::to_string(id);
    }
    return s;
}

void record(ViolationReport& report, std::string kind, std::string ids, double lhs, double rhs, double tol) {
    ++report.checked;
    const double slack = lhs - rhs;
    if (slack < -tol) {
        report.violations.push_back({std::move(kind), std::move(ids), lhs, rhs, slack});
        report.max_violation = std::max(report.max_violation, -slack);
    }
}

void check_triangle(ViolationReport& report, const Eigen::MatrixXd& M, int i, int j, int k, double tol) {
    // Middle vertex j: |M_ij + M_jk| <= 1 + M_ik.
    record(report, "triangle", join_ids({i, j, k}), 1.0 + M(i, k), std::abs(M(i, j) + M(j, k)), tol);
}

void check_all_orientations(ViolationReport& report, const Eigen::MatrixXd& M, const Triple& t, double tol) {
    check_triangle(report, M, t[0], t[1], t[2], tol);
    check_triangle(report, M, t[1], t[2], t[0], tol);
    check_triangle(report, M, t[2], t[0], t[1], tol);
}

}  // namespace

ViolationReport check_metric_polytope(const MomentMatrix& moments, const CycleList& cycles, double tol) {
    const Eigen::MatrixXd& M = moments.vertex_block;
    const Eigen::Index n = M.rows();
    ViolationReport report;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            record(report, "bound", join_ids({static_cast<int>(i), static_cast<int>(j)}), 1.0, std::abs(M(i, j)), tol);
        }
    }
    for (const auto& cycle : cycles.cycles) {
        const std::size_t len = cycle.size();
        if (len < 3) continue;
        for (int v : cycle) {
            if (v < 0 || v >= n) throw DimensionError("cycle vertex outside the moment matrix");
        }
        if (len > 12) throw LimitError("cyclic inequalities limited to cycles of length <= 12");
        if (len == 3) check_all_orientations(report, M, {cycle[0], cycle[1], cycle[2]}, tol);

        std::vector<double> edge_moment(len);
        for (std::size_t e = 0; e < len; ++e) edge_moment[e] = M(cycle[e], cycle[(e + 1) % len]);
        std::string base;
        for (int v : cycle) base += (base.empty() ? "" : "-") + std::to_string(v);
        const std::uint32_t subsets = 1u << len;
        for (std::uint32_t F = 1; F < subsets; ++F) {
            if (std::popcount(F) % 2 == 0) continue;
            double lhs = 0.0;
            for (std::size_t e = 0; e < len; ++e) lhs += (F >> e) & 1u ? edge_moment[e] : -edge_moment[e];
            record(report, "cyclic", base + "|F=" + std::to_string(F), lhs, 2.0 - static_cast<double>(len), tol);
        }
    }
    return report;
}

ViolationReport check_triangle_inequalities(const MomentMatrix& moments, std::span<const Triple> triples, double tol) {
    ViolationReport report;
    const Eigen::Index n = moments.vertex_block.rows();
    for (const Triple& t : triples) {
        for (int v : t) {
            if (v < 0 || v >= n) throw DimensionError("triple vertex outside the moment matrix");
        }
        check_all_orientations(report, moments.vertex_block, t, tol);
    }
    return report;
}

std::vector<Triple> region_triples(const RegionCovering& cov) {
    std::set<Triple> triples;
    for (const auto& region : cov.regions) {
        std::vector<int> r(region);
        std::sort(r.begin(), r.end());
        for (std::size_t a = 0; a < r.size(); ++a) {
            for (std::size_t b = a + 1; b < r.size(); ++b) {
                for (std::size_t c = b + 1; c < r.size(); ++c) triples.insert({r[a], r[b], r[c]});
            }
        }
    }
    return {triples.begin(), triples.end()};
}

void write_violation_csv(std::ostream& out, const ViolationReport& report) {
    out << "kind,ids,lhs,rhs,slack\n";
    const auto old = out.precision(17);
    for (const Violation& v : report.violations) {
        out << v.kind << ',' << v.ids << ',' << v.lhs << ',' << v.rhs << ',' << v.slack << '\n';
    }
    out.precision(old);
}

RatioResult ratio_to_best(std::span<const double> values, std::optional<double> reference) {
    if (values.empty()) throw DimensionError("ratio_to_best needs at least one value");
    const double divisor = reference ? *reference : *std::max_element(values.begin(), values.end());
    RatioResult out;
    if (!(divisor > 0.0)) {
        out.ratios.assign(values.begin(), values.end());
        out.raw_fallback = true;
        return out;
    }
    out.ratios.reserve(values.size());
    for (double v : values) out.ratios.push_back(v / divisor);
    return out;
}

}  // namespace psos
