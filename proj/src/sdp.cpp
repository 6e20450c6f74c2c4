#include "psos/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "psos/errors.hpp"
#include "psos/trust_region.hpp"

namespace psos {

GramIndex::GramIndex(int num_vertices, std::vector<std::pair<int, int>> covered_pairs)
    : num_vertices_(num_vertices), pairs_(std::move(covered_pairs)) {
    std::sort(pairs_.begin(), pairs_.end());
    pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
        const auto [i, j] = pairs_[k];
        if (i >= j || i < 0 || j >= num_vertices_) throw StructureError("invalid covered pair");
        lookup_.emplace(pairs_[k], 1 + num_vertices_ + static_cast<int>(k));
    }
}

std::optional<int> GramIndex::find_pair(int i, int j) const {
    if (i > j) std::swap(i, j);
    auto it = lookup_.find({i, j});
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

int GramIndex::pair(int i, int j) const {
    auto s = find_pair(i, j);
    if (!s) throw StructureError("pair (" + std::to_string(i) + ", " + std::to_string(j) + ") is not covered");
    return *s;
}

std::string GramIndex::label(int s) const {
    if (s == kEmpty) return "empty";
    if (is_vertex(s)) return "v" + std::to_string(vertex_of(s));
    if (is_pair(s)) {
        const auto [i, j] = pair_of(s);
        return "e" + std::to_string(i) + "_" + std::to_string(j);
    }
    return "?" + std::to_string(s);
}

ConstraintCatalog compile_constraints(int num_vertices, const RegionCovering& cov, std::size_t max_region_size) {
    if (max_region_size > 8) throw LimitError("regions larger than 8 vertices are not supported");
    std::set<std::pair<int, int>> covered;
    for (const auto& region : cov.regions) {
        if (region.size() > max_region_size) {
            throw StructureError("region of size " + std::to_string(region.size()) + " exceeds cap " +
                                 std::to_string(max_region_size));
        }
        for (int v : region) {
            if (v < 0 || v >= num_vertices) throw StructureError("region vertex out of range");
        }
        for (std::size_t a = 0; a < region.size(); ++a) {
            for (std::size_t b = a + 1; b < region.size(); ++b) {
                if (region[a] == region[b]) throw StructureError("region repeats a vertex");
                covered.emplace(std::min(region[a], region[b]), std::max(region[a], region[b]));
            }
        }
    }

    ConstraintCatalog catalog;
    auto index = std::make_shared<GramIndex>(num_vertices,
                                             std::vector<std::pair<int, int>>(covered.begin(), covered.end()));

    std::set<Equality> found;
    struct Element {
        unsigned mask;
        int gram;
    };
    for (const auto& region : cov.regions) {
        std::vector<Element> elements{{0u, GramIndex::kEmpty}};
        for (std::size_t a = 0; a < region.size(); ++a) {
            elements.push_back({1u << a, index->vertex(region[a])});
        }
        for (std::size_t a = 0; a < region.size(); ++a) {
            for (std::size_t b = a + 1; b < region.size(); ++b) {
                elements.push_back({(1u << a) | (1u << b), index->pair(region[a], region[b])});
            }
        }
        // Group Gram pairs by the moment S xor T they represent.
        std::map<unsigned, std::vector<std::pair<int, int>>> moments;
        for (std::size_t e = 0; e < elements.size(); ++e) {
            for (std::size_t f = e + 1; f < elements.size(); ++f) {
                const int x = elements[e].gram, y = elements[f].gram;
                moments[elements[e].mask ^ elements[f].mask].emplace_back(std::min(x, y), std::max(x, y));
            }
        }
        for (auto& [mask, reps] : moments) {
            std::sort(reps.begin(), reps.end());
            for (std::size_t k = 1; k < reps.size(); ++k) {
                found.insert({reps[0].first, reps[0].second, reps[k].first, reps[k].second});
            }
        }
    }

    catalog.equalities.assign(found.begin(), found.end());
    catalog.by_variable.assign(static_cast<std::size_t>(index->size()), {});
    for (std::size_t k = 0; k < catalog.equalities.size(); ++k) {
        const Equality& q = catalog.equalities[k];
        const int eq = static_cast<int>(k);
        auto add = [&](int var, int partner, int a, int b, double sign) {
            if (var == GramIndex::kEmpty) return;
            catalog.by_variable[static_cast<std::size_t>(var)].push_back({eq, partner, a, b, sign});
        };
        add(q.s, q.r, q.t, q.p, 1.0);
        add(q.r, q.s, q.t, q.p, 1.0);
        add(q.t, q.p, q.s, q.r, -1.0);
        add(q.p, q.t, q.s, q.r, -1.0);
    }
    catalog.index = std::move(index);
    return catalog;
}

void SolverConfig::validate() const {
    if (rank < 2) throw StructureError("rank must be at least 2");
    if (!(rho > 0.0)) throw StructureError("rho must be positive");
    if (!(tol > 0.0)) throw StructureError("tol must be positive");
    if (max_sweeps < 1) throw StructureError("max_sweeps must be positive");
    if (divergence_window < 1) throw StructureError("divergence_window must be positive");
}

GramState init_state(const ConstraintCatalog& catalog, const SolverConfig& config) {
    config.validate();
    GramState state;
    state.rank = config.rank;
    state.index = catalog.index;
    const int count = catalog.index->size();
    state.vectors.setZero(config.rank, count);
    state.vectors(0, GramIndex::kEmpty) = 1.0;
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int s = 1; s < count; ++s) {
        auto col = state.vectors.col(s);
        do {
            for (int k = 0; k < config.rank; ++k) col(k) = normal(rng);
        } while (col.norm() == 0.0);
        col.normalize();
    }
    state.multipliers.assign(catalog.equalities.size(), 0.0);
    return state;
}

GramState integral_state(const ConstraintCatalog& catalog, int rank, const Assignment& x) {
    const GramIndex& index = *catalog.index;
    if (x.size() != static_cast<std::size_t>(index.num_vertices())) throw DimensionError("assignment length mismatch");
    GramState state;
    state.rank = rank;
    state.index = catalog.index;
    state.vectors.setZero(rank, index.size());
    state.vectors(0, GramIndex::kEmpty) = 1.0;
    for (int i = 0; i < index.num_vertices(); ++i) {
        state.vectors(0, index.vertex(i)) = x[static_cast<std::size_t>(i)];
    }
    for (const auto& [i, j] : index.pairs()) {
        state.vectors(0, index.pair(i, j)) = x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)];
    }
    state.multipliers.assign(catalog.equalities.size(), 0.0);
    return state;
}

namespace {

void check_compatible(const GramState& state, const ConstraintCatalog& catalog) {
    if (state.index != catalog.index && (state.index == nullptr || catalog.index == nullptr ||
                                         state.index->size() != catalog.index->size())) {
        throw StructureError("Gram state and constraint catalog use different index sets");
    }
    if (state.multipliers.size() != catalog.equalities.size()) {
        throw StructureError("multiplier count does not match the catalog");
    }
}

void assemble_into(int s, const GramState& state, const GraphModel& model, const ConstraintCatalog& catalog,
                   EdgeLinearTerm edge_term, LocalSystem& sys) {
    const GramIndex& index = *catalog.index;
    if (s <= GramIndex::kEmpty || s >= index.size()) {
        throw StructureError("unknown or non-updatable Gram index " + std::to_string(s));
    }
    const auto& rows = catalog.by_variable[static_cast<std::size_t>(s)];
    const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
    sys.A.resize(m, state.rank);
    sys.b.resize(m);
    sys.lambda.resize(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const Incidence& in = rows[static_cast<std::size_t>(k)];
        sys.A.row(k) = state.vectors.col(in.partner).transpose();
        sys.b(k) = state.inner(in.target_a, in.target_b);
        sys.lambda(k) = in.sign * state.multipliers[static_cast<std::size_t>(in.equality)];
    }

    sys.c.setZero(state.rank);
    if (index.is_vertex(s)) {
        const int i = index.vertex_of(s);
        for (const Neighbor& nb : model.neighbors(i)) sys.c += nb.weight * state.vectors.col(index.vertex(nb.vertex));
        sys.c += model.vertex_weight(i) * state.vectors.col(GramIndex::kEmpty);
    } else if (edge_term == EdgeLinearTerm::kPrinted) {
        const auto [i, j] = index.pair_of(s);
        sys.c += model.edge_weight(i, j) * state.vectors.col(GramIndex::kEmpty);
        sys.c += model.vertex_weight(i) * state.vectors.col(index.vertex(j));
        sys.c += model.vertex_weight(j) * state.vectors.col(index.vertex(i));
    }
}

}  // namespace

LocalSystem assemble_local(int s, const GramState& state, const GraphModel& model, const ConstraintCatalog& catalog,
                           EdgeLinearTerm edge_term) {
    check_compatible(state, catalog);
    if (model.num_vertices() != catalog.index->num_vertices()) throw DimensionError("model/catalog vertex mismatch");
    LocalSystem sys;
    assemble_into(s, state, model, catalog, edge_term, sys);
    return sys;
}

Eigen::VectorXd solve_subproblem(const LocalSystem& sys, double rho, const Eigen::VectorXd& hint) {
    if (!(rho > 0.0)) throw StructureError("rho must be positive");
    if (sys.A.rows() != sys.b.size() || sys.A.rows() != sys.lambda.size()) {
        throw DimensionError("local system row counts disagree");
    }
    const Eigen::Index r = sys.c.size();
    if (sys.A.rows() > 0 && sys.A.cols() != r) throw DimensionError("local system width mismatch");
    if (!sys.A.allFinite() || !sys.b.allFinite() || !sys.c.allFinite() || !sys.lambda.allFinite()) {
        throw StructureError("non-finite local system");
    }
    Eigen::MatrixXd H(r, r);
    Eigen::VectorXd g = sys.c;
    if (sys.A.rows() > 0) {
        H.noalias() = rho * sys.A.transpose() * sys.A;
        g.noalias() += rho * sys.A.transpose() * (sys.b - sys.lambda);
    } else {
        H.setZero();
    }
    return maximize_on_sphere(H, g, hint).x;
}

double sdp_objective(const GramState& state, const GraphModel& model) {
    const GramIndex& index = *state.index;
    if (index.num_vertices() != model.num_vertices()) throw StructureError("state does not cover the model");
    double total = 0.0;
    for (const Edge& e : model.edges()) total += e.weight * state.inner(index.vertex(e.i), index.vertex(e.j));
    for (int i = 0; i < model.num_vertices(); ++i) {
        total += model.vertex_weight(i) * state.inner(index.vertex(i), GramIndex::kEmpty);
    }
    return total;
}

double residual_norm(const GramState& state, const ConstraintCatalog& catalog) {
    double sum = 0.0;
    for (const Equality& q : catalog.equalities) {
        const double res = state.inner(q.s, q.r) - state.inner(q.t, q.p);
        sum += res * res;
    }
    return std::sqrt(sum);
}

PartialSosResult partial_sos(const GraphModel& model, const ConstraintCatalog& catalog, const SolverConfig& config,
                             GramState state, const ReliableMask& reliables) {
    config.validate();
    check_compatible(state, catalog);
    const GramIndex& index = *catalog.index;
    if (model.num_vertices() != index.num_vertices()) throw DimensionError("model/catalog vertex mismatch");
    if (!reliables.empty() && reliables.size() != static_cast<std::size_t>(index.size())) {
        throw DimensionError("reliable mask size mismatch");
    }
    if (state.rank != config.rank || state.vectors.rows() != config.rank) {
        throw DimensionError("state rank does not match the solver configuration");
    }

    std::vector<int> actives;
    for (int s = 1; s < index.size(); ++s) {
        if (reliables.empty() || !reliables[static_cast<std::size_t>(s)]) actives.push_back(s);
    }

    PartialSosResult result;
    if (actives.empty()) {
        result.trace.push_back({0, sdp_objective(state, model), residual_norm(state, catalog), 0.0});
        result.converged = true;
        result.state = std::move(state);
        return result;
    }

    LocalSystem sys;
    Eigen::VectorXd old_vec(config.rank);
    Eigen::VectorXd res(config.rank);
    double prev_objective = sdp_objective(state, model);
    double prev_residual = residual_norm(state, catalog);
    int worsening = 0;

    for (int sweep = 1; sweep <= config.max_sweeps; ++sweep) {
        double delta = 0.0;
        for (int s : actives) {
            assemble_into(s, state, model, catalog, config.edge_term, sys);
            old_vec = state.vectors.col(s);
            const Eigen::VectorXd next = solve_subproblem(sys, config.rho, old_vec);
            if (sys.A.rows() > 0) {
                res.resize(sys.A.rows());
                res.noalias() = sys.A * old_vec - sys.b;
                delta += res.squaredNorm();
            }
            delta += (next - old_vec).squaredNorm();
            state.vectors.col(s) = next;
            if (sys.A.rows() > 0 && config.multiplier_update == MultiplierUpdate::kPerVariable) {
                res.noalias() = sys.A * next - sys.b;
                const auto& rows = catalog.by_variable[static_cast<std::size_t>(s)];
                for (std::size_t k = 0; k < rows.size(); ++k) {
                    state.multipliers[static_cast<std::size_t>(rows[k].equality)] +=
                        rows[k].sign * res(static_cast<Eigen::Index>(k));
                }
            }
        }
        if (config.multiplier_update == MultiplierUpdate::kPerSweep) {
            for (std::size_t k = 0; k < catalog.equalities.size(); ++k) {
                const Equality& q = catalog.equalities[k];
                state.multipliers[k] += state.inner(q.s, q.r) - state.inner(q.t, q.p);
            }
        }
        const double objective = sdp_objective(state, model);
        const double residual = residual_norm(state, catalog);
        result.trace.push_back({sweep, objective, residual, delta});

        if (objective < prev_objective && residual > prev_residual) {
            if (++worsening >= config.divergence_window) {
                std::ostringstream msg;
                msg << "partial SOS diverging: objective fell and residual rose for " << worsening
                    << " sweeps (sweep " << sweep << ", objective " << objective << ", residual " << residual << ")";
                throw DivergenceError(msg.str());
            }
        } else {
            worsening = 0;
        }
        prev_objective = objective;
        prev_residual = residual;

        if (delta <= config.tol) {
            result.converged = true;
            break;
        }
    }
    result.state = std::move(state);
    return result;
}

PartialSosResult partial_sos(const GraphModel& model, const ConstraintCatalog& catalog, const SolverConfig& config,
                             GramState state) {
    return partial_sos(model, catalog, config, std::move(state), ReliableMask{});
}

MomentMatrix moment_matrix(const GramState& state) {
    const GramIndex& index = *state.index;
    const int n = index.num_vertices();
    MomentMatrix m;
    Eigen::MatrixXd V = state.vectors.middleCols(1, n);
    m.vertex_block.noalias() = V.transpose() * V;
    for (int i = 0; i < n; ++i) {
        m.vertex_block(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) m.vertex_block(j, i) = m.vertex_block(i, j);
    }
    for (const auto& [i, j] : index.pairs()) {
        m.edge_moments.emplace(std::pair{i, j}, state.inner(index.pair(i, j), GramIndex::kEmpty));
    }
    return m;
}

void write_trace_csv(std::ostream& out, const std::vector<SweepRecord>& trace) {
    out << "sweep,objective,residual,delta\n";
    const auto old = out.precision(17);
    for (const SweepRecord& r : trace) {
        out << r.sweep << ',' << r.objective << ',' << r.residual << ',' << r.delta << '\n';
    }
    out.precision(old);
}

}  // namespace psos
