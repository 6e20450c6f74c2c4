#include "psos/message_passing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include "psos/errors.hpp"

namespace psos {

void MessagePassingOptions::validate() const {
    if (!(damping >= 0.0 && damping < 1.0)) throw StructureError("damping must lie in [0, 1)");
    if (max_iters < 1) throw StructureError("max_iters must be positive");
    if (!(tol > 0.0)) throw StructureError("tol must be positive");
}

namespace {

constexpr double kSpin[2] = {1.0, -1.0};

double log_add(double a, double b) {
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double combine(Semiring semiring, double a, double b) {
    return semiring == Semiring::kMaxProduct ? std::max(a, b) : log_add(a, b);
}

struct PairwiseRun {
    MessageSet messages;
    std::vector<std::array<double, 2>> incoming;  // sum of messages into each vertex
    bool converged = false;
    int iterations = 0;
    std::vector<IterationRecord> trace;
};

PairwiseRun run_pairwise(const GraphModel& model, const MessagePassingOptions& options, Semiring semiring) {
    options.validate();
    const auto edges = model.edges();
    const std::size_t n = static_cast<std::size_t>(model.num_vertices());
    PairwiseRun run;
    run.messages.messages.assign(2 * edges.size(), {0.0, 0.0});
    run.incoming.assign(n, {0.0, 0.0});
    auto& msg = run.messages.messages;
    std::vector<std::array<double, 2>> next(msg.size());

    for (int iter = 1; iter <= options.max_iters; ++iter) {
        for (auto& in : run.incoming) in = {0.0, 0.0};
        for (std::size_t k = 0; k < edges.size(); ++k) {
            for (int x = 0; x < 2; ++x) {
                run.incoming[static_cast<std::size_t>(edges[k].j)][static_cast<std::size_t>(x)] += msg[2 * k][static_cast<std::size_t>(x)];
                run.incoming[static_cast<std::size_t>(edges[k].i)][static_cast<std::size_t>(x)] += msg[2 * k + 1][static_cast<std::size_t>(x)];
            }
        }
        double max_delta = 0.0;
        for (std::size_t d = 0; d < msg.size(); ++d) {
            const Edge& e = edges[d / 2];
            const bool forward = d % 2 == 0;
            const int from = forward ? e.i : e.j;
            const std::size_t back = forward ? d + 1 : d - 1;
            std::array<double, 2> cavity;
            for (std::size_t x = 0; x < 2; ++x) {
                cavity[x] = model.vertex_weight(from) * kSpin[x] + run.incoming[static_cast<std::size_t>(from)][x] - msg[back][x];
            }
            std::array<double, 2> update;
            for (std::size_t y = 0; y < 2; ++y) {
                update[y] = combine(semiring, e.weight * kSpin[0] * kSpin[y] + cavity[0],
                                    e.weight * kSpin[1] * kSpin[y] + cavity[1]);
            }
            std::array<double, 2> damped;
            for (std::size_t y = 0; y < 2; ++y) {
                damped[y] = (1.0 - options.damping) * update[y] + options.damping * msg[d][y];
            }
            const double top = std::max(damped[0], damped[1]);
            for (std::size_t y = 0; y < 2; ++y) {
                damped[y] -= top;
                const double change = std::abs(damped[y] - msg[d][y]);
                max_delta = std::isfinite(change) ? std::max(max_delta, change) : change;
            }
            next[d] = damped;
        }
        // Overflowing messages: stop and keep the last finite iterate.
        if (!std::isfinite(max_delta)) break;
        msg.swap(next);
        run.iterations = iter;
        run.trace.push_back({iter, max_delta});
        if (max_delta < options.tol) {
            run.converged = true;
            break;
        }
    }
    for (auto& in : run.incoming) in = {0.0, 0.0};
    for (std::size_t k = 0; k < edges.size(); ++k) {
        for (std::size_t x = 0; x < 2; ++x) {
            run.incoming[static_cast<std::size_t>(edges[k].j)][x] += msg[2 * k][x];
            run.incoming[static_cast<std::size_t>(edges[k].i)][x] += msg[2 * k + 1][x];
        }
    }
    return run;
}

}  // namespace

SumProductResult bp_sum_product(const GraphModel& model, const MessagePassingOptions& options) {
    PairwiseRun run = run_pairwise(model, options, Semiring::kSumProduct);
    SumProductResult out;
    const std::size_t n = static_cast<std::size_t>(model.num_vertices());
    out.beliefs.plus.resize(n);
    std::vector<Spin> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double h = model.vertex_weight(static_cast<int>(i));
        const double lp = h + run.incoming[i][0];
        const double lm = -h + run.incoming[i][1];
        out.beliefs.plus[i] = 1.0 / (1.0 + std::exp(lm - lp));
        x[i] = out.beliefs.plus[i] >= 0.5 ? Spin{1} : Spin{-1};
    }
    out.assignment = Assignment(std::move(x));
    out.converged = run.converged;
    out.iterations = run.iterations;
    out.trace = std::move(run.trace);
    return out;
}

DecodeResult bp_max_product(const GraphModel& model, const MessagePassingOptions& options) {
    PairwiseRun run = run_pairwise(model, options, Semiring::kMaxProduct);
    const std::size_t n = static_cast<std::size_t>(model.num_vertices());
    std::vector<Spin> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double h = model.vertex_weight(static_cast<int>(i));
        x[i] = h + run.incoming[i][0] >= -h + run.incoming[i][1] ? Spin{1} : Spin{-1};
    }
    return {Assignment(std::move(x)), run.converged, run.iterations, std::move(run.trace)};
}

// --- generalized belief propagation ----------------------------------------

namespace {

bool is_subset(const std::vector<int>& small, const std::vector<int>& big) {
    return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

// Configuration index of `sub` (sub-region of `vars`) for every configuration of `vars`.
// Bit p of a configuration set means vars[p] = -1.
std::vector<std::uint32_t> projection(const std::vector<int>& vars, const std::vector<int>& sub) {
    std::vector<int> pos;
    for (int v : sub) pos.push_back(static_cast<int>(std::lower_bound(vars.begin(), vars.end(), v) - vars.begin()));
    const std::uint32_t count = 1u << vars.size();
    std::vector<std::uint32_t> out(count);
    for (std::uint32_t c = 0; c < count; ++c) {
        std::uint32_t s = 0;
        for (std::size_t q = 0; q < pos.size(); ++q) s |= ((c >> pos[q]) & 1u) << q;
        out[c] = s;
    }
    return out;
}

double spin_of(std::uint32_t config, std::size_t pos) { return (config >> pos) & 1u ? -1.0 : 1.0; }

std::vector<double> region_potential(const GraphModel& model, const std::vector<int>& vars) {
    const std::uint32_t count = 1u << vars.size();
    std::vector<double> phi(count, 0.0);
    for (std::size_t a = 0; a < vars.size(); ++a) {
        const double h = model.vertex_weight(vars[a]);
        for (std::uint32_t c = 0; c < count; ++c) phi[c] += h * spin_of(c, a);
        for (std::size_t b = a + 1; b < vars.size(); ++b) {
            const double w = model.edge_weight(vars[a], vars[b]);
            if (w == 0.0) continue;
            for (std::uint32_t c = 0; c < count; ++c) phi[c] += w * spin_of(c, a) * spin_of(c, b);
        }
    }
    return phi;
}

}  // namespace

RegionGraph build_region_graph(const GraphModel& model, const RegionCovering& top_regions) {
    const int n = model.num_vertices();
    std::set<std::vector<int>> tops;
    for (auto r : top_regions.regions) {
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
        if (r.empty()) continue;
        if (r.front() < 0 || r.back() >= n) throw StructureError("region vertex out of range");
        if (r.size() > 16) throw LimitError("GBP regions limited to 16 vertices");
        tops.insert(std::move(r));
    }
    auto contained = [&](const std::vector<int>& s) {
        return std::any_of(tops.begin(), tops.end(), [&](const auto& t) { return is_subset(s, t); });
    };
    std::vector<std::vector<int>> extra;
    for (const Edge& e : model.edges()) {
        if (!contained({e.i, e.j})) extra.push_back({e.i, e.j});
    }
    for (auto& r : extra) tops.insert(r);
    for (int v = 0; v < n; ++v) {
        if (!contained({v})) tops.insert({v});
    }
    // Drop top regions nested inside other top regions.
    std::vector<std::vector<int>> maximal;
    for (const auto& r : tops) {
        bool nested = false;
        for (const auto& t : tops) {
            if (t.size() > r.size() && is_subset(r, t)) {
                nested = true;
                break;
            }
        }
        if (!nested) maximal.push_back(r);
    }

    // Close under pairwise intersection, looking only at regions sharing a vertex.
    std::vector<std::vector<int>> all = maximal;
    std::set<std::vector<int>> known(all.begin(), all.end());
    std::vector<std::vector<int>> by_vertex(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < all.size(); ++k) {
        for (int v : all[k]) by_vertex[static_cast<std::size_t>(v)].push_back(static_cast<int>(k));
    }
    for (std::size_t k = 0; k < all.size(); ++k) {
        std::set<int> partners;
        for (int v : all[k]) partners.insert(by_vertex[static_cast<std::size_t>(v)].begin(), by_vertex[static_cast<std::size_t>(v)].end());
        for (int other : partners) {
            if (static_cast<std::size_t>(other) == k) continue;
            std::vector<int> meet;
            std::set_intersection(all[k].begin(), all[k].end(), all[static_cast<std::size_t>(other)].begin(),
                                  all[static_cast<std::size_t>(other)].end(), std::back_inserter(meet));
            if (meet.empty() || !known.insert(meet).second) continue;
            for (int v : meet) by_vertex[static_cast<std::size_t>(v)].push_back(static_cast<int>(all.size()));
            all.push_back(std::move(meet));
        }
    }

    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
    RegionGraph graph;
    graph.regions.resize(all.size());
    for (auto& bucket : by_vertex) bucket.clear();
    for (std::size_t k = 0; k < all.size(); ++k) {
        graph.regions[k].vars = all[k];
        for (int v : all[k]) by_vertex[static_cast<std::size_t>(v)].push_back(static_cast<int>(k));
    }
    // Regions are sorted by decreasing size, so every strict superset precedes its subsets.
    for (std::size_t k = 0; k < all.size(); ++k) {
        const auto& vars = all[k];
        std::vector<int> supersets;
        for (int cand : by_vertex[static_cast<std::size_t>(vars.front())]) {
            const auto& cv = all[static_cast<std::size_t>(cand)];
            if (cv.size() > vars.size() && is_subset(vars, cv)) supersets.push_back(cand);
        }
        int counting = 1;
        for (int s : supersets) counting -= graph.regions[static_cast<std::size_t>(s)].counting;
        graph.regions[k].counting = counting;
        for (int s : supersets) {
            bool immediate = true;
            for (int t : supersets) {
                if (t != s && all[static_cast<std::size_t>(t)].size() < all[static_cast<std::size_t>(s)].size() &&
                    is_subset(all[static_cast<std::size_t>(t)], all[static_cast<std::size_t>(s)])) {
                    immediate = false;
                    break;
                }
            }
            if (immediate) {
                graph.regions[k].parents.push_back(s);
                graph.regions[static_cast<std::size_t>(s)].children.push_back(static_cast<int>(k));
            }
        }
    }
    return graph;
}

namespace {

struct GbpMessage {
    int parent = 0;
    int child = 0;
    std::vector<double> values;  // over child configurations
};

struct MessageTerm {
    int message = 0;
    std::vector<std::uint32_t> project;  // parent configuration -> configuration of the message's child
};

struct MessagePlan {
    std::vector<MessageTerm> add;       // N(P, R)
    std::vector<MessageTerm> subtract;  // D(P, R)
    std::vector<std::uint32_t> to_child;
};

// Sorted list of r and every region below it.
std::vector<int> descendants_of(const RegionGraph& g, int r) {
    std::vector<int> out{r};
    std::vector<int> stack{r};
    std::set<int> seen{r};
    while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        for (int c : g.regions[static_cast<std::size_t>(cur)].children) {
            if (seen.insert(c).second) {
                out.push_back(c);
                stack.push_back(c);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool holds(const std::vector<int>& sorted, int v) { return std::binary_search(sorted.begin(), sorted.end(), v); }

}  // namespace

DecodeResult gbp(const GraphModel& model, const RegionCovering& top_regions, const MessagePassingOptions& options,
                 Semiring semiring) {
    options.validate();
    const RegionGraph graph = build_region_graph(model, top_regions);
    const std::size_t R = graph.regions.size();

    std::vector<std::vector<double>> phi(R);
    std::vector<std::vector<int>> desc(R);
    for (std::size_t k = 0; k < R; ++k) {
        phi[k] = region_potential(model, graph.regions[k].vars);
        desc[k] = descendants_of(graph, static_cast<int>(k));
    }

    std::vector<GbpMessage> messages;
    for (std::size_t k = 0; k < R; ++k) {
        for (int c : graph.regions[k].children) {
            const std::size_t width = graph.regions[static_cast<std::size_t>(c)].vars.size();
            messages.push_back({static_cast<int>(k), c, std::vector<double>(1u << width, 0.0)});
        }
    }

    std::vector<std::vector<int>> into(R);
    for (std::size_t m = 0; m < messages.size(); ++m) into[static_cast<std::size_t>(messages[m].child)].push_back(static_cast<int>(m));

    // Messages (I -> J) with J at or below the target and I not.
    auto incoming_of = [&](std::size_t target) {
        std::vector<int> ids;
        for (int J : desc[target]) {
            for (int m : into[static_cast<std::size_t>(J)]) {
                if (!holds(desc[target], messages[static_cast<std::size_t>(m)].parent)) ids.push_back(m);
            }
        }
        return ids;
    };

    std::vector<MessagePlan> plans(messages.size());
    for (std::size_t m = 0; m < messages.size(); ++m) {
        const auto P = static_cast<std::size_t>(messages[m].parent);
        const auto C = static_cast<std::size_t>(messages[m].child);
        const auto& pvars = graph.regions[P].vars;
        plans[m].to_child = projection(pvars, graph.regions[C].vars);
        for (int J : desc[P]) {
            const bool below_child = holds(desc[C], J);
            for (int q : into[static_cast<std::size_t>(J)]) {
                if (static_cast<std::size_t>(q) == m) continue;
                const int I = messages[static_cast<std::size_t>(q)].parent;
                if (!below_child && !holds(desc[P], I)) {
                    plans[m].add.push_back({q, projection(pvars, graph.regions[static_cast<std::size_t>(J)].vars)});
                } else if (below_child && holds(desc[P], I) && !holds(desc[C], I)) {
                    plans[m].subtract.push_back({q, projection(pvars, graph.regions[static_cast<std::size_t>(J)].vars)});
                }
            }
        }
    }

    DecodeResult out;
    std::vector<std::vector<double>> next(messages.size());
    for (int iter = 1; iter <= options.max_iters; ++iter) {
        double max_delta = 0.0;
        for (std::size_t m = 0; m < messages.size(); ++m) {
            const auto P = static_cast<std::size_t>(messages[m].parent);
            const auto C = static_cast<std::size_t>(messages[m].child);
            const MessagePlan& plan = plans[m];
            const std::uint32_t pcount = static_cast<std::uint32_t>(phi[P].size());
            std::vector<double> update(messages[m].values.size(), -std::numeric_limits<double>::infinity());
            for (std::uint32_t x = 0; x < pcount; ++x) {
                const std::uint32_t xc = plan.to_child[x];
                double v = phi[P][x] - phi[C][xc];
                for (const MessageTerm& t : plan.add) v += messages[static_cast<std::size_t>(t.message)].values[t.project[x]];
                for (const MessageTerm& t : plan.subtract) v -= messages[static_cast<std::size_t>(t.message)].values[t.project[x]];
                update[xc] = std::isinf(update[xc]) ? v : combine(semiring, update[xc], v);
            }
            double top = -std::numeric_limits<double>::infinity();
            for (std::size_t y = 0; y < update.size(); ++y) {
                update[y] = (1.0 - options.damping) * update[y] + options.damping * messages[m].values[y];
                top = std::max(top, update[y]);
            }
            for (std::size_t y = 0; y < update.size(); ++y) {
                update[y] -= top;
                const double change = std::abs(update[y] - messages[m].values[y]);
                max_delta = std::isfinite(change) ? std::max(max_delta, change) : change;
            }
            next[m] = std::move(update);
        }
        if (!std::isfinite(max_delta)) break;
        for (std::size_t m = 0; m < messages.size(); ++m) messages[m].values.swap(next[m]);
        out.iterations = iter;
        out.trace.push_back({iter, max_delta});
        if (max_delta < options.tol) {
            out.converged = true;
            break;
        }
    }

    // Decode each vertex from the smallest region that holds it.
    const int n = model.num_vertices();
    std::vector<int> home(static_cast<std::size_t>(n), -1);
    for (std::size_t k = 0; k < R; ++k) {
        for (int v : graph.regions[k].vars) {
            const int cur = home[static_cast<std::size_t>(v)];
            if (cur < 0 || graph.regions[static_cast<std::size_t>(cur)].vars.size() > graph.regions[k].vars.size()) {
                home[static_cast<std::size_t>(v)] = static_cast<int>(k);
            }
        }
    }
    std::map<int, std::vector<double>> belief_cache;
    auto belief = [&](int k) -> const std::vector<double>& {
        auto it = belief_cache.find(k);
        if (it != belief_cache.end()) return it->second;
        const auto& vars = graph.regions[static_cast<std::size_t>(k)].vars;
        std::vector<double> b = phi[static_cast<std::size_t>(k)];
        for (int m : incoming_of(static_cast<std::size_t>(k))) {
            const auto proj = projection(vars, graph.regions[static_cast<std::size_t>(messages[static_cast<std::size_t>(m)].child)].vars);
            for (std::uint32_t x = 0; x < b.size(); ++x) b[x] += messages[static_cast<std::size_t>(m)].values[proj[x]];
        }
        return belief_cache.emplace(k, std::move(b)).first->second;
    };
    std::vector<Spin> x(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
        const int k = home[static_cast<std::size_t>(v)];
        const auto& vars = graph.regions[static_cast<std::size_t>(k)].vars;
        const std::size_t pos = static_cast<std::size_t>(std::lower_bound(vars.begin(), vars.end(), v) - vars.begin());
        const auto& b = belief(k);
        double best[2] = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
        for (std::uint32_t c = 0; c < b.size(); ++c) {
            const std::size_t s = (c >> pos) & 1u;
            best[s] = std::isinf(best[s]) ? b[c] : combine(semiring, best[s], b[c]);
        }
        x[static_cast<std::size_t>(v)] = best[0] >= best[1] ? Spin{1} : Spin{-1};
    }
    out.assignment = Assignment(std::move(x));
    return out;
}

DecodeResult gbp_plaquette(const GraphModel& model, int side, const MessagePassingOptions& options) {
    if (side < 1 || model.num_vertices() != side * side) {
        throw StructureError("GBP expects a " + std::to_string(side) + " x " + std::to_string(side) + " grid");
    }
    for (const Edge& e : model.edges()) {
        const bool right = (e.i % side) + 1 < side && e.j == e.i + 1;
        const bool down = e.j == e.i + side;
        if (!right && !down) throw StructureError("GBP expects a grid without diagonals");
    }
    const RegionCovering top = side >= 2 ? plaquette_covering(side) : vertex_covering(1);
    return gbp(model, top, options, Semiring::kMaxProduct);
}

void write_iteration_csv(std::ostream& out, const std::vector<IterationRecord>& trace) {
    out << "iter,max_delta\n";
    const auto old = out.precision(17);
    for (const IterationRecord& r : trace) out << r.iter << ',' << r.max_delta << '\n';
    out.precision(old);
}

}  // namespace psos
