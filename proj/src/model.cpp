#include "psos/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "psos/errors.hpp"

namespace psos {

GraphModel::GraphModel(int num_vertices, std::vector<Edge> edges, std::vector<double> vertex_weights)
    : num_vertices_(num_vertices), edges_(std::move(edges)), vertex_weights_(std::move(vertex_weights)) {
    if (num_vertices_ <= 0) {
        throw DimensionError("model needs at least one vertex");
    }
    if (vertex_weights_.size() != static_cast<std::size_t>(num_vertices_)) {
        throw DimensionError("vertex weight count " + std::to_string(vertex_weights_.size()) +
                             " does not match n = " + std::to_string(num_vertices_));
    }
    for (double h : vertex_weights_) {
        if (!std::isfinite(h)) throw StructureError("non-finite vertex weight");
    }
    for (Edge& e : edges_) {
        if (e.i == e.j) throw StructureError("self-loop at vertex " + std::to_string(e.i));
        if (e.i > e.j) std::swap(e.i, e.j);
        if (e.i < 0 || e.j >= num_vertices_) {
            throw StructureError("edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                                 ") out of range");
        }
        if (!std::isfinite(e.weight)) throw StructureError("non-finite edge weight");
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const Edge& a, const Edge& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
    adjacency_.assign(static_cast<std::size_t>(num_vertices_), {});
    edge_lookup_.reserve(edges_.size());
    for (std::size_t k = 0; k < edges_.size(); ++k) {
        const Edge& e = edges_[k];
        if (k > 0 && edges_[k - 1].i == e.i && edges_[k - 1].j == e.j) {
            throw StructureError("duplicate edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) + ")");
        }
        edge_lookup_.emplace(key(e.i, e.j), static_cast<int>(k));
        adjacency_[static_cast<std::size_t>(e.i)].push_back({e.j, e.weight});
        adjacency_[static_cast<std::size_t>(e.j)].push_back({e.i, e.weight});
    }
}

std::uint64_t GraphModel::key(int i, int j) const {
    if (i > j) std::swap(i, j);
    return static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(num_vertices_) +
           static_cast<std::uint64_t>(j);
}

std::optional<int> GraphModel::edge_index(int i, int j) const {
    if (i == j || i < 0 || j < 0 || i >= num_vertices_ || j >= num_vertices_) return std::nullopt;
    auto it = edge_lookup_.find(key(i, j));
    if (it == edge_lookup_.end()) return std::nullopt;
    return it->second;
}

bool GraphModel::has_edge(int i, int j) const { return edge_index(i, j).has_value(); }

double GraphModel::edge_weight(int i, int j) const {
    auto k = edge_index(i, j);
    return k ? edges_[static_cast<std::size_t>(*k)].weight : 0.0;
}

Assignment::Assignment(std::vector<Spin> values) : values_(std::move(values)) {
    for (Spin v : values_) {
        if (v != 1 && v != -1) throw DimensionError("assignment entries must be +1 or -1");
    }
}

Assignment Assignment::flipped() const {
    std::vector<Spin> v(values_);
    for (Spin& s : v) s = static_cast<Spin>(-s);
    return Assignment(std::move(v));
}

std::size_t RegionCovering::max_region_size() const {
    std::size_t m = 0;
    for (const auto& r : regions) m = std::max(m, r.size());
    return m;
}

BinaryImage::BinaryImage(int w, int h, std::vector<Spin> px) : width(w), height(h), pixels(std::move(px)) {
    if (width <= 0 || height <= 0) throw DimensionError("image dimensions must be positive");
    if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw DimensionError("pixel count does not match width x height");
    }
    for (Spin v : pixels) {
        if (v != 1 && v != -1) throw DimensionError("pixels must be +1 or -1");
    }
}

SpinGlassDistribution spin_glass_distribution_from_int(int code) {
    if (code < 1 || code > 4) throw StructureError("spin-glass distribution must be 1..4");
    return static_cast<SpinGlassDistribution>(code);
}

NoiseKind noise_kind_from_string(const std::string& name) {
    if (name == "bernoulli") return NoiseKind::kBernoulli;
    if (name == "blockwise") return NoiseKind::kBlockwise;
    throw StructureError("unknown noise kind '" + name + "'");
}

double objective_value(const GraphModel& model, const Assignment& x) {
    if (x.size() != static_cast<std::size_t>(model.num_vertices())) {
        throw DimensionError("assignment length " + std::to_string(x.size()) + " does not match n = " +
                             std::to_string(model.num_vertices()));
    }
    double total = 0.0;
    for (const Edge& e : model.edges()) {
        total += e.weight * static_cast<double>(x[static_cast<std::size_t>(e.i)] * x[static_cast<std::size_t>(e.j)]);
    }
    auto h = model.vertex_weights();
    for (std::size_t i = 0; i < h.size(); ++i) total += h[i] * static_cast<double>(x[i]);
    return total;
}

namespace {

std::vector<std::pair<int, int>> grid_pairs(int rows, int cols) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(grid_edge_count(rows, cols)));
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int v = grid_vertex(cols, r, c);
            if (c + 1 < cols) pairs.emplace_back(v, v + 1);
            if (r + 1 < rows) pairs.emplace_back(v, v + cols);
        }
    }
    return pairs;
}

void require_grid_dims(int rows, int cols) {
    if (rows <= 0 || cols <= 0) throw DimensionError("grid dimensions must be positive");
}

void require_covering_dims(int rows, int cols) {
    if (rows < 2 || cols < 2) throw StructureError("grid coverings need at least 2 x 2 vertices");
}

}  // namespace

GraphModel grid_model(int rows, int cols, std::span<const double> edge_weights,
                      std::span<const double> vertex_weights) {
    require_grid_dims(rows, cols);
    const auto pairs = grid_pairs(rows, cols);
    if (edge_weights.size() != pairs.size()) {
        throw DimensionError("grid needs " + std::to_string(pairs.size()) + " edge weights, got " +
                             std::to_string(edge_weights.size()));
    }
    if (vertex_weights.size() != static_cast<std::size_t>(rows * cols)) {
        throw DimensionError("grid needs " + std::to_string(rows * cols) + " vertex weights, got " +
                             std::to_string(vertex_weights.size()));
    }
    std::vector<Edge> edges;
    edges.reserve(pairs.size());
    for (std::size_t k = 0; k < pairs.size(); ++k) edges.push_back({pairs[k].first, pairs[k].second, edge_weights[k]});
    return GraphModel(rows * cols, std::move(edges), {vertex_weights.begin(), vertex_weights.end()});
}

GraphModel grid_model(int side, std::span<const double> edge_weights, std::span<const double> vertex_weights) {
    return grid_model(side, side, edge_weights, vertex_weights);
}

std::optional<int> infer_grid_side(const GraphModel& model) {
    const int n = model.num_vertices();
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    if (side * side != n) return std::nullopt;
    for (const Edge& e : model.edges()) {
        const int r = e.i / side, c = e.i % side;
        const bool right = c + 1 < side && e.j == e.i + 1;
        const bool down = r + 1 < side && e.j == e.i + side;
        const bool diag = c + 1 < side && r + 1 < side && e.j == e.i + side + 1;
        if (!right && !down && !diag) return std::nullopt;
    }
    return side;
}

GraphModel augment_with_diagonals(const GraphModel& model, int rows, int cols) {
    require_grid_dims(rows, cols);
    if (model.num_vertices() != rows * cols) {
        throw StructureError("model is not a " + std::to_string(rows) + " x " + std::to_string(cols) + " grid");
    }
    for (const Edge& e : model.edges()) {
        const int c = e.i % cols;
        const bool right = c + 1 < cols && e.j == e.i + 1;
        const bool down = e.j == e.i + cols;
        if (!right && !down) {
            throw StructureError("edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                                 ") is not a grid edge");
        }
    }
    std::vector<Edge> edges(model.edges().begin(), model.edges().end());
    for (int r = 0; r + 1 < rows; ++r) {
        for (int c = 0; c + 1 < cols; ++c) {
            const int v = grid_vertex(cols, r, c);
            edges.push_back({v, v + cols + 1, 0.0});
        }
    }
    return GraphModel(model.num_vertices(), std::move(edges),
                      {model.vertex_weights().begin(), model.vertex_weights().end()});
}

GraphModel augment_with_diagonals(const GraphModel& model, int side) {
    return augment_with_diagonals(model, side, side);
}

RegionCovering triangle_covering(int rows, int cols) {
    require_covering_dims(rows, cols);
    RegionCovering cov;
    cov.regions.reserve(static_cast<std::size_t>(2 * (rows - 1) * (cols - 1)));
    for (int r = 0; r + 1 < rows; ++r) {
        for (int c = 0; c + 1 < cols; ++c) {
            const int a = grid_vertex(cols, r, c);
            const int b = a + 1;
            const int d = a + cols;
            const int e = d + 1;
            cov.regions.push_back({a, b, e});
            cov.regions.push_back({a, d, e});
        }
    }
    return cov;
}

RegionCovering triangle_covering(int side) { return triangle_covering(side, side); }

RegionCovering plaquette_covering(int rows, int cols) {
    require_covering_dims(rows, cols);
    RegionCovering cov;
    cov.regions.reserve(static_cast<std::size_t>((rows - 1) * (cols - 1)));
    for (int r = 0; r + 1 < rows; ++r) {
        for (int c = 0; c + 1 < cols; ++c) {
            const int a = grid_vertex(cols, r, c);
            cov.regions.push_back({a, a + 1, a + cols, a + cols + 1});
        }
    }
    return cov;
}

RegionCovering plaquette_covering(int side) { return plaquette_covering(side, side); }

RegionCovering vertex_covering(int num_vertices) {
    RegionCovering cov;
    cov.regions.reserve(static_cast<std::size_t>(num_vertices));
    for (int i = 0; i < num_vertices; ++i) cov.regions.push_back({i});
    return cov;
}

RegionCovering canonical_covering(const GraphModel& model, RegionCovering cov) {
    for (auto& region : cov.regions) {
        std::sort(region.begin(), region.end());
        if (region.empty()) throw StructureError("empty region");
        if (std::adjacent_find(region.begin(), region.end()) != region.end()) {
            throw StructureError("region repeats a vertex");
        }
        if (region.front() < 0 || region.back() >= model.num_vertices()) {
            throw StructureError("region vertex out of range");
        }
    }
    return cov;
}

CoveringReport validate_covering(const GraphModel& model, const RegionCovering& cov) {
    const int n = model.num_vertices();
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::set<std::pair<int, int>> inside;
    for (const auto& region : cov.regions) {
        for (std::size_t a = 0; a < region.size(); ++a) {
            if (region[a] >= 0 && region[a] < n) seen[static_cast<std::size_t>(region[a])] = 1;
            for (std::size_t b = a + 1; b < region.size(); ++b) {
                inside.emplace(std::min(region[a], region[b]), std::max(region[a], region[b]));
            }
        }
    }
    CoveringReport report;
    for (int i = 0; i < n; ++i) {
        if (!seen[static_cast<std::size_t>(i)]) report.uncovered_vertices.push_back(i);
    }
    for (const Edge& e : model.edges()) {
        if (!inside.contains({e.i, e.j})) report.uncovered_edges.emplace_back(e.i, e.j);
    }
    return report;
}

GraphModel complete_covering_edges(const GraphModel& model, const RegionCovering& cov) {
    std::vector<Edge> edges(model.edges().begin(), model.edges().end());
    std::set<std::pair<int, int>> added;
    for (const auto& region : cov.regions) {
        for (std::size_t a = 0; a < region.size(); ++a) {
            for (std::size_t b = a + 1; b < region.size(); ++b) {
                const int i = std::min(region[a], region[b]);
                const int j = std::max(region[a], region[b]);
                if (!model.has_edge(i, j) && added.emplace(i, j).second) edges.push_back({i, j, 0.0});
            }
        }
    }
    return GraphModel(model.num_vertices(), std::move(edges),
                      {model.vertex_weights().begin(), model.vertex_weights().end()});
}

GraphModel apex_reduction(const GraphModel& model) {
    const int n = model.num_vertices();
    std::vector<Edge> edges(model.edges().begin(), model.edges().end());
    for (int i = 0; i < n; ++i) {
        const double h = model.vertex_weight(i);
        if (h != 0.0) edges.push_back({i, n, h});
    }
    return GraphModel(n + 1, std::move(edges), std::vector<double>(static_cast<std::size_t>(n + 1), 0.0));
}

GraphModel gen_spinglass(int side, SpinGlassDistribution dist, std::uint64_t seed) {
    if (side < 2) throw DimensionError("spin-glass grids need side >= 2");
    std::mt19937_64 rng(seed);
    auto sign = [&rng] { return (rng() >> 63) != 0 ? 1.0 : -1.0; };

    std::vector<double> w(static_cast<std::size_t>(grid_edge_count(side, side)));
    std::vector<double> h(static_cast<std::size_t>(side * side));
    switch (dist) {
        case SpinGlassDistribution::kUniformFieldOne:
            for (double& v : w) v = sign();
            for (double& v : h) v = sign();
            break;
        case SpinGlassDistribution::kUniformFieldHalf:
            for (double& v : w) v = sign();
            for (double& v : h) v = 0.5 * sign();
            break;
        case SpinGlassDistribution::kGaussianWeakField:
        case SpinGlassDistribution::kGaussianUnitField: {
            const double field_sd = dist == SpinGlassDistribution::kGaussianWeakField ? 0.1 : 1.0;
            std::normal_distribution<double> coupling(0.0, 1.0);
            for (double& v : w) v = coupling(rng);
            std::normal_distribution<double> field(0.0, field_sd);
            for (double& v : h) v = field(rng);
            break;
        }
    }
    return grid_model(side, w, h);
}

GraphModel gen_denoise_model(const BinaryImage& noisy, double theta0) {
    if (noisy.pixels.empty()) throw DimensionError("empty image");
    const int rows = noisy.height, cols = noisy.width;
    std::vector<double> w(static_cast<std::size_t>(grid_edge_count(rows, cols)), 1.0);
    std::vector<double> h(noisy.pixels.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = theta0 * static_cast<double>(noisy.pixels[i]);
    return grid_model(rows, cols, w, h);
}

BinaryImage add_noise(const BinaryImage& clean, NoiseKind kind, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw DimensionError("noise probability must lie in [0, 1]");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    BinaryImage out = clean;
    const std::size_t count = clean.pixels.size();
    if (kind == NoiseKind::kBernoulli) {
        for (std::size_t i = 0; i < count; ++i) {
            if (unit(rng) < p) out.pixels[i] = static_cast<Spin>(-out.pixels[i]);
        }
        return out;
    }
    std::vector<char> flip(count, 0);
    for (int r = 0; r < clean.height; ++r) {
        for (int c = 0; c < clean.width; ++c) {
            if (!(unit(rng) < p)) continue;
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    const int rr = r + dr, cc = c + dc;
                    if (rr < 0 || cc < 0 || rr >= clean.height || cc >= clean.width) continue;
                    flip[static_cast<std::size_t>(rr * clean.width + cc)] = 1;
                }
            }
        }
    }
    for (std::size_t i = 0; i < count; ++i) {
        if (flip[i]) out.pixels[i] = static_cast<Spin>(-out.pixels[i]);
    }
    return out;
}

}  // namespace psos
