#pragma once

// Binary pairwise graphical models, region coverings and the instance
// generators used by the grid experiments (spin glasses, image denoising).

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace psos {

using Spin = std::int8_t;

struct Edge {
    int i = 0;
    int j = 0;
    double weight = 0.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
    int vertex = 0;
    double weight = 0.0;
};

/// Pairwise model  U(x) = sum_(i,j) w_ij x_i x_j + sum_i h_i x_i  over x in {+1,-1}^n.
///
/// Edges are stored canonically (i < j) and sorted lexicographically, so the
/// edge list order is a property of the edge set alone.
class GraphModel {
public:
    GraphModel() = default;
    GraphModel(int num_vertices, std::vector<Edge> edges, std::vector<double> vertex_weights);

    int num_vertices() const { return num_vertices_; }
    std::span<const Edge> edges() const { return edges_; }
    std::span<const double> vertex_weights() const { return vertex_weights_; }
    double vertex_weight(int i) const { return vertex_weights_[static_cast<std::size_t>(i)]; }
    std::span<const Neighbor> neighbors(int i) const { return adjacency_[static_cast<std::size_t>(i)]; }

    bool has_edge(int i, int j) const;
    /// Weight of edge {i, j}, or 0 when absent.
    double edge_weight(int i, int j) const;
    /// Position of {i, j} in edges(), if present.
    std::optional<int> edge_index(int i, int j) const;

    friend bool operator==(const GraphModel& a, const GraphModel& b) {
        return a.num_vertices_ == b.num_vertices_ && a.edges_ == b.edges_ &&
               a.vertex_weights_ == b.vertex_weights_;
    }

private:
    std::uint64_t key(int i, int j) const;

    int num_vertices_ = 0;
    std::vector<Edge> edges_;
    std::vector<double> vertex_weights_;
    std::vector<std::vector<Neighbor>> adjacency_;
    std::unordered_map<std::uint64_t, int> edge_lookup_;
};

/// A +1/-1 labeling of the vertices.
class Assignment {
public:
    Assignment() = default;
    explicit Assignment(std::vector<Spin> values);
    static Assignment all_ones(int n) { return Assignment(std::vector<Spin>(static_cast<std::size_t>(n), 1)); }

    std::size_t size() const { return values_.size(); }
    Spin operator[](std::size_t i) const { return values_[i]; }
    std::span<const Spin> values() const { return values_; }
    Assignment flipped() const;

    friend bool operator==(const Assignment&, const Assignment&) = default;

private:
    std::vector<Spin> values_;
};

/// Family of vertex subsets; each region is stored sorted.
struct RegionCovering {
    std::vector<std::vector<int>> regions;
    std::size_t max_region_size() const;
};

struct CoveringReport {
    std::vector<int> uncovered_vertices;
    std::vector<std::pair<int, int>> uncovered_edges;
    bool ok() const { return uncovered_vertices.empty() && uncovered_edges.empty(); }
};

struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<Spin> pixels;  // row-major

    BinaryImage() = default;
    BinaryImage(int width, int height, std::vector<Spin> pixels);
    Spin at(int row, int col) const { return pixels[static_cast<std::size_t>(row * width + col)]; }

    friend bool operator==(const BinaryImage&, const BinaryImage&) = default;
};

enum class SpinGlassDistribution {
    kUniformFieldOne = 1,   // w ~ U{+1,-1}, h ~ U{+1,-1}
    kUniformFieldHalf = 2,  // w ~ U{+1,-1}, h ~ U{+1/2,-1/2}
    kGaussianWeakField = 3, // w ~ N(0,1),   h ~ N(0, 0.1^2)
    kGaussianUnitField = 4, // w ~ N(0,1),   h ~ N(0,1)
};

SpinGlassDistribution spin_glass_distribution_from_int(int code);

enum class NoiseKind { kBernoulli, kBlockwise };

NoiseKind noise_kind_from_string(const std::string& name);

// --- evaluation ---------------------------------------------------------

double objective_value(const GraphModel& model, const Assignment& x);

// --- grids --------------------------------------------------------------

inline int grid_vertex(int cols, int row, int col) { return row * cols + col; }
inline int grid_edge_count(int rows, int cols) { return rows * (cols - 1) + (rows - 1) * cols; }

/// 4-connected rows x cols grid; vertex (r, c) has index r * cols + c.
/// `edge_weights` follow the canonical (sorted) edge order.
GraphModel grid_model(int rows, int cols, std::span<const double> edge_weights,
                      std::span<const double> vertex_weights);
GraphModel grid_model(int side, std::span<const double> edge_weights,
                      std::span<const double> vertex_weights);

/// Returns the side if every edge of `model` is a grid or top-left/bottom-right
/// diagonal edge of a side x side grid.
std::optional<int> infer_grid_side(const GraphModel& model);

/// Adds a zero-weight top-left to bottom-right diagonal in every unit plaquette.
GraphModel augment_with_diagonals(const GraphModel& model, int rows, int cols);
GraphModel augment_with_diagonals(const GraphModel& model, int side);

/// Two triangles per plaquette, split along the same diagonal as augment_with_diagonals.
RegionCovering triangle_covering(int rows, int cols);
RegionCovering triangle_covering(int side);

RegionCovering plaquette_covering(int rows, int cols);
RegionCovering plaquette_covering(int side);

/// One singleton region per vertex (degree-2 relaxation).
RegionCovering vertex_covering(int num_vertices);

/// Normalizes the covering (sorted regions) and rejects out-of-range or repeated vertices.
RegionCovering canonical_covering(const GraphModel& model, RegionCovering cov);

CoveringReport validate_covering(const GraphModel& model, const RegionCovering& cov);

/// Adds every pair inside a region as a zero-weight edge, making the edge set
/// the maximal one compatible with the covering.
GraphModel complete_covering_edges(const GraphModel& model, const RegionCovering& cov);

/// Moves vertex fields onto edges to a new apex vertex (index n).
GraphModel apex_reduction(const GraphModel& model);

// --- generators ---------------------------------------------------------

GraphModel gen_spinglass(int side, SpinGlassDistribution dist, std::uint64_t seed);

GraphModel gen_denoise_model(const BinaryImage& noisy, double theta0);

BinaryImage add_noise(const BinaryImage& clean, NoiseKind kind, double p, std::uint64_t seed);

}  // namespace psos
