#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "depthscope/dataset.hpp"
#include "depthscope/quadtree.hpp"
#include "depthscope/spectral.hpp"

namespace depthscope {

enum class LayoutMode { ForceDirected, Geospatial };

struct ForceLayoutOptions {
    std::uint64_t seed = 0;
    int iterations = 500;
    double theta = 0.7;
    double initial_step = 0.1;
};

struct LayoutResult {
    LayoutMode mode = LayoutMode::ForceDirected;
    std::vector<Vec2> positions;
    int iterations = 0;
    double energy = 0.0;
    /// Iterations in the final 10% where the energy went up.
    std::size_t energy_increases = 0;
    std::vector<double> energy_trace; // energy over the final 10%
    std::vector<std::size_t> outliers; // boundary-placed datapoints
    std::size_t collision_passes = 0;
    std::size_t remaining_overlaps = 0;
    std::vector<std::vector<Vec2>> polylines; // geospatial curves
};

/// Datapoints with no positive similarity to any other datapoint.
std::vector<std::size_t> zero_similarity_points(const DenseMatrix& S);

/// Similarity-weighted spring attraction plus Barnes-Hut 1/d repulsion.
/// Zero-similarity points are left out and placed on the boundary band.
LayoutResult force_layout(const DenseMatrix& S, const ForceLayoutOptions& options = {});

/// Layout energy of `pos` restricted to `members`: attraction 0.5 s d^2 / m
/// minus the logarithmic repulsion potential.
double layout_energy(const DenseMatrix& S, const std::vector<Vec2>& pos, const std::vector<std::size_t>& members);

struct CollisionReport {
    std::size_t passes = 0;
    std::size_t remaining_overlaps = 0;
};

inline double default_node_radius(std::size_t n) { return n == 0 ? 0.0 : 0.4 / std::sqrt(static_cast<double>(n)); }

/// Pushes apart pairs closer than 2r, at most `max_passes` Jacobi-style passes.
CollisionReport resolve_collisions(std::vector<Vec2>& positions, double r, std::uint64_t seed, int max_passes = 50);

inline constexpr double kOutlierMargin = 0.05;

/// Seeded positions within kOutlierMargin of the unit-square border.
std::vector<Vec2> place_outliers(std::size_t count, std::uint64_t seed);

LayoutResult geospatial_positions(const Dataset& dataset, std::string_view attribute);

struct Edge {
    std::size_t i = 0, j = 0;
    double weight = 0.0;
};

/// Upper-triangle pairs with 0 < s_ij and s_ij >= threshold.
std::vector<Edge> edge_list(const DenseMatrix& S, double threshold);

nlohmann::json to_json(const LayoutResult& r);

} // namespace depthscope
