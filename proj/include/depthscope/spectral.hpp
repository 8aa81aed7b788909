#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

namespace depthscope {

/// Row-major square matrix.
struct DenseMatrix {
    std::size_t n = 0;
    std::vector<double> a;

    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t size) : n(size), a(size * size, 0.0) {}
    DenseMatrix(std::size_t size, std::vector<double> values) : n(size), a(std::move(values)) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

/// Eigenvalues ascending; vectors(i, j) is component i of eigenvector j.
struct EigenDecomposition {
    std::vector<double> values;
    DenseMatrix vectors;
};

enum class EigenMethod { TridiagonalQL, Jacobi };

/// Symmetric eigensolver. Each eigenvector is signed so that its largest
/// magnitude component is positive. Throws AnalysisError on non-convergence.
EigenDecomposition eigendecompose(const DenseMatrix& m, EigenMethod method = EigenMethod::TridiagonalQL);

struct Laplacian {
    DenseMatrix L;                   // over the active vertices only
    std::vector<std::size_t> active; // vertices with positive degree
    std::vector<std::size_t> isolated;
};

/// L = I - D^-1/2 S D^-1/2 with d_i = sum_j s_ij (self-similarity included).
/// Zero-degree vertices are left out of L.
Laplacian graph_laplacian(const DenseMatrix& S);

/// Connected components of the graph with an edge wherever s_ij > 0, i != j.
/// Components are numbered by their smallest vertex.
std::vector<int> connected_components(const DenseMatrix& S);

/// Two-way split from the second eigenvector: nonnegative components get
/// label 0. When the off-diagonal graph is disconnected, the component of
/// vertex 0 gets label 0 and every other component label 1.
std::vector<int> bipartition(const DenseMatrix& S, const EigenDecomposition& eig);

struct KMeansResult {
    std::vector<int> labels;
    double wcss = 0.0;
};

/// Rows of the first k eigenvectors, L2-normalized, clustered with seeded
/// k-means++ (10 restarts, 100 iterations). Labels are renumbered by
/// ascending cluster size, ties by first occurrence.
KMeansResult kway_cluster(const EigenDecomposition& eig, std::size_t k, std::uint64_t seed);

/// Plain k-means on row-major points (count x dim).
KMeansResult kmeans(std::span<const double> points, std::size_t dim, std::size_t k, std::uint64_t seed,
                    int restarts = 10, int max_iterations = 100);

struct SuggestedK {
    std::size_t k = 1;
    /// Largest gap divided by the runner-up gap (infinite when the runner-up is 0).
    double confidence = 0.0;
    bool low_confidence = false;
};

inline constexpr double kLowConfidenceRatio = 1.5;

/// Largest eigengap over the first min(n, 10) eigenvalues.
SuggestedK suggest_k(std::span<const double> eigenvalues);

/// Permutation sorting datapoints by (label, fiedler value, index).
std::vector<std::size_t> reorder(std::span<const int> labels, std::span<const double> fiedler);

struct SpectralOptions {
    std::optional<std::size_t> k;
    std::uint64_t seed = 0;
    EigenMethod method = EigenMethod::TridiagonalQL;
};

struct SpectralResult {
    std::vector<double> eigenvalues; // spectrum of the active Laplacian
    std::vector<std::size_t> isolated;
    std::vector<double> fiedler;     // per datapoint, 0 for isolated ones
    std::vector<double> embedding;   // n x k, row-normalized eigenvector rows
    std::size_t k = 1;               // clusters among active vertices
    std::size_t cluster_count = 1;   // k plus one singleton per isolated vertex
    SuggestedK suggestion;
    std::vector<int> labels;
    std::vector<std::size_t> order;
};

SpectralResult spectral_analysis(const DenseMatrix& S, const SpectralOptions& options = {});

nlohmann::json to_json(const SpectralResult& r);

} // namespace depthscope
