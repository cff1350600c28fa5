#pragma once

// Manifold-learning dimensionality reduction: exact kNN graph, per-point bandwidth calibration,
// fuzzy union of directed memberships, and stochastic layout optimization with negative sampling.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "salience/embed.hpp"
#include "salience/matrix.hpp"

namespace salience {

enum class Metric { Cosine, Euclidean };

struct ReducerConfig {
    int n_neighbors = 15;
    int n_components = 2;
    double min_dist = 0.1;
    double spread = 1.0;
    int n_epochs = 0;  // 0: 500 for <= 10k points, else 200
    int negative_sample_rate = 5;
    double learning_rate = 1.0;
    std::uint64_t seed = 42;
    Metric metric = Metric::Cosine;

    /// Throws ConfigError (bad parameters) or TooFewPoints (k >= n_points).
    void validate(std::size_t n_points) const;
    int epochs_for(std::size_t n_points) const;
};

struct KnnGraph {
    std::size_t k = 0;
    std::vector<std::uint32_t> indices;  // n * k, row i lists the neighbors of point i
    std::vector<double> distances;       // ascending within each row

    std::size_t n_points() const { return k == 0 ? 0 : indices.size() / k; }
    std::span<const std::uint32_t> neighbors(std::size_t i) const { return {indices.data() + i * k, k}; }
    std::span<const double> dists(std::size_t i) const { return {distances.data() + i * k, k}; }
};

double metric_distance(std::span<const double> a, std::span<const double> b, Metric metric);

/// Exact brute-force k nearest neighbours (self excluded); ties go to the lower index.
KnnGraph knn_graph(const DenseMatrix& points, std::size_t k, Metric metric);

struct Bandwidth {
    double rho = 0.0;    // smallest positive neighbour distance (0 if none)
    double sigma = 0.0;  // solves sum_j exp(-max(0, d_j - rho) / sigma) = log2(k)
};

/// Calibrates one point. `floor` is the lower clamp for sigma.
Bandwidth smooth_knn_point(std::span<const double> dists, double floor);

/// Calibrates every point; sigma is clamped below at 1e-3 times the point's mean neighbour
/// distance (or the global mean when rho is 0).
std::vector<Bandwidth> smooth_knn(const KnnGraph& knn);

/// Symmetric sparse membership graph in CSR form.
struct FuzzyGraph {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::uint32_t> cols;
    std::vector<double> weights;
    std::vector<Bandwidth> bandwidths;

    double weight(std::size_t i, std::size_t j) const;
    std::size_t nnz() const { return cols.size(); }
    double max_asymmetry() const;
};

/// a_ij = exp(-max(0, d_ij - rho_i) / sigma_i); w_ij = a_ij + a_ji - a_ij * a_ji; zeros dropped.
FuzzyGraph fuzzy_union(const KnnGraph& knn, const std::vector<Bandwidth>& bandwidths);

struct CurveParams {
    double a = 0.0;
    double b = 0.0;
    double rmse = 0.0;
    int iterations = 0;
};

/// Least-squares fit of 1 / (1 + a d^(2b)) to the piecewise target (1 below min_dist, then
/// exp(-(d - min_dist) / spread)) on 300 points over [0, 3 spread]. Throws NumericalError on
/// non-convergence.
CurveParams fit_curve(double min_dist, double spread);

/// Low-dimensional similarity and the log-objective gradients used by the optimizer. Each
/// coefficient c gives d/dy_i of the term as c * (y_i - y_j).
double phi(double dist_sq, double a, double b);
double attractive_coefficient(double dist_sq, double a, double b);  // of log(phi)
double repulsive_coefficient(double dist_sq, double a, double b);   // of log(1 - phi)

/// Leading non-trivial eigenvectors of the normalized graph adjacency, one column per
/// component. Throws NumericalError when the iteration does not produce finite vectors.
DenseMatrix spectral_layout(const FuzzyGraph& graph, std::size_t n_components, std::uint64_t seed);

struct LayoutEmbedding {
    std::vector<std::string> ids;
    DenseMatrix coords;
    ReducerConfig config;
};

/// Runs the SGD layout from a spectral initialization (uniform random in [-10, 10] if the
/// eigensolve fails). Single-threaded; identical inputs give bitwise-identical output.
LayoutEmbedding optimize_layout(const FuzzyGraph& graph, const ReducerConfig& cfg,
                                std::vector<std::string> ids);

/// knn_graph -> smooth_knn -> fuzzy_union -> optimize_layout.
LayoutEmbedding reduce(const EmbeddingMatrix& input, const ReducerConfig& cfg);

/// "reduce:<n_components>d:<seed>"
std::string layout_provider_name(const ReducerConfig& cfg);
EmbeddingMatrix layout_as_matrix(const LayoutEmbedding& layout);

/// Fraction-style score in [0, 1] of how well `low` preserves the k nearest neighbours of `high`.
double trustworthiness(const DenseMatrix& high, const DenseMatrix& low, std::size_t k, Metric high_metric);

}  // namespace salience
