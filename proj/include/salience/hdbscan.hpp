#pragma once

// Hierarchical density clustering over mutual-reachability distances with flat-cluster
// extraction by stability.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "salience/matrix.hpp"

namespace salience {

enum class Selection { ExcessOfMass, Leaf };

struct ClustererConfig {
    int min_cluster_size = 15;
    int min_samples = 0;  // 0: same as min_cluster_size
    Selection selection = Selection::ExcessOfMass;

    void validate() const;
    int effective_min_samples() const { return min_samples > 0 ? min_samples : min_cluster_size; }
};

inline constexpr int kNoise = -1;

/// Distance from each point to its min_samples-th nearest other point (Euclidean).
/// Throws TooFewPoints when min_samples >= n.
std::vector<double> core_distances(const DenseMatrix& points, std::size_t min_samples);

struct MstEdge {
    std::uint32_t a = 0;  // a < b
    std::uint32_t b = 0;
    double weight = 0.0;

    bool operator==(const MstEdge&) const = default;
};

/// Prim's algorithm over the complete graph of max(core_i, core_j, d(i, j)); equal weights
/// resolve by (min index, max index). Edges are returned in insertion order.
std::vector<MstEdge> mutual_reachability_mst(const DenseMatrix& points, const std::vector<double>& cores);

struct CondensedRow {
    std::size_t parent = 0;  // cluster node id (root is n_points)
    std::size_t child = 0;   // point index (< n_points) or cluster node id
    double lambda = 0.0;
    std::size_t child_size = 0;
};

struct CondensedTree {
    std::size_t n_points = 0;
    std::size_t n_clusters = 0;  // cluster node ids are n_points .. n_points + n_clusters - 1
    std::vector<CondensedRow> rows;

    std::size_t root() const { return n_points; }
    bool is_cluster(std::size_t node) const { return node >= n_points; }
    /// Lambda at which each cluster node appears (0 for the root), indexed by node - n_points.
    std::vector<double> birth() const;
    /// Sum over rows with this parent of (lambda - birth) * child_size, indexed by node - n_points.
    std::vector<double> stability() const;
};

/// Builds the single-linkage dendrogram from the MST and condenses it: a split side smaller than
/// min_cluster_size sheds its points from the parent, two large sides become child clusters.
CondensedTree condense(const std::vector<MstEdge>& mst, std::size_t n_points, std::size_t min_cluster_size);

struct ClusterAssignment {
    std::vector<std::string> ids;
    std::vector<int> labels;
    int cluster_count = 0;
    ClustererConfig config;

    std::vector<std::size_t> members(int label) const;
    std::size_t noise_count() const;
};

/// Selects flat clusters (the root never qualifies) and labels every point of a selected
/// cluster's subtree; label order follows birth lambda. Labels only; ids are left empty.
ClusterAssignment extract_clusters(const CondensedTree& tree, const ClustererConfig& cfg);

/// Full pipeline. Fewer points than min_cluster_size gives all noise; min_samples is clamped to
/// n - 1.
ClusterAssignment cluster(const DenseMatrix& points, std::vector<std::string> ids, const ClustererConfig& cfg);

/// Adjusted Rand index of two labelings of the same points (noise treated as its own label).
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace salience
