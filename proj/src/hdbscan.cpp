#include "salience/hdbscan.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include "salience/errors.hpp"

namespace salience {

void ClustererConfig::validate() const {
    if (min_cluster_size < 2) throw ConfigError(fmt::format("min_cluster_size must be >= 2, got {}", min_cluster_size));
    if (min_samples < 0) throw ConfigError(fmt::format("min_samples must be >= 1, got {}", min_samples));
}

std::vector<double> core_distances(const DenseMatrix& points, std::size_t min_samples) {
    const std::size_t n = points.rows;
    if (min_samples < 1 || min_samples >= n)
        throw TooFewPoints(fmt::format("core distances need more than min_samples={} points, got {}", min_samples, n));
    std::vector<double> cores(n);
    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t m = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) d[m++] = std::sqrt(squared_euclidean(points.row(i), points.row(j)));
        const auto kth = d.begin() + static_cast<std::ptrdiff_t>(min_samples - 1);
        std::nth_element(d.begin(), kth, d.end());
        cores[i] = *kth;
    }
    return cores;
}

std::vector<MstEdge> mutual_reachability_mst(const DenseMatrix& points, const std::vector<double>& cores) {
    const std::size_t n = points.rows;
    std::vector<MstEdge> edges;
    if (n < 2) return edges;
    edges.reserve(n - 1);
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> best(n, kInf);
    std::vector<std::uint32_t> via(n, 0);
    std::vector<char> in_tree(n, 0);

    auto edge_key = [](std::uint32_t x, std::uint32_t y) { return std::pair(std::min(x, y), std::max(x, y)); };

    std::uint32_t current = 0;
    in_tree[0] = 1;
    for (std::size_t step = 1; step < n; ++step) {
        for (std::uint32_t j = 0; j < n; ++j) {
            if (in_tree[j]) continue;
            const double d = std::sqrt(squared_euclidean(points.row(current), points.row(j)));
            const double w = std::max({cores[current], cores[j], d});
            if (w < best[j] || (w == best[j] && edge_key(current, j) < edge_key(via[j], j))) {
                best[j] = w;
                via[j] = current;
            }
        }
        std::uint32_t next = 0;
        bool found = false;
        for (std::uint32_t j = 0; j < n; ++j) {
            if (in_tree[j]) continue;
            if (!found || best[j] < best[next] ||
                (best[j] == best[next] && edge_key(via[j], j) < edge_key(via[next], next))) {
                next = j;
                found = true;
            }
        }
        in_tree[next] = 1;
        const auto [a, b] = edge_key(via[next], next);
        edges.push_back({a, b, best[next]});
        current = next;
    }
    return edges;
}

std::vector<double> CondensedTree::birth() const {
    std::vector<double> out(n_clusters, 0.0);
    for (const auto& r : rows)
        if (is_cluster(r.child)) out[r.child - n_points] = r.lambda;
    return out;
}

std::vector<double> CondensedTree::stability() const {
    const auto b = birth();
    std::vector<double> out(n_clusters, 0.0);
    for (const auto& r : rows) out[r.parent - n_points] += (r.lambda - b[r.parent - n_points]) * static_cast<double>(r.child_size);
    return out;
}

namespace {

struct Dendrogram {
    // Node ids: leaves 0..n-1, merges n..2n-2 in order of increasing distance.
    std::vector<std::size_t> left, right, size;
    std::vector<double> distance;
};

Dendrogram single_linkage(std::vector<MstEdge> mst, std::size_t n) {
    std::sort(mst.begin(), mst.end(), [](const MstEdge& x, const MstEdge& y) {
        return std::tie(x.weight, x.a, x.b) < std::tie(y.weight, y.a, y.b);
    });
    Dendrogram d;
    const std::size_t total = 2 * n - 1;
    d.left.assign(total, 0);
    d.right.assign(total, 0);
    d.size.assign(total, 1);
    d.distance.assign(total, 0.0);
    std::vector<std::size_t> parent(total);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    std::size_t next = n;
    for (const auto& e : mst) {
        const std::size_t ra = find(e.a), rb = find(e.b);
        d.left[next] = std::min(ra, rb);
        d.right[next] = std::max(ra, rb);
        d.size[next] = d.size[ra] + d.size[rb];
        d.distance[next] = e.weight;
        parent[ra] = parent[rb] = next;
        ++next;
    }
    return d;
}

}  // namespace

CondensedTree condense(const std::vector<MstEdge>& mst, std::size_t n_points, std::size_t min_cluster_size) {
    CondensedTree tree;
    tree.n_points = n_points;
    if (n_points == 0) return tree;
    tree.n_clusters = 1;
    if (n_points == 1) {
        tree.rows.push_back({n_points, 0, 0.0, 1});
        return tree;
    }
    if (mst.size() != n_points - 1) throw ConfigError("condense: MST must have n - 1 edges");
    const Dendrogram dg = single_linkage(mst, n_points);

    // Zero distances (duplicate points) would give infinite lambda; cap them just above the
    // largest finite lambda so stabilities stay finite and scale with the data.
    double min_positive = std::numeric_limits<double>::infinity();
    for (const auto& e : mst)
        if (e.weight > 0.0) min_positive = std::min(min_positive, e.weight);
    const double lambda_cap = std::isinf(min_positive) ? 1.0 : 2.0 / min_positive;
    auto lambda_of = [&](double dist) { return dist > 0.0 ? 1.0 / dist : lambda_cap; };

    auto leaves_of = [&](std::size_t node) {
        std::vector<std::size_t> out, stack{node};
        while (!stack.empty()) {
            const std::size_t x = stack.back();
            stack.pop_back();
            if (x < n_points) {
                out.push_back(x);
            } else {
                stack.push_back(dg.right[x]);
                stack.push_back(dg.left[x]);
            }
        }
        return out;
    };

    const std::size_t root = 2 * n_points - 2;
    // (dendrogram node, condensed cluster id), processed breadth first for stable numbering.
    std::vector<std::pair<std::size_t, std::size_t>> queue{{root, n_points}};
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        auto [node, label] = queue[qi];
        // Follow the chain of splits where at most one side is large.
        while (node >= n_points) {
            const double lam = lambda_of(dg.distance[node]);
            const std::size_t l = dg.left[node], r = dg.right[node];
            const bool big_l = dg.size[l] >= min_cluster_size;
            const bool big_r = dg.size[r] >= min_cluster_size;
            if (big_l && big_r) {
                for (const std::size_t c : {l, r}) {
                    const std::size_t id = n_points + tree.n_clusters++;
                    tree.rows.push_back({label, id, lam, dg.size[c]});
                    queue.emplace_back(c, id);
                }
                break;
            }
            if (!big_l && !big_r) {
                for (const std::size_t c : {l, r})
                    for (const std::size_t p : leaves_of(c)) tree.rows.push_back({label, p, lam, 1});
                break;
            }
            const std::size_t small = big_l ? r : l;
            for (const std::size_t p : leaves_of(small)) tree.rows.push_back({label, p, lam, 1});
            node = big_l ? l : r;
        }
    }
    return tree;
}

std::vector<std::size_t> ClusterAssignment::members(int label) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) out.push_back(i);
    return out;
}

std::size_t ClusterAssignment::noise_count() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoise));
}

ClusterAssignment extract_clusters(const CondensedTree& tree, const ClustererConfig& cfg) {
    ClusterAssignment out;
    out.config = cfg;
    out.labels.assign(tree.n_points, kNoise);
    if (tree.n_clusters <= 1) return out;

    const std::size_t n = tree.n_points;
    const std::size_t m = tree.n_clusters;
    std::vector<std::size_t> parent_of(m, 0);
    std::vector<std::vector<std::size_t>> children(m);
    for (const auto& r : tree.rows) {
        if (!tree.is_cluster(r.child)) continue;
        parent_of[r.child - n] = r.parent - n;
        children[r.parent - n].push_back(r.child - n);
    }
    const auto stab = tree.stability();
    const auto birth = tree.birth();

    std::vector<char> selected(m, 0);
    if (cfg.selection == Selection::Leaf) {
        for (std::size_t c = 1; c < m; ++c) selected[c] = children[c].empty();
    } else {
        // Children always have larger ids than their parent, so a reverse sweep is bottom-up.
        std::vector<double> best(m, 0.0);
        for (std::size_t c = m; c-- > 1;) {
            if (children[c].empty()) {
                selected[c] = 1;
                best[c] = stab[c];
                continue;
            }
            double sub = 0.0;
            for (auto ch : children[c]) sub += best[ch];
            if (stab[c] > sub) {
                selected[c] = 1;
                best[c] = stab[c];
                std::vector<std::size_t> stack(children[c]);
                while (!stack.empty()) {
                    const auto x = stack.back();
                    stack.pop_back();
                    selected[x] = 0;
                    stack.insert(stack.end(), children[x].begin(), children[x].end());
                }
            } else {
                best[c] = sub;
            }
        }
    }

    std::vector<std::size_t> chosen;
    for (std::size_t c = 1; c < m; ++c)
        if (selected[c]) chosen.push_back(c);
    std::stable_sort(chosen.begin(), chosen.end(), [&](std::size_t x, std::size_t y) { return birth[x] < birth[y]; });
    std::vector<int> label_of(m, kNoise);
    for (std::size_t k = 0; k < chosen.size(); ++k) label_of[chosen[k]] = static_cast<int>(k);
    out.cluster_count = static_cast<int>(chosen.size());

    // Resolve each cluster's nearest selected ancestor (itself included).
    std::vector<int> resolved(m, kNoise);
    for (std::size_t c = 1; c < m; ++c) {
        resolved[c] = label_of[c] != kNoise ? label_of[c] : resolved[parent_of[c]];
    }
    for (const auto& r : tree.rows)
        if (!tree.is_cluster(r.child)) out.labels[r.child] = resolved[r.parent - n];
    return out;
}

ClusterAssignment cluster(const DenseMatrix& points, std::vector<std::string> ids, const ClustererConfig& cfg) {
    cfg.validate();
    const std::size_t n = points.rows;
    if (ids.size() != n) throw ConfigError("cluster: id count does not match the point count");
    ClusterAssignment out;
    const auto mcs = static_cast<std::size_t>(cfg.min_cluster_size);
    if (n < mcs || n < 2) {
        out.labels.assign(n, kNoise);
    } else {
        const std::size_t ms = std::min(static_cast<std::size_t>(cfg.effective_min_samples()), n - 1);
        const auto cores = core_distances(points, ms);
        const auto mst = mutual_reachability_mst(points, cores);
        out = extract_clusters(condense(mst, n, mcs), cfg);
    }
    out.config = cfg;
    out.ids = std::move(ids);
    return out;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw ConfigError("adjusted_rand_index: label vectors differ in length");
    const auto n = static_cast<double>(a.size());
    std::map<std::pair<int, int>, double> table;
    std::map<int, double> rows, cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        table[{a[i], b[i]}] += 1.0;
        rows[a[i]] += 1.0;
        cols[b[i]] += 1.0;
    }
    auto c2 = [](double x) { return x * (x - 1.0) / 2.0; };
    double index = 0.0, sa = 0.0, sb = 0.0;
    for (const auto& [k, v] : table) index += c2(v);
    for (const auto& [k, v] : rows) sa += c2(v);
    for (const auto& [k, v] : cols) sb += c2(v);
    const double expected = sa * sb / c2(n);
    const double max_index = 0.5 * (sa + sb);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

}  // namespace salience
