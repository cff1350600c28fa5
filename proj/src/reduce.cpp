#include "salience/reduce.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "salience/errors.hpp"
#include "salience/random.hpp"

namespace salience {

namespace {

constexpr double kMinKDistScale = 1e-3;
constexpr double kSigmaAbsoluteFloor = 1e-12;
constexpr double kGradientClip = 4.0;
constexpr double kRepulsionEpsilon = 1e-12;

double clip(double v) { return std::clamp(v, -kGradientClip, kGradientClip); }

}  // namespace

void ReducerConfig::validate(std::size_t n_points) const {
    if (n_neighbors < 2) throw ConfigError(fmt::format("n_neighbors must be >= 2, got {}", n_neighbors));
    if (n_components < 1) throw ConfigError("n_components must be >= 1");
    if (!(min_dist >= 0.0 && min_dist < spread))
        throw ConfigError(fmt::format("need 0 <= min_dist < spread, got {} and {}", min_dist, spread));
    if (negative_sample_rate < 0) throw ConfigError("negative_sample_rate must be >= 0");
    if (n_epochs < 0) throw ConfigError("n_epochs must be >= 0");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (static_cast<std::size_t>(n_neighbors) >= n_points)
        throw TooFewPoints(fmt::format("need more than {} points for n_neighbors={}, got {}", n_neighbors,
                                       n_neighbors, n_points));
}

int ReducerConfig::epochs_for(std::size_t n_points) const {
    if (n_epochs > 0) return n_epochs;
    return n_points <= 10000 ? 500 : 200;
}

double metric_distance(std::span<const double> a, std::span<const double> b, Metric metric) {
    if (metric == Metric::Euclidean) return std::sqrt(squared_euclidean(a, b));
    const double na = std::sqrt(dot(a, a));
    const double nb = std::sqrt(dot(b, b));
    if (na == 0.0 || nb == 0.0) return na == nb ? 0.0 : 1.0;
    return std::max(0.0, 1.0 - dot(a, b) / (na * nb));
}

KnnGraph knn_graph(const DenseMatrix& points, std::size_t k, Metric metric) {
    const std::size_t n = points.rows;
    if (k < 1 || k >= n)
        throw TooFewPoints(fmt::format("knn_graph needs n > k (n={}, k={})", n, k));
    KnnGraph g;
    g.k = k;
    g.indices.resize(n * k);
    g.distances.resize(n * k);

    std::vector<double> norms(n, 0.0);
    if (metric == Metric::Cosine)
        for (std::size_t i = 0; i < n; ++i) norms[i] = std::sqrt(dot(points.row(i), points.row(i)));

    std::vector<std::pair<double, std::uint32_t>> cand(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t m = 0;
        const auto pi = points.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double d;
            if (metric == Metric::Euclidean) {
                d = std::sqrt(squared_euclidean(pi, points.row(j)));
            } else if (norms[i] == 0.0 || norms[j] == 0.0) {
                d = norms[i] == norms[j] ? 0.0 : 1.0;
            } else {
                d = std::max(0.0, 1.0 - dot(pi, points.row(j)) / (norms[i] * norms[j]));
            }
            cand[m++] = {d, static_cast<std::uint32_t>(j)};
        }
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
        for (std::size_t r = 0; r < k; ++r) {
            g.distances[i * k + r] = cand[r].first;
            g.indices[i * k + r] = cand[r].second;
        }
    }
    return g;
}

Bandwidth smooth_knn_point(std::span<const double> dists, double floor) {
    const double target = std::log2(static_cast<double>(dists.size()));
    Bandwidth bw;
    for (double d : dists) {
        if (d > 0.0) {
            bw.rho = d;
            break;
        }
    }
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double mid = 1.0;
    for (int iter = 0; iter < 64; ++iter) {
        double psum = 0.0;
        for (double d : dists) psum += std::exp(-std::max(0.0, d - bw.rho) / mid);
        if (std::abs(psum - target) < 1e-5) break;
        if (psum > target) {
            hi = mid;
            mid = 0.5 * (lo + hi);
        } else {
            lo = mid;
            mid = std::isinf(hi) ? mid * 2.0 : 0.5 * (lo + hi);
        }
    }
    bw.sigma = std::max({mid, floor, kSigmaAbsoluteFloor});
    return bw;
}

std::vector<Bandwidth> smooth_knn(const KnnGraph& knn) {
    const std::size_t n = knn.n_points();
    if (knn.k < 2) throw ConfigError("smooth_knn needs k >= 2");
    const double global_mean =
        knn.distances.empty()
            ? 0.0
            : std::accumulate(knn.distances.begin(), knn.distances.end(), 0.0) / static_cast<double>(knn.distances.size());
    std::vector<Bandwidth> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto d = knn.dists(i);
        const double mean_i = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
        const bool has_rho = std::any_of(d.begin(), d.end(), [](double x) { return x > 0.0; });
        const double floor = kMinKDistScale * (has_rho ? mean_i : global_mean);
        out[i] = smooth_knn_point(d, floor);
    }
    return out;
}

double FuzzyGraph::weight(std::size_t i, std::size_t j) const {
    const auto begin = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
    const auto end = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
    const auto it = std::lower_bound(begin, end, static_cast<std::uint32_t>(j));
    if (it == end || *it != j) return 0.0;
    return weights[static_cast<std::size_t>(it - cols.begin())];
}

double FuzzyGraph::max_asymmetry() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e)
            worst = std::max(worst, std::abs(weights[e] - weight(cols[e], i)));
    return worst;
}

FuzzyGraph fuzzy_union(const KnnGraph& knn, const std::vector<Bandwidth>& bandwidths) {
    const std::size_t n = knn.n_points();
    struct Entry {
        std::uint32_t i, j;
        double a;
    };
    std::vector<Entry> directed;
    directed.reserve(n * knn.k);
    for (std::size_t i = 0; i < n; ++i) {
        const auto nb = knn.neighbors(i);
        const auto d = knn.dists(i);
        for (std::size_t r = 0; r < knn.k; ++r) {
            const double a = std::exp(-std::max(0.0, d[r] - bandwidths[i].rho) / bandwidths[i].sigma);
            directed.push_back({static_cast<std::uint32_t>(i), nb[r], a});
        }
    }
    // Collect (min, max) pairs with both directed memberships, then emit both orientations.
    std::vector<Entry> keyed;
    keyed.reserve(directed.size());
    for (const auto& e : directed) keyed.push_back({std::min(e.i, e.j), std::max(e.i, e.j), 0.0});
    std::sort(keyed.begin(), keyed.end(), [](const Entry& x, const Entry& y) {
        return std::tie(x.i, x.j) < std::tie(y.i, y.j);
    });
    keyed.erase(std::unique(keyed.begin(), keyed.end(),
                            [](const Entry& x, const Entry& y) { return x.i == y.i && x.j == y.j; }),
                keyed.end());

    auto directed_weight = [&](std::uint32_t i, std::uint32_t j) {
        const auto nb = knn.neighbors(i);
        for (std::size_t r = 0; r < knn.k; ++r)
            if (nb[r] == j) return directed[i * knn.k + r].a;
        return 0.0;
    };

    std::vector<Entry> sym;
    sym.reserve(keyed.size() * 2);
    for (const auto& e : keyed) {
        const double aij = directed_weight(e.i, e.j);
        const double aji = directed_weight(e.j, e.i);
        const double w = aij + aji - aij * aji;
        if (w <= 0.0) continue;
        sym.push_back({e.i, e.j, w});
        sym.push_back({e.j, e.i, w});
    }
    std::sort(sym.begin(), sym.end(), [](const Entry& x, const Entry& y) {
        return std::tie(x.i, x.j) < std::tie(y.i, y.j);
    });

    FuzzyGraph g;
    g.n = n;
    g.bandwidths = bandwidths;
    g.row_ptr.assign(n + 1, 0);
    for (const auto& e : sym) ++g.row_ptr[e.i + 1];
    for (std::size_t i = 0; i < n; ++i) g.row_ptr[i + 1] += g.row_ptr[i];
    g.cols.reserve(sym.size());
    g.weights.reserve(sym.size());
    for (const auto& e : sym) {
        g.cols.push_back(e.j);
        g.weights.push_back(e.a);
    }
    return g;
}

// ---- curve fit ----

CurveParams fit_curve(double min_dist, double spread) {
    if (!(min_dist >= 0.0 && min_dist < spread))
        throw ConfigError(fmt::format("fit_curve needs 0 <= min_dist < spread, got {} and {}", min_dist, spread));
    constexpr int kSamples = 300;
    constexpr int kMaxIterations = 1000;
    std::vector<double> xs(kSamples), ys(kSamples);
    for (int k = 0; k < kSamples; ++k) {
        xs[k] = 3.0 * spread * k / (kSamples - 1);
        ys[k] = xs[k] <= min_dist ? 1.0 : std::exp(-(xs[k] - min_dist) / spread);
    }

    auto cost = [&](double a, double b) {
        double s = 0.0;
        for (int k = 0; k < kSamples; ++k) {
            const double r = 1.0 / (1.0 + a * std::pow(xs[k], 2.0 * b)) - ys[k];
            s += r * r;
        }
        return s;
    };

    double a = 1.0, b = 1.0;
    double current = cost(a, b);
    double lambda = 1e-3;
    for (int iter = 1; iter <= kMaxIterations; ++iter) {
        // Gauss-Newton normal equations with Levenberg-Marquardt damping.
        double jaa = 0.0, jab = 0.0, jbb = 0.0, ga = 0.0, gb = 0.0;
        for (int k = 0; k < kSamples; ++k) {
            const double x = xs[k];
            if (x == 0.0) continue;  // f(0) = 1 for all (a, b); zero Jacobian row
            const double p = std::pow(x, 2.0 * b);
            const double denom = 1.0 + a * p;
            const double f = 1.0 / denom;
            const double r = f - ys[k];
            const double da = -p / (denom * denom);
            const double db = -a * p * 2.0 * std::log(x) / (denom * denom);
            jaa += da * da;
            jab += da * db;
            jbb += db * db;
            ga += da * r;
            gb += db * r;
        }
        bool accepted = false;
        for (int tries = 0; tries < 60 && !accepted; ++tries) {
            const double m00 = jaa * (1.0 + lambda), m11 = jbb * (1.0 + lambda), m01 = jab;
            const double det = m00 * m11 - m01 * m01;
            if (det == 0.0 || !std::isfinite(det)) {
                lambda *= 10.0;
                continue;
            }
            const double step_a = -(m11 * ga - m01 * gb) / det;
            const double step_b = -(m00 * gb - m01 * ga) / det;
            const double na = a + step_a, nb = b + step_b;
            const double trial = (na > 0.0 && nb > 0.0) ? cost(na, nb) : std::numeric_limits<double>::infinity();
            if (trial <= current) {
                a = na;
                b = nb;
                const bool converged = std::hypot(step_a, step_b) < 1e-8 || current - trial < 1e-18;
                current = trial;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                if (converged)
                    return CurveParams{a, b, std::sqrt(current / kSamples), iter};
            } else {
                lambda *= 10.0;
            }
        }
        if (!accepted) return CurveParams{a, b, std::sqrt(current / kSamples), iter};  // at a minimum
    }
    throw NumericalError(fmt::format("fit_curve did not converge after {} iterations (rmse {:.3g})", kMaxIterations,
                                     std::sqrt(current / kSamples)));
}

double phi(double dist_sq, double a, double b) { return 1.0 / (1.0 + a * std::pow(dist_sq, b)); }

double attractive_coefficient(double dist_sq, double a, double b) {
    if (dist_sq <= 0.0) return 0.0;
    return -2.0 * a * b * std::pow(dist_sq, b - 1.0) / (1.0 + a * std::pow(dist_sq, b));
}

double repulsive_coefficient(double dist_sq, double a, double b) {
    if (dist_sq <= 0.0) return 0.0;
    return 2.0 * b / ((dist_sq + kRepulsionEpsilon) * (1.0 + a * std::pow(dist_sq, b)));
}

// ---- spectral initialization ----

DenseMatrix spectral_layout(const FuzzyGraph& graph, std::size_t n_components, std::uint64_t seed) {
    const auto n = static_cast<Eigen::Index>(graph.n);
    const auto block = static_cast<Eigen::Index>(n_components + 1 + 4);
    if (block >= n) throw NumericalError("graph too small for a spectral layout");

    std::vector<double> degree(graph.n, 0.0);
    for (std::size_t i = 0; i < graph.n; ++i)
        for (std::size_t e = graph.row_ptr[i]; e < graph.row_ptr[i + 1]; ++e) degree[i] += graph.weights[e];
    if (std::any_of(degree.begin(), degree.end(), [](double d) { return d <= 0.0; }))
        throw NumericalError("graph has an isolated vertex");

    // (I + D^-1/2 W D^-1/2) / 2 shares eigenvectors with the normalized Laplacian, with the
    // spectrum mapped into [0, 1] so subspace iteration converges to the smallest Laplacian modes.
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(graph.nnz() + graph.n);
    for (std::size_t i = 0; i < graph.n; ++i) {
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), 0.5);
        for (std::size_t e = graph.row_ptr[i]; e < graph.row_ptr[i + 1]; ++e) {
            const std::size_t j = graph.cols[e];
            triplets.emplace_back(static_cast<int>(i), static_cast<int>(j),
                                  0.5 * graph.weights[e] / std::sqrt(degree[i] * degree[j]));
        }
    }
    Eigen::SparseMatrix<double> op(n, n);
    op.setFromTriplets(triplets.begin(), triplets.end());

    CounterRng rng = make_stream(seed, "reduce:spectral");
    Eigen::MatrixXd basis(n, block);
    for (Eigen::Index j = 0; j < block; ++j)
        for (Eigen::Index i = 0; i < n; ++i) basis(i, j) = rng.normal();

    auto orthonormalize = [&](Eigen::MatrixXd& x) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
        x = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);
    };
    orthonormalize(basis);

    Eigen::VectorXd ritz_values;
    constexpr int kMaxIterations = 1000;
    for (int iter = 1; iter <= kMaxIterations; ++iter) {
        basis = op * basis;
        orthonormalize(basis);
        if (iter % 10 != 0 && iter != kMaxIterations) continue;
        const Eigen::MatrixXd projected = op * basis;
        const Eigen::MatrixXd h = basis.transpose() * projected;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
        if (eig.info() != Eigen::Success) throw NumericalError("Rayleigh-Ritz eigensolve failed");
        // Eigen sorts ascending; we want the largest first.
        const Eigen::MatrixXd vecs = eig.eigenvectors().rowwise().reverse();
        ritz_values = eig.eigenvalues().reverse();
        basis = basis * vecs;
        const Eigen::MatrixXd residual = op * basis - basis * ritz_values.asDiagonal();
        double worst = 0.0;
        for (Eigen::Index j = 0; j <= static_cast<Eigen::Index>(n_components); ++j)
            worst = std::max(worst, residual.col(j).norm());
        if (worst < 1e-6) break;
    }
    if (!basis.allFinite()) throw NumericalError("spectral layout produced non-finite values");

    DenseMatrix out(graph.n, n_components);
    for (std::size_t c = 0; c < n_components; ++c) {
        // Skip the leading (trivial) eigenvector; fix the sign so the largest-magnitude entry is positive.
        Eigen::VectorXd v = basis.col(static_cast<Eigen::Index>(c + 1));
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        for (std::size_t i = 0; i < graph.n; ++i) out(i, c) = v(static_cast<Eigen::Index>(i));
    }
    return out;
}

// ---- layout optimization ----

LayoutEmbedding optimize_layout(const FuzzyGraph& graph, const ReducerConfig& cfg, std::vector<std::string> ids) {
    const std::size_t n = graph.n;
    const std::size_t dim = static_cast<std::size_t>(cfg.n_components);
    if (n == 0 || graph.nnz() == 0) throw NumericalError("optimize_layout: empty graph");
    if (ids.size() != n) throw ConfigError("optimize_layout: id count does not match the graph");
    const CurveParams curve = fit_curve(cfg.min_dist, cfg.spread);
    const int n_epochs = cfg.epochs_for(n);

    CounterRng init_rng = make_stream(cfg.seed, fmt::format("reduce:{}d:init", dim));
    DenseMatrix y;
    try {
        y = spectral_layout(graph, dim, cfg.seed);
        double max_abs = 0.0;
        for (double v : y.values) max_abs = std::max(max_abs, std::abs(v));
        if (max_abs == 0.0) throw NumericalError("degenerate spectral layout");
        for (double& v : y.values) v = v * (10.0 / max_abs) + 1e-4 * init_rng.normal();
    } catch (const NumericalError&) {
        y = DenseMatrix(n, dim);
        for (double& v : y.values) v = init_rng.uniform(-10.0, 10.0);
    }
    for (std::size_t c = 0; c < dim; ++c) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t i = 0; i < n; ++i) {
            lo = std::min(lo, y(i, c));
            hi = std::max(hi, y(i, c));
        }
        const double span = hi - lo;
        for (std::size_t i = 0; i < n; ++i) y(i, c) = span > 0.0 ? 10.0 * (y(i, c) - lo) / span : 5.0;
    }

    // Edge schedule: the heaviest edge is sampled every epoch, others proportionally less often;
    // edges too light to be sampled even once are dropped.
    const double max_w = *std::max_element(graph.weights.begin(), graph.weights.end());
    struct Edge {
        std::uint32_t head, tail;
        double epochs_per_sample;
        double next_sample;
        double epochs_per_negative;
        double next_negative;
    };
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t e = graph.row_ptr[i]; e < graph.row_ptr[i + 1]; ++e) {
            const double w = graph.weights[e];
            if (w < max_w / n_epochs) continue;
            const double eps = max_w / w;
            const double eps_neg = cfg.negative_sample_rate > 0 ? eps / cfg.negative_sample_rate
                                                                : std::numeric_limits<double>::infinity();
            edges.push_back({static_cast<std::uint32_t>(i), graph.cols[e], eps, eps, eps_neg, eps_neg});
        }
    }

    CounterRng rng = make_stream(cfg.seed, fmt::format("reduce:{}d:sgd", dim));
    const double a = curve.a, b = curve.b;
    std::vector<double> delta(dim);
    for (int epoch = 0; epoch < n_epochs; ++epoch) {
        const double alpha = cfg.learning_rate * (1.0 - static_cast<double>(epoch) / n_epochs);
        for (auto& e : edges) {
            if (e.next_sample > epoch) continue;
            auto yi = y.row(e.head);
            auto yj = y.row(e.tail);
            double d2 = squared_euclidean(yi, yj);
            const double attract = attractive_coefficient(d2, a, b);
            for (std::size_t c = 0; c < dim; ++c) {
                const double g = clip(attract * (yi[c] - yj[c]));
                yi[c] += g * alpha;
                yj[c] -= g * alpha;
            }
            e.next_sample += e.epochs_per_sample;

            const auto n_neg = static_cast<int>((epoch - e.next_negative) / e.epochs_per_negative);
            for (int p = 0; p < n_neg; ++p) {
                const auto k = static_cast<std::size_t>(rng.below(n));
                if (k == e.head) continue;
                auto yk = y.row(k);
                d2 = squared_euclidean(yi, yk);
                const double repel = repulsive_coefficient(d2, a, b);
                for (std::size_t c = 0; c < dim; ++c) {
                    const double g = repel > 0.0 ? clip(repel * (yi[c] - yk[c])) : kGradientClip;
                    yi[c] += g * alpha;
                }
            }
            if (n_neg > 0) e.next_negative += n_neg * e.epochs_per_negative;
        }
        for (double v : y.values)
            if (!std::isfinite(v)) throw NumericalError(fmt::format("layout diverged at epoch {}", epoch));
    }

    LayoutEmbedding out;
    out.ids = std::move(ids);
    out.coords = std::move(y);
    out.config = cfg;
    return out;
}

LayoutEmbedding reduce(const EmbeddingMatrix& input, const ReducerConfig& cfg) {
    cfg.validate(input.size());
    const KnnGraph knn = knn_graph(input.rows, static_cast<std::size_t>(cfg.n_neighbors), cfg.metric);
    const FuzzyGraph graph = fuzzy_union(knn, smooth_knn(knn));
    return optimize_layout(graph, cfg, input.ids);
}

std::string layout_provider_name(const ReducerConfig& cfg) {
    return fmt::format("reduce:{}d:{}", cfg.n_components, cfg.seed);
}

EmbeddingMatrix layout_as_matrix(const LayoutEmbedding& layout) {
    return EmbeddingMatrix{layout.ids, layout.coords, layout_provider_name(layout.config)};
}

double trustworthiness(const DenseMatrix& high, const DenseMatrix& low, std::size_t k, Metric high_metric) {
    const std::size_t n = high.rows;
    if (low.rows != n) throw ConfigError("trustworthiness: row counts differ");
    if (2 * n < 3 * k + 2) throw ConfigError("trustworthiness: k too large for the sample");
    const KnnGraph low_knn = knn_graph(low, k, Metric::Euclidean);
    double penalty = 0.0;
    std::vector<std::pair<double, std::uint32_t>> order(n - 1);
    std::vector<std::size_t> rank(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t m = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) order[m++] = {metric_distance(high.row(i), high.row(j), high_metric), static_cast<std::uint32_t>(j)};
        std::sort(order.begin(), order.end());
        for (std::size_t r = 0; r < order.size(); ++r) rank[order[r].second] = r + 1;
        for (auto j : low_knn.neighbors(i))
            if (rank[j] > k) penalty += static_cast<double>(rank[j] - k);
    }
    const double nd = static_cast<double>(n), kd = static_cast<double>(k);
    return 1.0 - 2.0 / (nd * kd * (2.0 * nd - 3.0 * kd - 1.0)) * penalty;
}

}  // namespace salience
