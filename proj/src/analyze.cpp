#include "salience/analyze.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "salience/errors.hpp"

namespace salience {

namespace {

constexpr int kMaxIterations = 100000;
constexpr double kEpsilon = 1e-16;

double log_prefactor(double a, double x) { return a * std::log(x) - x - std::lgamma(a); }

double series_p(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxIterations; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEpsilon) return sum * std::exp(log_prefactor(a, x));
    }
    throw NumericalError(fmt::format("incomplete gamma series did not converge (a={}, x={})", a, x));
}

double continued_fraction_q(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIterations; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEpsilon) return h * std::exp(log_prefactor(a, x));
    }
    throw NumericalError(fmt::format("incomplete gamma continued fraction did not converge (a={}, x={})", a, x));
}

void check_args(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0) || !std::isfinite(a))
        throw NumericalError(fmt::format("incomplete gamma needs a > 0 and x >= 0 (a={}, x={})", a, x));
}

}  // namespace

double gamma_p(double a, double x) {
    check_args(a, x);
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    return x < a + 1.0 ? series_p(a, x) : 1.0 - continued_fraction_q(a, x);
}

double gamma_q(double a, double x) {
    check_args(a, x);
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return x < a + 1.0 ? 1.0 - series_p(a, x) : continued_fraction_q(a, x);
}

GofStat chi_square_gof(std::span<const std::uint64_t> counts, std::optional<std::span<const double>> expected) {
    const std::size_t k = counts.size();
    if (k < 2) throw DegenerateInput("chi-square needs at least 2 categories");
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0,
                                         [](double s, std::uint64_t c) { return s + static_cast<double>(c); });
    if (total == 0.0) throw DegenerateInput("chi-square needs a positive total count");
    GofStat g;
    g.counts.assign(counts.begin(), counts.end());
    if (expected) {
        if (expected->size() != k)
            throw DegenerateInput(fmt::format("expected has {} entries for {} categories", expected->size(), k));
        g.expected.assign(expected->begin(), expected->end());
    } else {
        g.expected.assign(k, total / static_cast<double>(k));
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (!(g.expected[i] > 0.0)) throw DegenerateInput(fmt::format("expected count {} is not positive", i));
        const double diff = static_cast<double>(counts[i]) - g.expected[i];
        g.chi2 += diff * diff / g.expected[i];
    }
    g.df = static_cast<int>(k) - 1;
    g.p_value = gamma_q(g.df / 2.0, g.chi2 / 2.0);
    return g;
}

SalienceTable salience_table_clusters(std::span<const int> issue, std::span<const std::size_t> comment_index,
                                      const Corpus& corpus, const std::vector<std::string>& issue_names) {
    if (issue.size() != comment_index.size()) throw ConfigError("salience_table_clusters: inputs are not aligned");
    SalienceTable table;
    table.method = Method::Cluster;
    table.issues = issue_names;
    for (std::size_t i = 0; i < issue.size(); ++i) {
        if (issue[i] < 0) continue;
        const Comment& c = corpus.comments.at(comment_index[i]);
        table.add({static_cast<std::size_t>(issue[i]), day_index(c.published_at, corpus.window), c.channel}, 1);
    }
    return table;
}

std::vector<std::string> rank_issues(const std::vector<std::string>& issues, std::span<const std::uint64_t> totals) {
    std::vector<std::size_t> order(issues.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return totals[a] != totals[b] ? totals[a] > totals[b] : issues[a] < issues[b];
    });
    std::vector<std::string> out;
    for (auto i : order) out.push_back(issues[i]);
    return out;
}

std::size_t top_k_overlap(std::span<const std::string> a, std::span<const std::string> b, std::size_t k) {
    const std::set<std::string> top_a(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(std::min(k, a.size())));
    std::size_t n = 0;
    for (std::size_t i = 0; i < std::min(k, b.size()); ++i) n += top_a.count(b[i]);
    return n;
}

MethodComparison compare_methods(const SalienceTable& keyword, const SalienceTable& cluster) {
    if (keyword.issues != cluster.issues)
        throw IssueSetMismatch("keyword and cluster tables cover different issue lists");
    MethodComparison m;
    m.issues = keyword.issues;
    m.keyword_totals = keyword.issue_totals();
    m.cluster_totals = cluster.issue_totals();
    m.keyword_ranking = rank_issues(m.issues, m.keyword_totals);
    m.cluster_ranking = rank_issues(m.issues, m.cluster_totals);
    m.top3_overlap = top_k_overlap(m.keyword_ranking, m.cluster_ranking);
    return m;
}

}  // namespace salience
