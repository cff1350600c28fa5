#pragma once

// Cluster-method salience tables, chi-square goodness of fit, and method comparison.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "salience/corpus.hpp"
#include "salience/salience_table.hpp"

namespace salience {

/// Regularized lower and upper incomplete gamma functions, P(a, x) and Q(a, x) = 1 - P(a, x).
/// Series expansion for x < a + 1, Lentz continued fraction otherwise. a > 0, x >= 0.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

struct GofStat {
    double chi2 = 0.0;
    int df = 0;
    double p_value = 1.0;
    std::vector<std::uint64_t> counts;
    std::vector<double> expected;
};

/// Pearson chi-square against `expected` (uniform total / k when absent). Throws
/// DegenerateInput for fewer than 2 categories, a zero total, or a zero expected count.
GofStat chi_square_gof(std::span<const std::uint64_t> counts,
                       std::optional<std::span<const double>> expected = std::nullopt);

/// One comment per labeled point, counted at (issue, day, channel). `issue[i]` is -1 for
/// excluded points; `comment_index[i]` maps point i into corpus.comments.
SalienceTable salience_table_clusters(std::span<const int> issue, std::span<const std::size_t> comment_index,
                                      const Corpus& corpus, const std::vector<std::string>& issue_names);

struct MethodComparison {
    std::vector<std::string> issues;
    std::vector<std::uint64_t> keyword_totals;
    std::vector<std::uint64_t> cluster_totals;
    std::vector<std::string> keyword_ranking;  // descending; ties alphabetical
    std::vector<std::string> cluster_ranking;
    std::size_t top3_overlap = 0;
};

/// Issue names ordered by total descending, ties alphabetical.
std::vector<std::string> rank_issues(const std::vector<std::string>& issues, std::span<const std::uint64_t> totals);

/// Size of the intersection of the first three entries of each ranking.
std::size_t top_k_overlap(std::span<const std::string> a, std::span<const std::string> b, std::size_t k = 3);

/// Throws IssueSetMismatch when the two tables carry different issue lists.
MethodComparison compare_methods(const SalienceTable& keyword, const SalienceTable& cluster);

}  // namespace salience
