#pragma once

// Independent reference implementations that the library is checked against.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "salience/keywords.hpp"
#include "salience/textprep.hpp"

namespace salience::testing {

/// Per-issue keyword counts: phrases looked up as joined strings, longest slice first;
/// raw-text patterns found with std::regex.
std::vector<std::uint64_t> keyword_oracle(const std::string& text, const IssueTaxonomy& taxonomy,
                                          const StopwordSet& stopwords);

/// Random comments (1..max_tokens words) drawn from taxonomy words, near misses and filler.
std::vector<std::string> random_keyword_comments(std::size_t n, std::size_t max_tokens, std::uint64_t seed);

/// Chi-square upper tail as an exact finite sum (integer df).
double chi2_sf_oracle(double x, int df);

/// Lower regularized gamma from its power series, 100000 terms.
double gamma_p_series(double a, double x);

/// (a, b) minimizing the squared error of 1 / (1 + a x^(2b)) against the layout target curve,
/// found by Nelder-Mead.
std::array<double, 2> nelder_mead_ab(double min_dist, double spread);

}  // namespace salience::testing
