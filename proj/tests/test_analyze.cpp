#include "doctest.h"

#include <chrono>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "salience/analyze.hpp"
#include "salience/errors.hpp"
#include "salience/random.hpp"

using namespace salience;

namespace {

std::vector<std::uint64_t> u(std::initializer_list<std::uint64_t> v) { return v; }

}  // namespace

TEST_CASE("textbook goodness of fit") {
    const auto c = u({50, 30, 20});
    const auto g = chi_square_gof(c);
    CHECK(std::abs(g.chi2 - 14.0) <= 1e-9);
    CHECK(g.df == 2);
    CHECK(std::abs(g.p_value - std::exp(-7.0)) <= 1e-12);
    CHECK(g.expected == std::vector<double>(3, 100.0 / 3.0));
}

TEST_CASE("uniform counts fit perfectly") {
    const auto c = u({40, 40, 40, 40, 40});
    const auto g = chi_square_gof(c);
    CHECK(g.chi2 == 0.0);
    CHECK(g.p_value == 1.0);
    CHECK(g.df == 4);
}

TEST_CASE("explicit expected counts") {
    const auto c = u({10, 30});
    const std::vector<double> e{20.0, 20.0};
    CHECK(chi_square_gof(c, std::span<const double>(e)).chi2 == doctest::Approx(10.0));
    const std::vector<double> bad{0.0, 40.0};
    CHECK_THROWS_AS(chi_square_gof(c, std::span<const double>(bad)), DegenerateInput);
}

TEST_CASE("degenerate inputs") {
    CHECK_THROWS_AS(chi_square_gof(u({5})), DegenerateInput);
    CHECK_THROWS_AS(chi_square_gof(u({0, 0, 0})), DegenerateInput);
}

TEST_CASE("p-values match the closed-form tail at random points") {
    CounterRng rng(77);
    for (int i = 0; i < 50; ++i) {
        const int df = 1 + static_cast<int>(rng.below(20));
        const double x = 100.0 * rng.uniform01();
        const double want = testing::chi2_sf_oracle(x, df);
        const double got = gamma_q(df / 2.0, x / 2.0);
        INFO("df=" << df << " x=" << x);
        CHECK(std::abs(got - want) <= 1e-9 * want);
    }
}

TEST_CASE("lower incomplete gamma matches the long series") {
    CounterRng rng(78);
    for (int i = 0; i < 50; ++i) {
        const double a = 0.5 + 10.0 * rng.uniform01();
        const double x = 30.0 * rng.uniform01();
        const double want = testing::gamma_p_series(a, x);
        CHECK(gamma_p(a, x) == doctest::Approx(want).epsilon(1e-10));
        CHECK(gamma_p(a, x) + gamma_q(a, x) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("statistic is invariant to category order and scales with the total") {
    const auto a = chi_square_gof(u({12, 40, 7, 25, 16}));
    const auto b = chi_square_gof(u({25, 7, 16, 12, 40}));
    CHECK(a.chi2 == doctest::Approx(b.chi2).epsilon(1e-12));
    CHECK(a.p_value == doctest::Approx(b.p_value).epsilon(1e-12));
    const auto scaled = chi_square_gof(u({36, 120, 21, 75, 48}));
    CHECK(scaled.chi2 == doctest::Approx(3.0 * a.chi2));
}

TEST_CASE("five issues give four degrees of freedom") {
    CHECK(chi_square_gof(u({976, 521, 300, 250, 120})).df == 4);
}

TEST_CASE("ranking and overlap") {
    const std::vector<std::string> issues{"A", "B", "C", "D"};
    const auto r = rank_issues(issues, u({5, 9, 5, 1}));
    CHECK(r == std::vector<std::string>{"B", "A", "C", "D"});
    const std::vector<std::string> other{"C", "D", "B", "A"};
    CHECK(top_k_overlap(r, other) == 2);
    CHECK(top_k_overlap(r, r) == 3);
}

TEST_CASE("cluster salience table and method comparison") {
    using namespace std::chrono;
    Corpus c;
    c.window = {year{2024} / October / 29, year{2024} / November / 5};
    for (int i = 0; i < 4; ++i) {
        Comment m;
        m.comment_id = "c" + std::to_string(i);
        m.video_id = "v";
        m.channel = Channel{i % 2 ? "WSJ" : "NYT"};
        m.author_key = "a";
        m.text = "t";
        m.published_at = parse_rfc3339("2024-10-3" + std::to_string(i % 2) + "T05:00:00Z");
        c.comments.push_back(m);
    }
    const std::vector<std::string> names{"Immigration", "Inflation"};
    const std::vector<int> issue{0, -1, 1, 0};
    const std::vector<std::size_t> index{3, 2, 1, 0};
    const auto t = salience_table_clusters(issue, index, c, names);
    CHECK(t.method == Method::Cluster);
    CHECK(t.issue_totals() == std::vector<std::uint64_t>{2, 1});
    CHECK(t.counts.at(SalienceCell{0, 2, Channel{"WSJ"}}) == 1);
    CHECK(t.counts.at(SalienceCell{1, 2, Channel{"WSJ"}}) == 1);
    CHECK(t.counts.at(SalienceCell{0, 1, Channel{"NYT"}}) == 1);

    SalienceTable kw;
    kw.issues = names;
    kw.add(SalienceCell{1, 0, Channel{"NYT"}}, 7);
    kw.add(SalienceCell{0, 0, Channel{"NYT"}}, 3);
    const auto cmp = compare_methods(kw, t);
    CHECK(cmp.keyword_ranking == std::vector<std::string>{"Inflation", "Immigration"});
    CHECK(cmp.cluster_ranking == std::vector<std::string>{"Immigration", "Inflation"});
    CHECK(cmp.top3_overlap == 2);

    SalienceTable wrong;
    wrong.issues = {"Other"};
    CHECK_THROWS_AS(compare_methods(kw, wrong), IssueSetMismatch);
}

TEST_CASE("p-value falls as the statistic grows") {
    for (int df = 1; df <= 20; ++df) {
        CHECK(gamma_q(df / 2.0, 0.0) == 1.0);
        double last = 1.0;
        for (double x = 0.25; x <= 120.0; x += 0.25) {
            const double p = gamma_q(df / 2.0, x / 2.0);
            CHECK(p <= last);
            last = p;
        }
    }
}

TEST_CASE("ranking comparison examples") {
    const std::vector<std::string> kw{"Immigration", "Identity politics", "Democracy", "Public health", "Inflation"};
    const std::vector<std::string> cl{"Democracy", "Immigration", "Identity politics", "Inflation", "Public health"};
    CHECK(top_k_overlap(kw, cl) == 3);
    const std::vector<std::string> x{"A", "B", "C"}, y{"D", "E", "F"};
    CHECK(top_k_overlap(x, y) == 0);
}
