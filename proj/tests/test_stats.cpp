#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cardioprec/stats.hpp"
#include "reference_data.hpp"

using namespace cardioprec;
using namespace cardioprec::stats;

namespace {

// Independent oracle: average ranks by O(n^2) counting, then all 2^n sign
// patterns, p = min(1, 2 min(P[T+ <= t], P[T+ >= t])).
double brute_force_wilcoxon_p(const std::vector<double>& d_in) {
    std::vector<double> d;
    for (double v : d_in)
        if (v != 0.0) d.push_back(v);
    const std::size_t n = d.size();
    if (n == 0) return 1.0;
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n; ++i) {
        double less = 0, equal = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (std::fabs(d[j]) < std::fabs(d[i])) ++less;
            if (std::fabs(d[j]) == std::fabs(d[i])) ++equal;
        }
        rank[i] = less + (equal + 1.0) / 2.0;
    }
    double observed = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (d[i] > 0) observed += rank[i];
    std::uint64_t le = 0, ge = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        double t = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask >> i & 1) t += rank[i];
        le += t <= observed;
        ge += t >= observed;
    }
    return std::min(1.0, 2.0 * static_cast<double>(std::min(le, ge)) / std::ldexp(1.0, static_cast<int>(n)));
}

std::vector<double> zeros(std::size_t n) { return std::vector<double>(n, 0.0); }

}  // namespace

// ---------------------------------------------------------------- descriptive

TEST(Descriptive, MeanStd) {
    const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
    const auto [m, s] = mean_std(v);
    EXPECT_DOUBLE_EQ(m, 5.0);
    EXPECT_NEAR(s, std::sqrt(32.0 / 7.0), 1e-15);
    EXPECT_THROW(mean_std(std::vector<double>{1.0}), Error);
}

TEST(Descriptive, CompensatedSumBeatsNaive) {
    std::vector<double> v{1e16, 1.0, -1e16};
    EXPECT_EQ(sum(v), 1.0);
}

// ---------------------------------------------------------------- distributions

TEST(Distributions, TableQuantiles) {
    EXPECT_NEAR(t_quantile(0.975, 9), 2.2622, 1e-4);
    EXPECT_NEAR(t_quantile(0.975, 9), 2.262157162798205, 1e-12);
    EXPECT_NEAR(t_quantile(0.975, 4), 2.7764, 1e-4);
    EXPECT_NEAR(t_quantile(0.995, 19), 2.8609, 1e-4);
    EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
}

TEST(Distributions, TwoSidedTailsMatchReference) {
    struct Case {
        double t, df, p;
    };
    for (const auto& c : {Case{2.2622, 9, 0.04999649931651134}, Case{1.0, 4, 0.373900966300059},
                          Case{3.5, 19, 0.0023953466896828104}, Case{0.3, 2, 0.7924856608401776},
                          Case{-2.0, 7, 0.08561932856297597}})
        EXPECT_NEAR(2.0 * t_upper_tail(std::fabs(c.t), c.df), c.p, 1e-10) << c.t << " " << c.df;
}

// ---------------------------------------------------------------- CI

TEST(ConfidenceInterval, MethodsMatchReference) {
    const std::vector<double> v{10.0, 12.0, 11.5, 9.8, 10.7};
    auto t = confidence_interval(v, 0.95, CiMethod::TMean);
    EXPECT_NEAR(t.lo, 9.625330732261354, 1e-12);
    EXPECT_NEAR(t.hi, 11.974669267738648, 1e-12);
    auto n = confidence_interval(v, 0.95, CiMethod::NormalApprox);
    EXPECT_NEAR(n.lo, 8.945787055238466, 1e-12);
    EXPECT_NEAR(n.hi, 12.654212944761536, 1e-12);
    auto p = confidence_interval(v, 0.95, CiMethod::Percentile);
    EXPECT_NEAR(p.lo, 9.82, 1e-12);
    EXPECT_NEAR(p.hi, 11.95, 1e-12);
    EXPECT_EQ(t.method, CiMethod::TMean);
    EXPECT_EQ(t.level, 0.95);
}

TEST(ConfidenceInterval, ConstantSamplesGiveZeroWidth) {
    const std::vector<double> v(10, 61.25);
    for (auto m : {CiMethod::TMean, CiMethod::NormalApprox, CiMethod::Percentile}) {
        const auto ci = confidence_interval(v, 0.95, m);
        EXPECT_EQ(ci.lo, 61.25);
        EXPECT_EQ(ci.hi, 61.25);
    }
}

TEST(ConfidenceInterval, WidthGrowsWithLevelAndContainsMean) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(60, 3);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> v(10);
        for (auto& x : v) x = g(rng);
        const double m = mean(v);
        for (auto method : {CiMethod::TMean, CiMethod::NormalApprox}) {
            const auto narrow = confidence_interval(v, 0.80, method), wide = confidence_interval(v, 0.99, method);
            EXPECT_LT(narrow.width(), wide.width());
            EXPECT_TRUE(narrow.contains(m));
            EXPECT_NEAR(m - narrow.lo, narrow.hi - m, 1e-9);
        }
    }
}

TEST(ConfidenceInterval, Errors) {
    EXPECT_THROW(confidence_interval(std::vector<double>{1.0}), Error);
    EXPECT_THROW(confidence_interval(std::vector<double>{1.0, 2.0}, 1.0), Error);
    EXPECT_THROW(confidence_interval(std::vector<double>{1.0, 2.0}, 0.0), Error);
    EXPECT_EQ(parse_ci_method("t-mean"), CiMethod::TMean);
    EXPECT_EQ(parse_ci_method("percentile"), CiMethod::Percentile);
    EXPECT_FALSE(parse_ci_method("bootstrap"));
}

// ---------------------------------------------------------------- Shapiro-Wilk

TEST(ShapiroWilk, PublishedReferenceValues) {
    for (const auto& ref : refdata::kPublishedShapiroWilk) {
        const auto r = shapiro_wilk(*ref.data);
        EXPECT_NEAR(r.w, ref.w, 1e-3) << ref.name;
        EXPECT_NEAR(r.p_value, ref.p, 1e-3) << ref.name;
        // the published figures carry 4-5 digits
        EXPECT_NEAR(r.w, ref.w, 6e-6) << ref.name;
        EXPECT_NEAR(r.p_value / ref.p, 1.0, 1e-3) << ref.name;
    }
}

TEST(ShapiroWilk, SmallSamples) {
    // n = 3 has an exact p-value
    const auto r3 = shapiro_wilk(std::vector<double>{1, 2, 4});
    EXPECT_NEAR(r3.w, 0.9642857142857142, 1e-12);
    EXPECT_NEAR(r3.p_value, 0.6368868450289689, 1e-9);
    // equally spaced triple is perfectly "normal"
    const auto eq = shapiro_wilk(std::vector<double>{1, 2, 3});
    EXPECT_NEAR(eq.w, 1.0, 1e-12);
    EXPECT_NEAR(eq.p_value, 1.0, 1e-9);
    // Shapiro & Wilk's weights of 11 men
    const auto w11 = shapiro_wilk(std::vector<double>{148, 154, 158, 160, 161, 162, 166, 170, 182, 195, 236});
    EXPECT_NEAR(w11.w, 0.79, 5e-3);
    EXPECT_NEAR(w11.w, 0.7888146948631716, 1e-6);
    EXPECT_NEAR(w11.p_value, 0.006703814061898823, 1e-6);
}

TEST(ShapiroWilk, InvariantUnderAffineMapsAndOrder) {
    std::mt19937_64 rng(21);
    std::gamma_distribution<double> g(2.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> v(5 + rep % 40);
        for (auto& x : v) x = g(rng);
        const auto base = shapiro_wilk(v);
        EXPECT_GT(base.w, 0.0);
        EXPECT_LE(base.w, 1.0);
        EXPECT_GE(base.p_value, 0.0);
        EXPECT_LE(base.p_value, 1.0);
        std::vector<double> t(v);
        for (auto& x : t) x = 3.0 * x - 7.0;
        std::shuffle(t.begin(), t.end(), rng);
        const auto moved = shapiro_wilk(t);
        EXPECT_NEAR(moved.w, base.w, 1e-12);
        EXPECT_NEAR(moved.p_value, base.p_value, 1e-10);
    }
}

TEST(ShapiroWilk, Errors) {
    EXPECT_THROW(shapiro_wilk(std::vector<double>{1, 2}), Error);
    EXPECT_THROW(shapiro_wilk(std::vector<double>{2, 2, 2, 2}), Error);
}

// ---------------------------------------------------------------- paired t

TEST(PairedT, MatchesReference) {
    const std::vector<double> d{1, 2, 3, 4, 5};
    const auto r = paired_t_test(d, zeros(5));
    EXPECT_EQ(r.test, TestKind::PairedT);
    EXPECT_NEAR(r.statistic, 4.242640687119285, 1e-12);
    EXPECT_NEAR(r.p_value, 0.013235599563682695, 1e-10);
    EXPECT_TRUE(r.rejected);
    EXPECT_FALSE(r.degenerate);

    const std::vector<double> a{10.1, 9.8, 10.5, 10.0, 9.7, 10.3}, b{10.4, 10.0, 10.9, 10.2, 10.1, 10.6};
    const auto r2 = paired_t_test(a, b);
    EXPECT_NEAR(r2.statistic, -8.215838362577443, 1e-9);
    EXPECT_NEAR(r2.p_value, 0.00043497743126480335, 1e-10);
}

TEST(PairedT, CriticalValueSitsAtAlpha) {
    // differences with t exactly t_{0.975,9}: p = 0.05
    const double tc = t_quantile(0.975, 9);
    std::vector<double> base{-1.5, -1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 1.5, 0.0};
    const auto [m0, s0] = mean_std(base);
    std::vector<double> d(base);
    for (auto& x : d) x = x - m0 + tc * s0 / std::sqrt(10.0);
    const auto r = paired_t_test(d, zeros(10));
    EXPECT_NEAR(r.statistic, tc, 1e-9);
    EXPECT_NEAR(r.p_value, 0.05, 1e-9);
}

TEST(PairedT, DegenerateCases) {
    const std::vector<double> a{60.0, 61.0, 62.0, 63.0};
    const auto same = paired_t_test(a, a);
    EXPECT_TRUE(same.degenerate);
    EXPECT_FALSE(same.rejected);
    EXPECT_EQ(same.p_value, 1.0);

    std::vector<double> b(a);
    for (auto& x : b) x += 0.7;  // a - b is constant up to rounding
    const auto shifted = paired_t_test(a, b);
    EXPECT_TRUE(shifted.degenerate);
    EXPECT_TRUE(shifted.rejected);
    EXPECT_EQ(shifted.p_value, 0.0);
    EXPECT_EQ(shifted.statistic, -INFINITY);
    EXPECT_THROW(paired_t_test(std::vector<double>{1.0}, std::vector<double>{2.0}), Error);
    EXPECT_THROW(paired_t_test(a, std::vector<double>{1.0, 2.0}), Error);
}

// ---------------------------------------------------------------- Wilcoxon

TEST(Wilcoxon, ExactMatchesBruteForceEnumeration) {
    std::mt19937_64 rng(1234);
    std::uniform_int_distribution<int> size(3, 12);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> shift(-1.0, 1.0);
    for (int rep = 0; rep < 400; ++rep) {
        const std::size_t n = static_cast<std::size_t>(size(rng));
        std::vector<double> a(n), b(n);
        const double s = shift(rng);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = g(rng) + s;
            b[i] = g(rng);
            // every other case coarsens to provoke ties and zeros
            if (rep % 2) {
                a[i] = std::round(a[i] * 2.0);
                b[i] = std::round(b[i] * 2.0);
            }
        }
        const auto r = wilcoxon_signed_rank(a, b);
        EXPECT_EQ(r.p_value, brute_force_wilcoxon_p(paired_differences(a, b))) << "rep " << rep;
    }
}

TEST(Wilcoxon, KnownExactValues) {
    const std::vector<double> x{1.5, -0.5, 2.0, 3.0, 0.7, -1.2, 2.2, 1.1};
    const auto r = wilcoxon_signed_rank(x, zeros(8));
    EXPECT_EQ(r.statistic, 5.0);
    EXPECT_DOUBLE_EQ(r.p_value, 0.078125);
    // all positive, n = 5: p = 2/32
    const auto all = wilcoxon_signed_rank(std::vector<double>{1, 2, 3, 4, 5}, zeros(5));
    EXPECT_DOUBLE_EQ(all.p_value, 0.0625);
    EXPECT_EQ(all.statistic, 0.0);
}

TEST(Wilcoxon, NormalApproximationMatchesReference) {
    const std::vector<double> d{0.3,  0.6,  0.0,  -0.6, -0.2, -0.7, 0.4, 1.6,  -0.2, -0.3, 0.8,  0.7, 0.4,  -0.6, 0.3,
                                1.0,  -1.0, -0.2, -1.6, -1.0, -1.5, 0.1, -1.0, 0.6,  0.5,  0.1,  -2.2, -0.2, 0.3, 0.4};
    const auto w = wilcoxon_signed_rank(d, zeros(d.size()), 0.05, ZeroMethod::Wilcox);
    EXPECT_EQ(w.statistic, 203.0);
    EXPECT_NEAR(w.p_value, 0.7617820614330209, 1e-9);
    const auto p = wilcoxon_signed_rank(d, zeros(d.size()), 0.05, ZeroMethod::Pratt);
    EXPECT_EQ(p.statistic, 218.0);
    EXPECT_NEAR(p.p_value, 0.7809869978970869, 1e-9);
}

TEST(Wilcoxon, NullCountsSumToAllPatterns) {
    std::vector<std::uint32_t> ranks2{2, 4, 5, 5, 10, 12};
    const auto counts = signed_rank_null_counts(ranks2);
    EXPECT_EQ(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}), 64u);
    // symmetric about half the total
    for (std::size_t s = 0; s < counts.size(); ++s) EXPECT_EQ(counts[s], counts[counts.size() - 1 - s]);
}

TEST(Wilcoxon, ZeroHandling) {
    const std::vector<double> d{0.0, 0.0, 1.0, 2.0, -3.0, 4.0};
    const auto w = signed_ranks(d, ZeroMethod::Wilcox);
    EXPECT_EQ(w.zeros, 2u);
    EXPECT_EQ(w.doubled_ranks, (std::vector<std::uint32_t>{2, 4, 6, 8}));
    const auto p = signed_ranks(d, ZeroMethod::Pratt);
    EXPECT_EQ(p.doubled_ranks, (std::vector<std::uint32_t>{6, 8, 10, 12}));
    const auto all_zero = wilcoxon_signed_rank(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3});
    EXPECT_TRUE(all_zero.degenerate);
    EXPECT_FALSE(all_zero.rejected);
    EXPECT_EQ(all_zero.p_value, 1.0);
}

TEST(Wilcoxon, TiesShareAverageRank) {
    const auto r = signed_ranks(std::vector<double>{1.0, -1.0, 2.0, 2.0, 2.0}, ZeroMethod::Wilcox);
    EXPECT_EQ(r.doubled_ranks, (std::vector<std::uint32_t>{3, 3, 8, 8, 8}));
    EXPECT_DOUBLE_EQ(r.tie_term, (8.0 - 2.0) + (27.0 - 3.0));
}

// ---------------------------------------------------------------- selection

TEST(SelectPairedTest, RoutesByNormalityOfDifferences) {
    // near-normal differences: t-test
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> a(10), b(10);
    for (int i = 0; i < 10; ++i) {
        b[i] = 60.0 + g(rng);
        a[i] = b[i] + 1.0 + 0.2 * g(rng);
    }
    const auto sw = shapiro_wilk(paired_differences(a, b));
    const auto r = select_paired_test(a, b);
    ASSERT_TRUE(r.normality_p);
    EXPECT_EQ(*r.normality_p, sw.p_value);
    EXPECT_EQ(r.test, sw.p_value >= 0.05 ? TestKind::PairedT : TestKind::WilcoxonSignedRank);

    // one wild outlier in the differences: Wilcoxon
    std::vector<double> c{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<double> e{1.1, 2.1, 2.9, 4.05, 4.95, 6.1, 7.0, 8.1, 9.0, 60.0};
    const auto sw2 = shapiro_wilk(paired_differences(c, e));
    ASSERT_LT(sw2.p_value, 0.05);
    const auto r2 = select_paired_test(c, e);
    EXPECT_EQ(r2.test, TestKind::WilcoxonSignedRank);
    EXPECT_EQ(r2.p_value, wilcoxon_signed_rank(c, e).p_value);
}

TEST(SelectPairedTest, ConstantDifferences) {
    const std::vector<double> a{1, 2, 3, 4};
    const auto none = select_paired_test(a, a);
    EXPECT_EQ(none.test, TestKind::None);
    EXPECT_FALSE(none.rejected);
    EXPECT_TRUE(none.degenerate);

    const std::vector<double> b{1.5, 2.5, 3.5, 4.5};
    const auto shifted = select_paired_test(a, b);
    EXPECT_EQ(shifted.test, TestKind::PairedT);
    EXPECT_TRUE(shifted.rejected);
    EXPECT_TRUE(shifted.degenerate);
    EXPECT_THROW(select_paired_test(std::vector<double>{1, 2}, std::vector<double>{1, 3}), Error);
}
