#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cardioprec/precision.hpp"

using namespace cardioprec;

namespace {

ConfidenceInterval ci(double lo, double hi) {
    ConfidenceInterval c;
    c.lo = lo;
    c.hi = hi;
    return c;
}

BiomarkerSamples samples(const std::string& id, Scan scan, Biomarker b, std::vector<double> v) {
    return {id, scan, Method::TTA, b, std::move(v), {}};
}

SubjectPair pair_of(const std::string& id, std::vector<double> a, std::vector<double> b,
                    Biomarker bm = Biomarker::LVEF) {
    return {id, {samples(id, Scan::A, bm, std::move(a)), samples(id, Scan::B, bm, std::move(b))}};
}

SubjectPrecision row(const std::string& id, double diff, double cov, double ciou_v, bool ab, bool ba,
                     bool rejected) {
    SubjectPrecision r;
    r.subject_id = id;
    r.abs_mean_diff = diff;
    r.pairwise_cov = cov;
    r.ciou = ciou_v;
    r.cpp_a_in_b = ab;
    r.cpp_b_in_a = ba;
    r.cpp_frac_a_in_b = ab ? 0.8 : 0.2;
    r.cpp_frac_b_in_a = ba ? 0.6 : 0.0;
    r.test.test = stats::TestKind::PairedT;
    r.test.rejected = rejected;
    return r;
}

}  // namespace

TEST(Ciou, HandComputedOverlap) {
    EXPECT_DOUBLE_EQ(ciou(ci(0, 2), ci(1, 3)), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(ciou(ci(0, 4), ci(1, 2)), 0.25);
    EXPECT_DOUBLE_EQ(ciou(ci(0, 1), ci(0, 1)), 1.0);
    EXPECT_DOUBLE_EQ(ciou(ci(0, 1), ci(2, 3)), 0.0);
    EXPECT_DOUBLE_EQ(ciou(ci(0, 1), ci(1, 2)), 0.0);  // touching
}

TEST(Ciou, ZeroLengthIntervals) {
    EXPECT_DOUBLE_EQ(ciou(ci(5, 5), ci(5, 5)), 1.0);
    EXPECT_DOUBLE_EQ(ciou(ci(5, 5), ci(6, 6)), 0.0);
    EXPECT_DOUBLE_EQ(ciou(ci(5, 5), ci(4, 6)), 0.0);
}

TEST(Ciou, SymmetricAndBounded) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int i = 0; i < 1000; ++i) {
        double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
        const auto x = ci(std::min(a, b), std::max(a, b)), y = ci(std::min(c, d), std::max(c, d));
        const double v = ciou(x, y);
        EXPECT_EQ(v, ciou(y, x));
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        // union written as total span minus the gap
        const double inter = std::max(0.0, std::min(x.hi, y.hi) - std::max(x.lo, y.lo));
        const double uni = std::max(x.hi, y.hi) - std::min(x.lo, y.lo) - std::max(0.0, std::max(x.lo, y.lo) - std::min(x.hi, y.hi));
        EXPECT_NEAR(v, inter / uni, 1e-12);
    }
}

TEST(Cpp, ClosedEndpoints) {
    const auto c = ci(1.0, 2.0);
    EXPECT_TRUE(cpp_direction(1.0, c));
    EXPECT_TRUE(cpp_direction(2.0, c));
    EXPECT_TRUE(cpp_direction(1.5, c));
    EXPECT_FALSE(cpp_direction(std::nextafter(1.0, 0.0), c));
    EXPECT_FALSE(cpp_direction(std::nextafter(2.0, 3.0), c));
    const std::vector<double> v{0.5, 1.0, 1.5, 2.0, 2.5};
    EXPECT_DOUBLE_EQ(cpp_sample_fraction(v, c), 0.6);
    EXPECT_DOUBLE_EQ(cpp_sample_fraction(std::vector<double>{}, c), 0.0);
}

TEST(Cov, PairwiseValue) {
    EXPECT_NEAR(pairwise_cov(60.0, 63.0), 3.449, 1e-3);
    EXPECT_DOUBLE_EQ(pairwise_cov(60.0, 63.0), pairwise_cov(63.0, 60.0));
    EXPECT_DOUBLE_EQ(pairwise_cov(50.0, 50.0), 0.0);
    // equals the Bessel-corrected std of the pair over its mean
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(1, 200);
    for (int i = 0; i < 200; ++i) {
        const double a = u(rng), b = u(rng);
        const auto ms = stats::mean_std(std::vector<double>{a, b});
        EXPECT_NEAR(pairwise_cov(a, b), ms.std / ms.mean * 100.0, 1e-10);
    }
    try {
        pairwise_cov(-1.0, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroPairMean);
    }
}

TEST(CiouThresholds, CountsStrictlyAboveAndMonotone) {
    const std::vector<double> c{0.0, 0.25, 0.3, 0.5, 0.75, 0.9, 1.0, 0.1};
    const auto p = ciou_threshold_percentages(c);
    EXPECT_DOUBLE_EQ(p[0], 100.0 * 7 / 8);
    EXPECT_DOUBLE_EQ(p[1], 100.0 * 5 / 8);
    EXPECT_DOUBLE_EQ(p[2], 100.0 * 3 / 8);
    EXPECT_DOUBLE_EQ(p[3], 100.0 * 2 / 8);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> v(1 + i % 30);
        for (auto& x : v) x = u(rng);
        const auto q = ciou_threshold_percentages(v);
        for (std::size_t k = 1; k < q.size(); ++k) EXPECT_LE(q[k], q[k - 1]);
        EXPECT_GE(q[3], 0.0);
        EXPECT_LE(q[0], 100.0);
    }
}

TEST(SubjectPrecision, ComputesAllFields) {
    const auto p = pair_of("s1", {60, 61, 62, 63, 64}, {62, 63, 64, 65, 67});
    const auto sp = subject_precision(p, Biomarker::LVEF, Method::TTA);
    EXPECT_EQ(sp.n, 5u);
    EXPECT_DOUBLE_EQ(sp.mean_a, 62.0);
    EXPECT_DOUBLE_EQ(sp.mean_b, 64.2);
    EXPECT_NEAR(sp.abs_mean_diff, 2.2, 1e-12);
    EXPECT_DOUBLE_EQ(sp.pairwise_cov, pairwise_cov(62.0, 64.2));
    EXPECT_EQ(sp.ci_a, stats::confidence_interval(std::vector<double>{60, 61, 62, 63, 64}));
    EXPECT_EQ(sp.cpp_a_in_b, sp.ci_b.contains(62.0));
    EXPECT_EQ(sp.cpp_b_in_a, sp.ci_a.contains(64.2));
    EXPECT_DOUBLE_EQ(sp.ciou, ciou(sp.ci_a, sp.ci_b));
    EXPECT_NE(sp.test.test, stats::TestKind::None);
}

TEST(SubjectPrecision, Errors) {
    SubjectPair only_a{"s", {samples("s", Scan::A, Biomarker::LVEF, {1, 2, 3})}};
    try {
        subject_precision(only_a, Biomarker::LVEF, Method::TTA);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingScan);
    }
    try {
        subject_precision(pair_of("s", {1, 2, 3}, {1, 2}), Biomarker::LVEF, Method::TTA);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SampleCountMismatch);
    }
    try {
        subject_precision(pair_of("s7", {-1, 0, 1}, {-2, 0, 2}), Biomarker::LVEF, Method::TTA);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroPairMean);
        EXPECT_NE(std::string(e.what()).find("s7"), std::string::npos);
    }
}

TEST(Aggregate, HandComputedEntry) {
    const std::vector<SubjectPrecision> rows{row("a", 1.0, 3.0, 0.1, true, false, true),
                                             row("b", 2.0, 4.0, 0.6, true, true, false),
                                             row("c", 3.0, 0.0, 0.8, false, true, true),
                                             row("d", 6.0, 5.0, 0.0, true, true, false)};
    const auto e = aggregate_group(rows);
    EXPECT_EQ(e.n_subjects, 4u);
    EXPECT_DOUBLE_EQ(e.diff_mean, 3.0);
    EXPECT_NEAR(e.diff_std, std::sqrt((4.0 + 1.0 + 0.0 + 9.0) / 3.0), 1e-12);
    EXPECT_DOUBLE_EQ(e.cov_percent, 3.0);
    EXPECT_DOUBLE_EQ(e.cpp_a_to_b, 75.0);
    EXPECT_DOUBLE_EQ(e.cpp_b_to_a, 75.0);
    EXPECT_DOUBLE_EQ(e.pdp, 50.0);
    EXPECT_DOUBLE_EQ(e.mean_ciou, 1.5 / 4.0);
    EXPECT_EQ(e.ciou_above, (std::array<double, 4>{75.0, 50.0, 50.0, 25.0}));
    EXPECT_EQ(e.n_paired_t, 4u);

    const auto rms = aggregate_group(rows, {.cov_mode = CovMode::Rms});
    EXPECT_NEAR(rms.cov_percent, std::sqrt((9.0 + 16.0 + 0.0 + 25.0) / 4.0), 1e-12);
    EXPECT_GE(rms.cov_percent, e.cov_percent);

    const auto smp = aggregate_group(rows, {.cpp_mode = CppMode::Samples});
    EXPECT_DOUBLE_EQ(smp.cpp_a_to_b, 100.0 * (0.8 * 3 + 0.2) / 4.0);
    EXPECT_DOUBLE_EQ(smp.cpp_b_to_a, 100.0 * (0.6 * 3) / 4.0);
}

TEST(Aggregate, SingleSubjectHasZeroStd) {
    const std::vector<SubjectPrecision> one{row("a", 2.5, 1.0, 0.5, true, true, false)};
    const auto e = aggregate_group(one);
    EXPECT_DOUBLE_EQ(e.diff_mean, 2.5);
    EXPECT_DOUBLE_EQ(e.diff_std, 0.0);
    EXPECT_THROW(aggregate_group(std::vector<SubjectPrecision>{}), Error);
}

TEST(Aggregate, GroupsInTableOrder) {
    std::vector<SubjectPrecision> rows;
    for (const char* id : {"s1", "s2"})
        for (Biomarker b : {Biomarker::RVEF, Biomarker::LVEF})
            for (Method m : {Method::MCD, Method::DE}) {
                auto r = row(id, 1.0, 1.0, 0.5, true, true, false);
                r.biomarker = b;
                r.method = m;
                rows.push_back(r);
            }
    const auto rep = aggregate(rows, {}, "demo");
    EXPECT_EQ(rep.dataset, "demo");
    EXPECT_EQ(rep.n_subjects, 2u);
    ASSERT_EQ(rep.entries.size(), 4u);
    EXPECT_EQ(rep.entries[0].biomarker, Biomarker::LVEF);
    EXPECT_EQ(rep.entries[0].method, Method::DE);
    EXPECT_EQ(rep.entries[3].biomarker, Biomarker::RVEF);
    EXPECT_EQ(rep.entries[3].method, Method::MCD);
    EXPECT_NE(rep.find(Biomarker::RVEF, Method::DE), nullptr);
    EXPECT_EQ(rep.find(Biomarker::LVM, Method::DE), nullptr);
    for (const auto& e : rep.entries) EXPECT_EQ(e.n_subjects, 2u);
}

TEST(Aggregate, PercentagesWithinRange) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g(60, 2);
    std::vector<SubjectPrecision> rows;
    for (int s = 0; s < 30; ++s) {
        std::vector<double> a(8), b(8);
        for (auto& x : a) x = g(rng);
        for (auto& x : b) x = g(rng) + 0.5;
        rows.push_back(subject_precision(pair_of("s" + std::to_string(s), a, b), Biomarker::LVEF, Method::TTA));
    }
    for (auto cpp : {CppMode::Mean, CppMode::Samples})
        for (auto cov : {CovMode::Pairwise, CovMode::Rms}) {
            const auto e = aggregate_group(rows, {cpp, cov});
            for (double p : {e.cpp_a_to_b, e.cpp_b_to_a, e.pdp, e.ciou_above[0], e.ciou_above[3]}) {
                EXPECT_GE(p, 0.0);
                EXPECT_LE(p, 100.0);
            }
            EXPECT_GE(e.mean_ciou, 0.0);
            EXPECT_LE(e.mean_ciou, 1.0);
            EXPECT_EQ(e.n_paired_t + e.n_wilcoxon + e.n_degenerate, 30u);
        }
}

TEST(Aggregate, ModeParsing) {
    EXPECT_EQ(parse_cpp_mode("samples"), CppMode::Samples);
    EXPECT_EQ(parse_cov_mode("rms"), CovMode::Rms);
    EXPECT_FALSE(parse_cpp_mode("median"));
    EXPECT_FALSE(parse_cov_mode("pooled"));
    EXPECT_EQ(to_string(CovMode::Pairwise), "pairwise");
}
