#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "cardioprec/error.hpp"

namespace cardioprec::stats {

/// Neumaier-compensated running sum. Order-insensitive to reported precision.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) comp_ += (sum_ - t) + x;
        else comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double sum(std::span<const double> v) noexcept {
    CompensatedSum s;
    for (double x : v) s.add(x);
    return s.value();
}

inline double mean(std::span<const double> v) {
    if (v.empty()) throw Error(ErrorCode::InsufficientSamples, "mean of an empty sample");
    return sum(v) / static_cast<double>(v.size());
}

struct MeanStd {
    double mean;
    double std;  // Bessel-corrected
};

inline MeanStd mean_std(std::span<const double> v) {
    if (v.size() < 2)
        throw Error(ErrorCode::InsufficientSamples,
                    "sample standard deviation needs n >= 2, got " + std::to_string(v.size()));
    const double m = mean(v);
    CompensatedSum ss;
    for (double x : v) ss.add((x - m) * (x - m));
    return {m, std::sqrt(ss.value() / static_cast<double>(v.size() - 1))};
}

inline double normal_quantile(double p) { return boost::math::quantile(boost::math::normal(), p); }
inline double normal_upper_tail(double z) {
    return boost::math::cdf(boost::math::complement(boost::math::normal(), z));
}
inline double t_quantile(double p, double df) { return boost::math::quantile(boost::math::students_t(df), p); }
inline double t_upper_tail(double t, double df) {
    return boost::math::cdf(boost::math::complement(boost::math::students_t(df), t));
}

// ---------------------------------------------------------------- intervals

enum class CiMethod { TMean, NormalApprox, Percentile };

constexpr std::string_view to_string(CiMethod m) {
    switch (m) {
    case CiMethod::TMean: return "t-mean";
    case CiMethod::NormalApprox: return "normal";
    case CiMethod::Percentile: return "percentile";
    }
    return "?";
}

inline std::optional<CiMethod> parse_ci_method(std::string_view s) {
    if (s == "t-mean") return CiMethod::TMean;
    if (s == "normal" || s == "normal-approx") return CiMethod::NormalApprox;
    if (s == "percentile") return CiMethod::Percentile;
    return std::nullopt;
}

struct ConfidenceInterval {
    double lo = 0.0;
    double hi = 0.0;
    double level = 0.95;
    CiMethod method = CiMethod::TMean;

    double width() const noexcept { return hi - lo; }
    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
    friend bool operator==(const ConfidenceInterval&, const ConfidenceInterval&) = default;
};

/// Linear-interpolation quantile (Hyndman-Fan type 7) of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double p) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// t-mean: mean ± t_{(1+L)/2,n-1} s/√n. normal: mean ± z_{(1+L)/2} s.
/// percentile: empirical quantiles at (1∓L)/2.
inline ConfidenceInterval confidence_interval(std::span<const double> values, double level = 0.95,
                                              CiMethod method = CiMethod::TMean) {
    if (values.size() < 2)
        throw Error(ErrorCode::InsufficientSamples, "confidence interval needs n >= 2");
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::InvalidArgument, "CI level must be in (0,1)");
    const auto n = static_cast<double>(values.size());
    const double upper_p = (1.0 + level) / 2.0;
    ConfidenceInterval ci{0.0, 0.0, level, method};
    switch (method) {
    case CiMethod::TMean: {
        const auto [m, s] = mean_std(values);
        const double half = t_quantile(upper_p, n - 1.0) * s / std::sqrt(n);
        ci.lo = m - half;
        ci.hi = m + half;
        break;
    }
    case CiMethod::NormalApprox: {
        const auto [m, s] = mean_std(values);
        const double half = normal_quantile(upper_p) * s;
        ci.lo = m - half;
        ci.hi = m + half;
        break;
    }
    case CiMethod::Percentile: {
        std::vector<double> sorted(values.begin(), values.end());
        std::sort(sorted.begin(), sorted.end());
        ci.lo = quantile_sorted(sorted, (1.0 - level) / 2.0);
        ci.hi = quantile_sorted(sorted, upper_p);
        break;
    }
    }
    // Rounding can break lo <= hi for zero-spread data.
    if (ci.hi < ci.lo) ci.hi = ci.lo;
    return ci;
}

// ---------------------------------------------------------------- Shapiro-Wilk

struct ShapiroWilkResult {
    double w;
    double p_value;
};

namespace detail {

// c0 + c1 x + c2 x^2 + ...
template <std::size_t N>
double poly(const double (&c)[N], double x) noexcept {
    double r = 0.0;
    for (std::size_t i = N; i-- > 0;) r = r * x + c[i];
    return r;
}

}  // namespace detail

/// Shapiro-Wilk W with Royston's AS R94 coefficient and p-value
/// approximations, complete samples 3 <= n <= 5000.
inline ShapiroWilkResult shapiro_wilk(std::span<const double> values) {
    static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
    static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    static constexpr double c3[] = {0.5440, -0.39978, 0.025054, -6.714e-4};
    static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
    static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};
    static constexpr double g[] = {-2.273, 0.459};

    const std::size_t n = values.size();
    if (n < 3 || n > 5000)
        throw Error(ErrorCode::InsufficientSamples, "Shapiro-Wilk needs 3 <= n <= 5000, got " + std::to_string(n));
    std::vector<double> x(values.begin(), values.end());
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (!(range > 0.0)) throw Error(ErrorCode::InsufficientSamples, "Shapiro-Wilk: zero-variance sample");

    const std::size_t half = n / 2;
    const double an = static_cast<double>(n);
    std::vector<double> a(half);
    if (n == 3) {
        a[0] = std::numbers::sqrt2 / 2.0;
    } else {
        const double an25 = an + 0.25;
        std::vector<double> m(half);
        double summ2 = 0.0;
        for (std::size_t i = 0; i < half; ++i) {
            m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / an25);
            summ2 += m[i] * m[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = detail::poly(c1, rsn) - m[0] / ssumm2;
        std::size_t first_plain;
        double fac;
        if (n > 5) {
            const double a2 = -m[1] / ssumm2 + detail::poly(c2, rsn);
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[1] = a2;
            first_plain = 2;
        } else {
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
            first_plain = 1;
        }
        a[0] = a1;
        for (std::size_t i = first_plain; i < half; ++i) a[i] = -m[i] / fac;
    }

    // W is the squared correlation between the ordered sample and the
    // antisymmetric coefficient vector (sum of a^2 over both halves is 1).
    const double lo = x.front();
    CompensatedSum sx;
    for (double v : x) sx.add((v - lo) / range);
    const double xbar = sx.value() / an;
    CompensatedSum ssx, sax;
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = (x[i] - lo) / range - xbar;
        ssx.add(xi * xi);
    }
    for (std::size_t i = 0; i < half; ++i) sax.add(a[i] * ((x[n - 1 - i] - x[i]) / range));
    double w = sax.value() * sax.value() / ssx.value();
    w = std::min(w, 1.0);

    if (n == 3) {
        constexpr double pi6 = 6.0 / std::numbers::pi;
        constexpr double stqr = std::numbers::pi / 3.0;
        w = std::max(w, 0.75);
        return {w, std::clamp(pi6 * (std::asin(std::sqrt(w)) - stqr), 0.0, 1.0)};
    }
    double w1 = std::log(1.0 - w);
    double mu, sigma;
    if (n <= 11) {
        const double gamma = detail::poly(g, an);
        if (w1 >= gamma) return {w, 1e-99};
        w1 = -std::log(gamma - w1);
        mu = detail::poly(c3, an);
        sigma = std::exp(detail::poly(c4, an));
    } else {
        const double xx = std::log(an);
        mu = detail::poly(c5, xx);
        sigma = std::exp(detail::poly(c6, xx));
    }
    if (!std::isfinite(w1)) return {w, 1.0};  // w == 1
    return {w, std::clamp(normal_upper_tail((w1 - mu) / sigma), 0.0, 1.0)};
}

// ---------------------------------------------------------------- paired tests

enum class TestKind { None, PairedT, WilcoxonSignedRank };

constexpr std::string_view to_string(TestKind k) {
    switch (k) {
    case TestKind::None: return "none";
    case TestKind::PairedT: return "paired-t";
    case TestKind::WilcoxonSignedRank: return "wilcoxon-signed-rank";
    }
    return "?";
}

inline std::optional<TestKind> parse_test_kind(std::string_view s) {
    for (TestKind k : {TestKind::None, TestKind::PairedT, TestKind::WilcoxonSignedRank})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

struct TestResult {
    TestKind test = TestKind::None;
    double statistic = 0.0;
    double p_value = 1.0;
    bool rejected = false;
    double alpha = 0.05;
    bool degenerate = false;
    /// Shapiro-Wilk p of the differences when the test was selected by normality.
    std::optional<double> normality_p;

    friend bool operator==(const TestResult&, const TestResult&) = default;
};

inline std::vector<double> paired_differences(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::SampleCountMismatch,
                    "paired samples differ in length (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

/// Rounding-level magnitude for comparisons of differences of a and b.
inline double rounding_tolerance(std::span<const double> a, std::span<const double> b) noexcept {
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::fabs(v));
    for (double v : b) scale = std::max(scale, std::fabs(v));
    return 64.0 * std::numeric_limits<double>::epsilon() * scale;
}

/// Differences whose spread is at rounding level relative to the inputs are
/// treated as constant (b = a + c rarely subtracts to bit-identical values).
inline bool differences_constant(std::span<const double> a, std::span<const double> b, std::span<const double> d) {
    const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    return (*hi - *lo) <= rounding_tolerance(a, b);
}

inline TestResult paired_t_test(std::span<const double> a, std::span<const double> b, double alpha = 0.05) {
    const auto d = paired_differences(a, b);
    if (d.size() < 2) throw Error(ErrorCode::InsufficientSamples, "paired t-test needs n >= 2");
    TestResult r;
    r.test = TestKind::PairedT;
    r.alpha = alpha;
    const auto n = static_cast<double>(d.size());
    const auto [md, sd] = mean_std(d);
    if (sd == 0.0 || differences_constant(a, b, d)) {
        r.degenerate = true;
        if (std::fabs(md) <= rounding_tolerance(a, b)) {
            r.statistic = 0.0;
            r.p_value = 1.0;
            r.rejected = false;
        } else {
            // Deterministic nonzero shift: any continuous test rejects.
            r.statistic = std::copysign(std::numeric_limits<double>::infinity(), md);
            r.p_value = 0.0;
            r.rejected = true;
        }
        return r;
    }
    r.statistic = md / (sd / std::sqrt(n));
    r.p_value = std::min(1.0, 2.0 * t_upper_tail(std::fabs(r.statistic), n - 1.0));
    r.rejected = r.p_value < alpha;
    return r;
}

enum class ZeroMethod { Wilcox, Pratt };

struct SignedRanks {
    /// Doubled ranks (integral even with ties) of the nonzero differences.
    std::vector<std::uint32_t> doubled_ranks;
    std::vector<bool> positive;
    std::size_t zeros = 0;
    /// Sum over tie groups of t^3 - t, for the normal approximation.
    double tie_term = 0.0;
};

/// Ranks |d| with average ranks for ties. Wilcox drops zeros before
/// ranking; Pratt ranks them and then discards them.
inline SignedRanks signed_ranks(std::span<const double> d, ZeroMethod zero_method) {
    std::vector<double> absd;
    std::vector<bool> pos;
    std::size_t zeros = 0;
    for (double v : d) {
        if (v == 0.0) {
            ++zeros;
            if (zero_method == ZeroMethod::Wilcox) continue;
        }
        absd.push_back(std::fabs(v));
        pos.push_back(v > 0.0);
    }
    std::vector<std::size_t> order(absd.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return absd[i] < absd[j]; });

    SignedRanks out;
    out.zeros = zeros;
    std::vector<std::uint32_t> rank2(absd.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && absd[order[j + 1]] == absd[order[i]]) ++j;
        // positions i..j (0-based) share rank ((i+1)+(j+1))/2
        const auto r2 = static_cast<std::uint32_t>(i + j + 2);
        for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = r2;
        const double t = static_cast<double>(j - i + 1);
        if (absd[order[i]] != 0.0) out.tie_term += t * t * t - t;
        i = j + 1;
    }
    for (std::size_t i = 0; i < absd.size(); ++i) {
        if (absd[i] == 0.0) continue;
        out.doubled_ranks.push_back(rank2[i]);
        out.positive.push_back(pos[i]);
    }
    return out;
}

/// Counts of sign assignments by doubled positive-rank sum. Equivalent to
/// enumerating all 2^n patterns; index s holds #patterns with 2·T+ = s.
inline std::vector<std::uint64_t> signed_rank_null_counts(std::span<const std::uint32_t> doubled_ranks) {
    std::uint64_t total = 0;
    for (auto r : doubled_ranks) total += r;
    std::vector<std::uint64_t> counts(total + 1, 0);
    counts[0] = 1;
    std::uint64_t reach = 0;
    for (auto r : doubled_ranks) {
        for (std::uint64_t s = reach + 1; s-- > 0;)
            if (counts[s]) counts[s + r] += counts[s];
        reach += r;
    }
    return counts;
}

inline constexpr std::size_t kWilcoxonExactMaxN = 25;

inline TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b, double alpha = 0.05,
                                       ZeroMethod zero_method = ZeroMethod::Wilcox) {
    const auto d = paired_differences(a, b);
    TestResult r;
    r.test = TestKind::WilcoxonSignedRank;
    r.alpha = alpha;
    const SignedRanks sr = signed_ranks(d, zero_method);
    const std::size_t n = sr.doubled_ranks.size();
    if (n == 0) {
        r.degenerate = true;
        return r;
    }
    std::uint64_t plus2 = 0, total2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        total2 += sr.doubled_ranks[i];
        if (sr.positive[i]) plus2 += sr.doubled_ranks[i];
    }
    r.statistic = static_cast<double>(std::min(plus2, total2 - plus2)) / 2.0;

    if (n <= kWilcoxonExactMaxN) {
        const auto counts = signed_rank_null_counts(sr.doubled_ranks);
        std::uint64_t le = 0, ge = 0;
        for (std::uint64_t s = 0; s < counts.size(); ++s) {
            if (s <= plus2) le += counts[s];
            if (s >= plus2) ge += counts[s];
        }
        const double patterns = std::ldexp(1.0, static_cast<int>(n));
        r.p_value = std::min(1.0, 2.0 * static_cast<double>(std::min(le, ge)) / patterns);
    } else {
        // Normal approximation with tie and continuity corrections.
        const double nn = static_cast<double>(n + (zero_method == ZeroMethod::Pratt ? sr.zeros : 0));
        const double nz = zero_method == ZeroMethod::Pratt ? static_cast<double>(sr.zeros) : 0.0;
        const double mu = (nn * (nn + 1.0) - nz * (nz + 1.0)) / 4.0;
        double var = (nn * (nn + 1.0) * (2.0 * nn + 1.0) - nz * (nz + 1.0) * (2.0 * nz + 1.0)) / 24.0;
        var -= sr.tie_term / 48.0;
        const double tplus = static_cast<double>(plus2) / 2.0;
        const double diff = tplus - mu;
        const double corr = diff > 0.0 ? 0.5 : (diff < 0.0 ? -0.5 : 0.0);
        const double z = std::fabs(diff - corr) / std::sqrt(var);
        r.p_value = std::min(1.0, 2.0 * normal_upper_tail(z));
    }
    r.rejected = r.p_value < alpha;
    return r;
}

/// Normality of the paired differences decides: Shapiro-Wilk p >= alpha
/// runs the paired t-test, otherwise Wilcoxon signed-rank.
inline TestResult select_paired_test(std::span<const double> a, std::span<const double> b, double alpha = 0.05,
                                     ZeroMethod zero_method = ZeroMethod::Wilcox) {
    const auto d = paired_differences(a, b);
    if (d.size() < 3) throw Error(ErrorCode::InsufficientSamples, "paired test selection needs n >= 3");
    if (differences_constant(a, b, d)) {
        // Normality is undefined; the t-test handles both constant cases.
        TestResult r = paired_t_test(a, b, alpha);
        if (!r.rejected) r.test = TestKind::None;
        return r;
    }
    const auto sw = shapiro_wilk(d);
    TestResult r = sw.p_value >= alpha ? paired_t_test(a, b, alpha) : wilcoxon_signed_rank(a, b, alpha, zero_method);
    r.normality_p = sw.p_value;
    return r;
}

}  // namespace cardioprec::stats
