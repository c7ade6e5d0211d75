#pragma once

// Scan-rescan precision metrics: point-estimate agreement (mean difference,
// CoV) and CI-based agreement (CPP, CIoU, PDP).

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "cardioprec/biomarkers.hpp"
#include "cardioprec/error.hpp"
#include "cardioprec/stats.hpp"
#include "cardioprec/types.hpp"

namespace cardioprec {

using stats::ConfidenceInterval;
using stats::TestResult;

/// Length of the intersection over the length of the union. A zero-length
/// union scores 1 for the identical point and 0 otherwise.
inline double ciou(const ConfidenceInterval& a, const ConfidenceInterval& b) noexcept {
    const double inter = std::max(0.0, std::min(a.hi, b.hi) - std::max(a.lo, b.lo));
    const double uni = a.width() + b.width() - inter;
    if (!(uni > 0.0)) return (a.lo == b.lo && a.hi == b.hi) ? 1.0 : 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

/// Closed-interval containment of the source mean in the destination CI.
inline bool cpp_direction(double mean_src, const ConfidenceInterval& ci_dst) noexcept {
    return ci_dst.lo <= mean_src && mean_src <= ci_dst.hi;
}

/// Fraction of the source samples inside the destination CI.
inline double cpp_sample_fraction(std::span<const double> src, const ConfidenceInterval& ci_dst) noexcept {
    if (src.empty()) return 0.0;
    std::size_t inside = 0;
    for (double v : src) inside += cpp_direction(v, ci_dst);
    return static_cast<double>(inside) / static_cast<double>(src.size());
}

/// Two-point sample std over the two-point mean, in percent.
inline double pairwise_cov(double mean_a, double mean_b) {
    const double pair_mean = (mean_a + mean_b) / 2.0;
    if (pair_mean == 0.0) throw Error(ErrorCode::ZeroPairMean, "CoV undefined for a zero pair mean");
    return (std::fabs(mean_a - mean_b) / std::numbers::sqrt2) / pair_mean * 100.0;
}

/// Both scans' samples for one subject, all methods and biomarkers.
struct SubjectPair {
    std::string subject_id;
    std::vector<BiomarkerSamples> samples;

    const BiomarkerSamples* find(Scan scan, Method method, Biomarker biomarker) const noexcept {
        for (const auto& s : samples)
            if (s.scan == scan && s.method == method && s.biomarker == biomarker) return &s;
        return nullptr;
    }
};

/// Groups samples by subject, in order of first appearance.
inline std::vector<SubjectPair> group_by_subject(const std::vector<BiomarkerSamples>& samples) {
    std::vector<SubjectPair> out;
    std::map<std::string, std::size_t> index;
    for (const auto& s : samples) {
        auto [it, fresh] = index.emplace(s.subject_id, out.size());
        if (fresh) out.push_back({s.subject_id, {}});
        out[it->second].samples.push_back(s);
    }
    return out;
}

struct PrecisionOptions {
    stats::CiMethod ci_method = stats::CiMethod::TMean;
    double ci_level = 0.95;
    double alpha = 0.05;
    stats::ZeroMethod zero_method = stats::ZeroMethod::Wilcox;
};

struct SubjectPrecision {
    std::string subject_id;
    Biomarker biomarker = Biomarker::LVEF;
    Method method = Method::DE;
    std::size_t n = 0;
    double mean_a = 0.0, mean_b = 0.0;
    double abs_mean_diff = 0.0;
    double pairwise_cov = 0.0;
    ConfidenceInterval ci_a, ci_b;
    bool cpp_a_in_b = false, cpp_b_in_a = false;
    /// Sample-mode counterparts: fraction of A's samples inside CI_B and vice versa.
    double cpp_frac_a_in_b = 0.0, cpp_frac_b_in_a = 0.0;
    double ciou = 0.0;
    TestResult test;
    std::size_t flagged = 0;

    friend bool operator==(const SubjectPrecision&, const SubjectPrecision&) = default;
};

inline SubjectPrecision subject_precision(const SubjectPair& pair, Biomarker biomarker, Method method,
                                          const PrecisionOptions& opt = {}) {
    const auto* a = pair.find(Scan::A, method, biomarker);
    const auto* b = pair.find(Scan::B, method, biomarker);
    const std::string ctx = "subject '" + pair.subject_id + "' " + std::string(to_string(biomarker)) + " " +
                            std::string(to_string(method));
    if (!a || !b) throw Error(ErrorCode::MissingScan, ctx + ": samples missing for scan " + (a ? "B" : "A"));
    if (a->values.size() != b->values.size())
        throw Error(ErrorCode::SampleCountMismatch, ctx + ": scan A and B sample counts differ");
    try {
        SubjectPrecision sp;
        sp.subject_id = pair.subject_id;
        sp.biomarker = biomarker;
        sp.method = method;
        sp.n = a->values.size();
        sp.mean_a = stats::mean(a->values);
        sp.mean_b = stats::mean(b->values);
        sp.abs_mean_diff = std::fabs(sp.mean_a - sp.mean_b);
        sp.pairwise_cov = pairwise_cov(sp.mean_a, sp.mean_b);
        sp.ci_a = stats::confidence_interval(a->values, opt.ci_level, opt.ci_method);
        sp.ci_b = stats::confidence_interval(b->values, opt.ci_level, opt.ci_method);
        sp.cpp_a_in_b = cpp_direction(sp.mean_a, sp.ci_b);
        sp.cpp_b_in_a = cpp_direction(sp.mean_b, sp.ci_a);
        sp.cpp_frac_a_in_b = cpp_sample_fraction(a->values, sp.ci_b);
        sp.cpp_frac_b_in_a = cpp_sample_fraction(b->values, sp.ci_a);
        sp.ciou = cardioprec::ciou(sp.ci_a, sp.ci_b);
        sp.test = stats::select_paired_test(a->values, b->values, opt.alpha, opt.zero_method);
        sp.flagged = a->flagged.size() + b->flagged.size();
        return sp;
    } catch (const Error& e) {
        throw e.with_context(ctx);
    }
}

// ---------------------------------------------------------------- aggregation

enum class CppMode { Mean, Samples };
enum class CovMode { Pairwise, Rms };

constexpr std::string_view to_string(CppMode m) { return m == CppMode::Mean ? "mean" : "samples"; }
constexpr std::string_view to_string(CovMode m) { return m == CovMode::Pairwise ? "pairwise" : "rms"; }

inline std::optional<CppMode> parse_cpp_mode(std::string_view s) {
    if (s == "mean") return CppMode::Mean;
    if (s == "samples") return CppMode::Samples;
    return std::nullopt;
}
inline std::optional<CovMode> parse_cov_mode(std::string_view s) {
    if (s == "pairwise") return CovMode::Pairwise;
    if (s == "rms") return CovMode::Rms;
    return std::nullopt;
}

inline constexpr std::array<double, 4> kCiouThresholds{0.0, 0.25, 0.50, 0.75};

struct AggregateOptions {
    CppMode cpp_mode = CppMode::Mean;
    CovMode cov_mode = CovMode::Pairwise;
};

/// Dataset-level row for one (biomarker, method). Percentages in [0,100].
struct ReportEntry {
    Biomarker biomarker = Biomarker::LVEF;
    Method method = Method::DE;
    std::size_t n_subjects = 0;
    double diff_mean = 0.0;
    double diff_std = 0.0;  // 0 for a single subject
    double cov_percent = 0.0;
    double cpp_a_to_b = 0.0;
    double cpp_b_to_a = 0.0;
    std::array<double, 4> ciou_above{};  // > 0%, > 25%, > 50%, > 75%
    double mean_ciou = 0.0;
    double pdp = 0.0;
    std::size_t n_paired_t = 0, n_wilcoxon = 0, n_degenerate = 0;

    friend bool operator==(const ReportEntry&, const ReportEntry&) = default;
};

struct PrecisionReport {
    std::string dataset;
    PrecisionOptions precision;
    AggregateOptions aggregation;
    std::size_t n_subjects = 0;
    std::vector<ReportEntry> entries;

    const ReportEntry* find(Biomarker b, Method m) const noexcept {
        for (const auto& e : entries)
            if (e.biomarker == b && e.method == m) return &e;
        return nullptr;
    }
};

inline std::array<double, 4> ciou_threshold_percentages(std::span<const double> cious) {
    std::array<double, 4> out{};
    if (cious.empty()) return out;
    for (std::size_t k = 0; k < kCiouThresholds.size(); ++k) {
        std::size_t above = 0;
        for (double c : cious) above += c > kCiouThresholds[k];
        out[k] = 100.0 * static_cast<double>(above) / static_cast<double>(cious.size());
    }
    return out;
}

/// One entry for a single (biomarker, method) group of subjects.
inline ReportEntry aggregate_group(std::span<const SubjectPrecision> rows, const AggregateOptions& opt = {}) {
    if (rows.empty()) throw Error(ErrorCode::EmptyDataset, "no subjects to aggregate");
    ReportEntry e;
    e.biomarker = rows.front().biomarker;
    e.method = rows.front().method;
    e.n_subjects = rows.size();
    const double n = static_cast<double>(rows.size());

    std::vector<double> diffs, cious;
    stats::CompensatedSum cov, cov_sq, frac_ab, frac_ba, ciou_sum;
    std::size_t in_ab = 0, in_ba = 0, rejected = 0;
    for (const auto& r : rows) {
        diffs.push_back(r.abs_mean_diff);
        cious.push_back(r.ciou);
        ciou_sum.add(r.ciou);
        cov.add(r.pairwise_cov);
        cov_sq.add(r.pairwise_cov * r.pairwise_cov);
        frac_ab.add(r.cpp_frac_a_in_b);
        frac_ba.add(r.cpp_frac_b_in_a);
        in_ab += r.cpp_a_in_b;
        in_ba += r.cpp_b_in_a;
        rejected += r.test.rejected;
        e.n_paired_t += r.test.test == stats::TestKind::PairedT;
        e.n_wilcoxon += r.test.test == stats::TestKind::WilcoxonSignedRank;
        e.n_degenerate += r.test.degenerate;
    }
    if (rows.size() >= 2) {
        const auto ms = stats::mean_std(diffs);
        e.diff_mean = ms.mean;
        e.diff_std = ms.std;
    } else {
        e.diff_mean = diffs.front();
    }
    e.cov_percent = opt.cov_mode == CovMode::Pairwise ? cov.value() / n : std::sqrt(cov_sq.value() / n);
    if (opt.cpp_mode == CppMode::Mean) {
        e.cpp_a_to_b = 100.0 * static_cast<double>(in_ab) / n;
        e.cpp_b_to_a = 100.0 * static_cast<double>(in_ba) / n;
    } else {
        e.cpp_a_to_b = 100.0 * frac_ab.value() / n;
        e.cpp_b_to_a = 100.0 * frac_ba.value() / n;
    }
    e.ciou_above = ciou_threshold_percentages(cious);
    e.mean_ciou = ciou_sum.value() / n;
    e.pdp = 100.0 * static_cast<double>(rejected) / n;
    return e;
}

/// Groups rows by (biomarker, method) in table order and aggregates each.
inline PrecisionReport aggregate(std::span<const SubjectPrecision> rows, const AggregateOptions& opt = {},
                                 std::string dataset = {}) {
    if (rows.empty()) throw Error(ErrorCode::EmptyDataset, "no subject results to aggregate");
    PrecisionReport report;
    report.dataset = std::move(dataset);
    report.aggregation = opt;
    std::map<std::string, int> subjects;
    for (const auto& r : rows) subjects[r.subject_id] = 0;
    report.n_subjects = subjects.size();
    for (Biomarker b : kBiomarkers) {
        for (Method m : kMethods) {
            std::vector<SubjectPrecision> group;
            for (const auto& r : rows)
                if (r.biomarker == b && r.method == m) group.push_back(r);
            if (!group.empty()) report.entries.push_back(aggregate_group(group, opt));
        }
    }
    return report;
}

}  // namespace cardioprec
