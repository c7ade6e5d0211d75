#pragma once

// Report serialization. Dataset-level metrics are rendered to 2 decimals
// with the unrounded value alongside under a "_raw" suffix; per-subject rows
// keep full precision.

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cardioprec/error.hpp"
#include "cardioprec/precision.hpp"
#include "cardioprec/samples_csv.hpp"
#include "cardioprec/types.hpp"

namespace cardioprec::report {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

inline std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", round2(v));
    return buf;
}

inline std::string zero_method_name(stats::ZeroMethod z) { return z == stats::ZeroMethod::Wilcox ? "wilcox" : "pratt"; }

/// (name, value) pairs of one entry's metrics, in column order.
inline std::vector<std::pair<std::string, double>> entry_metrics(const ReportEntry& e) {
    return {{"diff_mean", e.diff_mean},         {"diff_std", e.diff_std},       {"cov_percent", e.cov_percent},
            {"cpp_a_to_b", e.cpp_a_to_b},       {"cpp_b_to_a", e.cpp_b_to_a},   {"ciou_gt_0", e.ciou_above[0]},
            {"ciou_gt_25", e.ciou_above[1]},    {"ciou_gt_50", e.ciou_above[2]}, {"ciou_gt_75", e.ciou_above[3]},
            {"mean_ciou_percent", 100.0 * e.mean_ciou}, {"pdp", e.pdp}};
}

inline ordered_json report_to_json(const PrecisionReport& r) {
    ordered_json doc;
    doc["dataset"] = r.dataset;
    doc["n_subjects"] = r.n_subjects;
    doc["settings"] = {{"ci_method", std::string(stats::to_string(r.precision.ci_method))},
                       {"ci_level", r.precision.ci_level},
                       {"alpha", r.precision.alpha},
                       {"wilcoxon_zero_method", zero_method_name(r.precision.zero_method)},
                       {"cpp_mode", std::string(to_string(r.aggregation.cpp_mode))},
                       {"cov_mode", std::string(to_string(r.aggregation.cov_mode))}};
    ordered_json results = ordered_json::array();
    for (const auto& e : r.entries) {
        ordered_json row;
        row["biomarker"] = std::string(to_string(e.biomarker));
        row["method"] = std::string(to_string(e.method));
        row["n_subjects"] = e.n_subjects;
        for (const auto& [name, v] : entry_metrics(e)) {
            row[name] = round2(v);
            row[name + "_raw"] = v;
        }
        row["tests"] = {{"paired_t", e.n_paired_t}, {"wilcoxon", e.n_wilcoxon}, {"degenerate", e.n_degenerate}};
        results.push_back(row);
    }
    doc["results"] = results;
    return doc;
}

inline std::string report_to_csv(const PrecisionReport& r) {
    std::ostringstream out;
    out << "biomarker,method,n_subjects";
    const ReportEntry dummy;
    for (const auto& [name, _] : entry_metrics(dummy)) out << ',' << name;
    for (const auto& [name, _] : entry_metrics(dummy)) out << ',' << name << "_raw";
    out << ",n_paired_t,n_wilcoxon,n_degenerate\n";
    for (const auto& e : r.entries) {
        out << to_string(e.biomarker) << ',' << to_string(e.method) << ',' << e.n_subjects;
        const auto metrics = entry_metrics(e);
        for (const auto& [_, v] : metrics) out << ',' << fixed2(v);
        for (const auto& [_, v] : metrics) out << ',' << io::format_double(v);
        out << ',' << e.n_paired_t << ',' << e.n_wilcoxon << ',' << e.n_degenerate << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------- per-subject CSV

inline constexpr std::string_view kSubjectCsvHeader =
    "subject,biomarker,method,n,mean_a,mean_b,abs_mean_diff,pairwise_cov,ci_method,ci_level,"
    "ci_a_lo,ci_a_hi,ci_b_lo,ci_b_hi,cpp_a_in_b,cpp_b_in_a,cpp_frac_a_in_b,cpp_frac_b_in_a,ciou,"
    "test,statistic,p_value,normality_p,alpha,rejected,degenerate,flagged";

inline std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return io::format_double(v);
}

inline std::string subjects_to_csv(const std::vector<SubjectPrecision>& rows) {
    std::string out(kSubjectCsvHeader);
    out += '\n';
    for (const auto& r : rows) {
        io::check_csv_field(r.subject_id);
        const std::vector<std::string> f{
            r.subject_id,
            std::string(to_string(r.biomarker)),
            std::string(to_string(r.method)),
            std::to_string(r.n),
            num(r.mean_a),
            num(r.mean_b),
            num(r.abs_mean_diff),
            num(r.pairwise_cov),
            std::string(stats::to_string(r.ci_a.method)),
            num(r.ci_a.level),
            num(r.ci_a.lo),
            num(r.ci_a.hi),
            num(r.ci_b.lo),
            num(r.ci_b.hi),
            r.cpp_a_in_b ? "1" : "0",
            r.cpp_b_in_a ? "1" : "0",
            num(r.cpp_frac_a_in_b),
            num(r.cpp_frac_b_in_a),
            num(r.ciou),
            std::string(stats::to_string(r.test.test)),
            num(r.test.statistic),
            num(r.test.p_value),
            r.test.normality_p ? num(*r.test.normality_p) : "",
            num(r.test.alpha),
            r.test.rejected ? "1" : "0",
            r.test.degenerate ? "1" : "0",
            std::to_string(r.flagged),
        };
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (i) out += ',';
            out += f[i];
        }
        out += '\n';
    }
    return out;
}

inline std::vector<SubjectPrecision> parse_subjects_csv(std::istream& in, const std::string& source = "subjects csv") {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::MalformedCsv, source + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kSubjectCsvHeader) throw Error(ErrorCode::MalformedCsv, source + ": unexpected header");

    std::vector<SubjectPrecision> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = io::split_csv_line(line);
        const std::string ctx = source + ":" + std::to_string(lineno);
        if (f.size() != 27) throw Error(ErrorCode::MalformedCsv, ctx + ": expected 27 fields, got " + std::to_string(f.size()));
        auto real = [&](std::size_t i) {
            char* end = nullptr;
            const double v = std::strtod(f[i].c_str(), &end);
            if (f[i].empty() || end != f[i].c_str() + f[i].size())
                throw Error(ErrorCode::MalformedCsv, ctx + ": field " + std::to_string(i + 1) + " is not a number");
            return v;
        };
        auto flag = [&](std::size_t i) {
            if (f[i] != "0" && f[i] != "1")
                throw Error(ErrorCode::MalformedCsv, ctx + ": field " + std::to_string(i + 1) + " must be 0 or 1");
            return f[i] == "1";
        };
        auto count = [&](std::size_t i) {
            const auto v = io::detail::parse_number<std::size_t>(f[i]);
            if (!v) throw Error(ErrorCode::MalformedCsv, ctx + ": field " + std::to_string(i + 1) + " must be a count");
            return *v;
        };
        SubjectPrecision r;
        r.subject_id = f[0];
        const auto b = parse_biomarker(f[1]);
        const auto m = parse_method(f[2]);
        const auto cim = stats::parse_ci_method(f[8]);
        const auto test = stats::parse_test_kind(f[19]);
        if (f[0].empty() || !b || !m || !cim || !test)
            throw Error(ErrorCode::MalformedCsv, ctx + ": bad subject/biomarker/method/ci_method/test field");
        r.biomarker = *b;
        r.method = *m;
        r.n = count(3);
        r.mean_a = real(4);
        r.mean_b = real(5);
        r.abs_mean_diff = real(6);
        r.pairwise_cov = real(7);
        const double level = real(9);
        r.ci_a = {real(10), real(11), level, *cim};
        r.ci_b = {real(12), real(13), level, *cim};
        r.cpp_a_in_b = flag(14);
        r.cpp_b_in_a = flag(15);
        r.cpp_frac_a_in_b = real(16);
        r.cpp_frac_b_in_a = real(17);
        r.ciou = real(18);
        if (!(r.ciou >= 0.0 && r.ciou <= 1.0)) throw Error(ErrorCode::MalformedCsv, ctx + ": ciou outside [0,1]");
        r.test.test = *test;
        r.test.statistic = real(20);
        r.test.p_value = real(21);
        if (!f[22].empty()) r.test.normality_p = real(22);
        r.test.alpha = real(23);
        r.test.rejected = flag(24);
        r.test.degenerate = flag(25);
        r.flagged = count(26);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::vector<SubjectPrecision> read_subjects_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MissingFile, "cannot open '" + path.string() + "'");
    return parse_subjects_csv(in, path.string());
}

// ---------------------------------------------------------------- CIoU bar chart

/// Per (biomarker, method): percent of subjects with CIoU above each threshold.
inline ordered_json ciou_plot_data(const std::vector<SubjectPrecision>& rows) {
    if (rows.empty()) throw Error(ErrorCode::EmptyDataset, "no subject rows");
    ordered_json doc;
    doc["thresholds"] = {">0%", ">25%", ">50%", ">75%"};
    ordered_json series = ordered_json::array();
    for (Biomarker b : kBiomarkers) {
        for (Method m : kMethods) {
            std::vector<double> cious;
            for (const auto& r : rows)
                if (r.biomarker == b && r.method == m) cious.push_back(r.ciou);
            if (cious.empty()) continue;
            const auto pct = ciou_threshold_percentages(cious);
            ordered_json rounded = ordered_json::array(), raw = ordered_json::array();
            for (double p : pct) {
                rounded.push_back(round2(p));
                raw.push_back(p);
            }
            series.push_back({{"biomarker", std::string(to_string(b))},
                              {"method", std::string(to_string(m))},
                              {"n_subjects", cious.size()},
                              {"percent", rounded},
                              {"percent_raw", raw}});
        }
    }
    doc["series"] = series;
    return doc;
}

}  // namespace cardioprec::report
