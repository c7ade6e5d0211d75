#pragma once

// Precomputed biomarker samples:
//   subject,scan,method,biomarker,sample_index,value

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "cardioprec/biomarkers.hpp"
#include "cardioprec/error.hpp"
#include "cardioprec/mask_io.hpp"
#include "cardioprec/types.hpp"

namespace cardioprec::io {

inline constexpr std::string_view kSamplesCsvHeader = "subject,scan,method,biomarker,sample_index,value";

inline std::vector<std::string> split_csv_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline void check_csv_field(const std::string& field) {
    if (field.find_first_of(",\"\n\r") != std::string::npos)
        throw Error(ErrorCode::InvalidArgument, "identifier '" + field + "' cannot be written to CSV");
}

inline std::string samples_to_csv(const std::vector<BiomarkerSamples>& samples) {
    std::string out(kSamplesCsvHeader);
    out += '\n';
    for (const auto& s : samples) {
        check_csv_field(s.subject_id);
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            out += s.subject_id;
            out += ',';
            out += to_string(s.scan);
            out += ',';
            out += to_string(s.method);
            out += ',';
            out += to_string(s.biomarker);
            out += ',';
            out += std::to_string(i);
            out += ',';
            out += format_double(s.values[i]);
            out += '\n';
        }
    }
    return out;
}

inline void write_samples_csv(const std::vector<BiomarkerSamples>& samples, const fs::path& path) {
    write_text_file(path, samples_to_csv(samples));
}

/// Parses and validates: contiguous indices 0..N-1, N >= 2, and every
/// (subject, method, biomarker) present in both scans with equal N.
/// Output order: subjects by first appearance, then method, biomarker, scan.
inline std::vector<BiomarkerSamples> parse_samples_csv(std::istream& in, const std::string& source = "samples csv") {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::MalformedCsv, source + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kSamplesCsvHeader)
        throw Error(ErrorCode::MalformedCsv, source + ": header must be '" + std::string(kSamplesCsvHeader) + "'");

    using Key = std::tuple<std::size_t, Method, Biomarker, Scan>;
    std::map<std::string, std::size_t> subject_order;
    std::vector<std::string> subject_ids;
    std::map<Key, std::map<std::size_t, double>> groups;

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        const std::string ctx = source + ":" + std::to_string(lineno);
        if (f.size() != 6) throw Error(ErrorCode::MalformedCsv, ctx + ": expected 6 fields");
        const auto scan = parse_scan(f[1]);
        const auto method = parse_method(f[2]);
        const auto biomarker = parse_biomarker(f[3]);
        if (f[0].empty()) throw Error(ErrorCode::MalformedCsv, ctx + ": empty subject");
        if (!scan) throw Error(ErrorCode::MalformedCsv, ctx + ": scan must be A or B");
        if (!method) throw Error(ErrorCode::MalformedCsv, ctx + ": unknown method '" + f[2] + "'");
        if (!biomarker) throw Error(ErrorCode::MalformedCsv, ctx + ": unknown biomarker '" + f[3] + "'");
        const auto index = detail::parse_number<std::size_t>(f[4]);
        if (!index) throw Error(ErrorCode::MalformedCsv, ctx + ": bad sample_index");
        char* end = nullptr;
        const double value = std::strtod(f[5].c_str(), &end);
        if (f[5].empty() || end != f[5].c_str() + f[5].size() || !std::isfinite(value))
            throw Error(ErrorCode::MalformedCsv, ctx + ": value must be a finite number");
        auto [it, fresh] = subject_order.emplace(f[0], subject_ids.size());
        if (fresh) subject_ids.push_back(f[0]);
        auto& group = groups[{it->second, *method, *biomarker, *scan}];
        if (!group.emplace(*index, value).second)
            throw Error(ErrorCode::MalformedCsv, ctx + ": duplicate sample_index " + f[4]);
    }

    std::vector<BiomarkerSamples> out;
    for (const auto& [key, values] : groups) {
        const auto& [sidx, method, biomarker, scan] = key;
        const std::string ctx = source + ": subject '" + subject_ids[sidx] + "' method " +
                                std::string(to_string(method)) + " " + std::string(to_string(biomarker)) + " scan " +
                                std::string(to_string(scan));
        BiomarkerSamples s{subject_ids[sidx], scan, method, biomarker, {}, {}};
        std::size_t expect = 0;
        for (const auto& [idx, v] : values) {
            if (idx != expect) throw Error(ErrorCode::MalformedCsv, ctx + ": missing sample_index " + std::to_string(expect));
            s.values.push_back(v);
            ++expect;
        }
        if (s.values.size() < 2) throw Error(ErrorCode::SampleCountMismatch, ctx + ": needs at least 2 samples");
        const Scan other = scan == Scan::A ? Scan::B : Scan::A;
        auto partner = groups.find({sidx, method, biomarker, other});
        if (partner == groups.end())
            throw Error(ErrorCode::MissingScan, ctx + ": no samples for scan " + std::string(to_string(other)));
        if (partner->second.size() != values.size())
            throw Error(ErrorCode::SampleCountMismatch, ctx + ": scan A and B sample counts differ");
        flag_implausible(s);
        out.push_back(std::move(s));
    }
    return out;
}

inline std::vector<BiomarkerSamples> read_samples_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MissingFile, "cannot open '" + path.string() + "'");
    return parse_samples_csv(in, path.string());
}

}  // namespace cardioprec::io
