#pragma once

// Manifest -> biomarker samples -> per-subject precision -> dataset report.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "cardioprec/biomarkers.hpp"
#include "cardioprec/error.hpp"
#include "cardioprec/mask_io.hpp"
#include "cardioprec/parallel.hpp"
#include "cardioprec/precision.hpp"
#include "cardioprec/samples_csv.hpp"
#include "cardioprec/volumetry.hpp"

namespace cardioprec {

struct AnalyzeOptions {
    PrecisionOptions precision;
    AggregateOptions aggregation;
    std::size_t threads = 1;
};

struct AnalysisResult {
    std::vector<BiomarkerSamples> samples;
    std::vector<SubjectPrecision> subjects;
    PrecisionReport report;
};

/// Biomarker samples for every subject and method, from masks or from the
/// manifest's precomputed CSV. Order: subject, method, scan, biomarker.
inline std::vector<BiomarkerSamples> collect_samples(const io::DatasetManifest& manifest, std::size_t threads = 1,
                                                     const VolumeLoader& load = io::parse_volume) {
    if (manifest.precomputed_samples) return io::read_samples_csv(*manifest.precomputed_samples);
    std::vector<std::vector<BiomarkerSamples>> per_subject(manifest.subjects.size());
    parallel_for(manifest.subjects.size(), threads, [&](std::size_t s) {
        const auto& subject = manifest.subjects[s];
        for (const auto& [method, _] : subject.a.methods) {
            auto part = derive_samples(subject, method, manifest.label_map, load);
            per_subject[s].insert(per_subject[s].end(), part.begin(), part.end());
        }
    });
    std::vector<BiomarkerSamples> out;
    for (auto& v : per_subject) out.insert(out.end(), v.begin(), v.end());
    return out;
}

/// Rows ordered by subject (first appearance), then biomarker, then method.
inline std::vector<SubjectPrecision> analyze_samples(const std::vector<BiomarkerSamples>& samples,
                                                     const PrecisionOptions& opt = {}, std::size_t threads = 1) {
    const auto pairs = group_by_subject(samples);
    std::vector<std::vector<SubjectPrecision>> per_subject(pairs.size());
    parallel_for(pairs.size(), threads, [&](std::size_t s) {
        const auto& pair = pairs[s];
        for (Biomarker b : kBiomarkers)
            for (Method m : kMethods)
                if (pair.find(Scan::A, m, b) || pair.find(Scan::B, m, b))
                    per_subject[s].push_back(subject_precision(pair, b, m, opt));
    });
    std::vector<SubjectPrecision> out;
    for (auto& v : per_subject) out.insert(out.end(), v.begin(), v.end());
    return out;
}

inline AnalysisResult analyze(const io::DatasetManifest& manifest, const AnalyzeOptions& opt = {}) {
    AnalysisResult r;
    r.samples = collect_samples(manifest, opt.threads);
    if (r.samples.empty()) throw Error(ErrorCode::EmptyDataset, "manifest yields no biomarker samples");
    r.subjects = analyze_samples(r.samples, opt.precision, opt.threads);
    r.report = aggregate(r.subjects, opt.aggregation, manifest.name);
    r.report.precision = opt.precision;
    return r;
}

// ---------------------------------------------------------------- Dice

struct DiceRow {
    std::string subject_id;
    Scan scan;
    Method method;
    Frame frame;
    std::size_t sample_index;
    Structure structure;
    double dice;
};

struct DiceSummary {
    std::vector<DiceRow> rows;
    /// Mean over rows per (frame, structure).
    std::map<std::pair<Frame, Structure>, double> mean_by_frame_structure;
    double mean = 0.0;
};

/// Each prediction sample against the reference mask with the same subject,
/// scan, method (else the reference's first method) and frame. A reference
/// list of length 1 applies to every sample; otherwise lengths must match.
inline DiceSummary compute_dice(const io::DatasetManifest& predictions, const io::DatasetManifest& references,
                                std::size_t threads = 1, const VolumeLoader& load = io::parse_volume) {
    std::map<std::string, const io::SubjectEntry*> ref_by_id;
    for (const auto& s : references.subjects) ref_by_id[s.id] = &s;

    std::vector<std::vector<DiceRow>> per_subject(predictions.subjects.size());
    for (const auto& s : predictions.subjects)
        if (!ref_by_id.contains(s.id))
            throw Error(ErrorCode::KeyMismatch, "subject '" + s.id + "' has no reference segmentation");

    parallel_for(predictions.subjects.size(), threads, [&](std::size_t si) {
        const auto& subject = predictions.subjects[si];
        const auto& ref = *ref_by_id.at(subject.id);
        for (Scan scan : kScans) {
            const auto& ref_methods = ref.scan(scan).methods;
            for (const auto& [method, samples] : subject.scan(scan).methods) {
                const std::string ctx = "subject '" + subject.id + "' scan " + std::string(to_string(scan)) +
                                        " method " + std::string(to_string(method));
                if (ref_methods.empty()) throw Error(ErrorCode::KeyMismatch, ctx + ": reference has no masks for this scan");
                auto it = ref_methods.find(method);
                const auto& ref_samples = it != ref_methods.end() ? it->second : ref_methods.begin()->second;
                for (Frame f : kFrames) {
                    const auto& pred_paths = samples.frame(f);
                    const auto& ref_paths = ref_samples.frame(f);
                    if (ref_paths.size() != 1 && ref_paths.size() != pred_paths.size())
                        throw Error(ErrorCode::KeyMismatch, ctx + ": reference sample count does not match");
                    std::optional<LabelVolume> shared;
                    if (ref_paths.size() == 1) shared = load(ref_paths.front());
                    for (std::size_t i = 0; i < pred_paths.size(); ++i) {
                        const LabelVolume pred = load(pred_paths[i]);
                        const LabelVolume refv = shared ? *shared : load(ref_paths[i]);
                        for (Structure st : kStructures) {
                            try {
                                const double d = dice(pred, refv, predictions.label_map.label(st));
                                per_subject[si].push_back({subject.id, scan, method, f, i, st, d});
                            } catch (const Error& e) {
                                throw e.with_context(ctx + " " + std::string(to_string(f)) + " sample " + std::to_string(i));
                            }
                        }
                    }
                }
            }
        }
    });

    DiceSummary out;
    for (auto& v : per_subject) out.rows.insert(out.rows.end(), v.begin(), v.end());
    if (out.rows.empty()) throw Error(ErrorCode::EmptyDataset, "no prediction masks to score");
    std::map<std::pair<Frame, Structure>, stats::CompensatedSum> sums;
    std::map<std::pair<Frame, Structure>, std::size_t> counts;
    stats::CompensatedSum total;
    for (const auto& r : out.rows) {
        sums[{r.frame, r.structure}].add(r.dice);
        ++counts[{r.frame, r.structure}];
        total.add(r.dice);
    }
    for (const auto& [key, s] : sums) out.mean_by_frame_structure[key] = s.value() / static_cast<double>(counts[key]);
    out.mean = total.value() / static_cast<double>(out.rows.size());
    return out;
}

/// Detail rows, then "*" rows with per-frame/structure means and the overall mean.
inline std::string dice_to_csv(const DiceSummary& d) {
    std::string out = "subject,scan,method,frame,sample_index,structure,dice\n";
    for (const auto& r : d.rows) {
        out += r.subject_id + ',' + std::string(to_string(r.scan)) + ',' + std::string(to_string(r.method)) + ',' +
               std::string(to_string(r.frame)) + ',' + std::to_string(r.sample_index) + ',' +
               std::string(to_string(r.structure)) + ',' + io::format_double(r.dice) + '\n';
    }
    for (const auto& [key, v] : d.mean_by_frame_structure)
        out += "*,*,*," + std::string(to_string(key.first)) + ",*," + std::string(to_string(key.second)) + ',' +
               io::format_double(v) + '\n';
    out += "*,*,*,*,*,*," + io::format_double(d.mean) + '\n';
    return out;
}

}  // namespace cardioprec
