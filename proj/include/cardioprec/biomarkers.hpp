#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "cardioprec/error.hpp"
#include "cardioprec/mask_io.hpp"
#include "cardioprec/types.hpp"
#include "cardioprec/volumetry.hpp"

namespace cardioprec {

inline constexpr double kMyocardialDensityGPerMl = 1.05;

/// One value per uncertainty draw; index i pairs with index i of the other scan.
struct BiomarkerSamples {
    std::string subject_id;
    Scan scan = Scan::A;
    Method method = Method::DE;
    Biomarker biomarker = Biomarker::LVEF;
    std::vector<double> values;
    /// Indices of implausible values (EF outside [0,100], zero LVM). Retained.
    std::vector<std::size_t> flagged;

    friend bool operator==(const BiomarkerSamples&, const BiomarkerSamples&) = default;
};

/// (EDV - ESV) / EDV * 100. Negative results are valid output.
inline double ejection_fraction(double edv_ml, double esv_ml) {
    if (!(edv_ml > 0.0))
        throw Error(ErrorCode::DegenerateVolume, "EDV must be > 0 (empty blood pool at ED?)");
    if (!(esv_ml >= 0.0)) throw Error(ErrorCode::DegenerateVolume, "ESV must be >= 0");
    return (edv_ml - esv_ml) / edv_ml * 100.0;
}

inline double lv_mass(double myocardium_ed_ml) {
    if (!(myocardium_ed_ml >= 0.0)) throw Error(ErrorCode::DegenerateVolume, "myocardial volume must be >= 0");
    return myocardium_ed_ml * kMyocardialDensityGPerMl;
}

inline void flag_implausible(BiomarkerSamples& s) {
    s.flagged.clear();
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        const double v = s.values[i];
        const bool bad = s.biomarker == Biomarker::LVM ? v == 0.0 : (v < 0.0 || v > 100.0);
        if (bad) s.flagged.push_back(i);
    }
}

/// LVEF, LVM and RVEF samples for one scan from per-sample ED/ES volumes.
inline std::vector<BiomarkerSamples> biomarkers_from_volumes(const std::string& subject_id, Scan scan,
                                                             Method method,
                                                             const std::vector<FrameVolumes>& ed,
                                                             const std::vector<FrameVolumes>& es) {
    if (ed.size() != es.size())
        throw Error(ErrorCode::SampleCountMismatch, "subject '" + subject_id + "': unequal ED/ES sample counts");
    std::vector<BiomarkerSamples> out;
    for (Biomarker b : kBiomarkers) out.push_back({subject_id, scan, method, b, {}, {}});
    for (std::size_t i = 0; i < ed.size(); ++i) {
        try {
            out[0].values.push_back(ejection_fraction(ed[i].lvbp_ml, es[i].lvbp_ml));
            out[1].values.push_back(lv_mass(ed[i].myocardium_ml));
            out[2].values.push_back(ejection_fraction(ed[i].rvbp_ml, es[i].rvbp_ml));
        } catch (const Error& e) {
            throw e.with_context("subject '" + subject_id + "' scan " + std::string(to_string(scan)) + " method " +
                                 std::string(to_string(method)) + " sample " + std::to_string(i));
        }
    }
    for (auto& s : out) flag_implausible(s);
    return out;
}

using VolumeLoader = std::function<LabelVolume(const std::filesystem::path&)>;

/// Six BiomarkerSamples (three biomarkers, scans A then B) for one subject and
/// method. A failing sample aborts the combination, N never shrinks.
inline std::vector<BiomarkerSamples> derive_samples(const io::SubjectEntry& subject, Method method,
                                                    const io::LabelMap& map,
                                                    const VolumeLoader& load = io::parse_volume) {
    std::vector<BiomarkerSamples> out;
    for (Scan scan : kScans) {
        const auto& methods = subject.scan(scan).methods;
        auto it = methods.find(method);
        if (it == methods.end())
            throw Error(ErrorCode::MissingScan, "subject '" + subject.id + "' scan " + std::string(to_string(scan)) +
                                                    ": no samples for method " + std::string(to_string(method)));
        const auto& fsamp = it->second;
        if (fsamp.ed.size() != fsamp.es.size())
            throw Error(ErrorCode::SampleCountMismatch, "subject '" + subject.id + "': unequal ED/ES sample counts");
        std::vector<FrameVolumes> ed, es;
        for (std::size_t i = 0; i < fsamp.size(); ++i) {
            for (Frame f : kFrames) {
                const auto& path = fsamp.frame(f)[i];
                try {
                    const LabelVolume vol = load(path);
                    io::check_labels(vol, map);
                    (f == Frame::ED ? ed : es).push_back(frame_volumes(vol, map));
                } catch (const Error& e) {
                    throw e.with_context("subject '" + subject.id + "' scan " + std::string(to_string(scan)) +
                                         " method " + std::string(to_string(method)) + " " +
                                         std::string(to_string(f)) + " sample " + std::to_string(i));
                }
            }
        }
        auto part = biomarkers_from_volumes(subject.id, scan, method, ed, es);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

}  // namespace cardioprec
