#pragma once

#include <cstddef>
#include <string>

#include "cardioprec/error.hpp"
#include "cardioprec/label_volume.hpp"
#include "cardioprec/mask_io.hpp"
#include "cardioprec/types.hpp"

namespace cardioprec {

struct StructureVolume {
    Structure structure;
    double volume_ml;
};

inline std::size_t count_label(const LabelVolume& vol, Label label) noexcept {
    std::size_t n = 0;
    for (Label l : vol.labels()) n += (l == label);
    return n;
}

/// Voxel count times voxel volume, in mL. No partial-volume correction.
inline double label_volume_ml(const LabelVolume& vol, Label label) {
    return static_cast<double>(count_label(vol, label)) * vol.spacing().voxel_volume_mm3() / 1000.0;
}

inline StructureVolume structure_volume(const LabelVolume& vol, Structure s, const io::LabelMap& map = {}) {
    return {s, label_volume_ml(vol, map.label(s))};
}

/// Integer-label form; the label must belong to the map.
inline double structure_volume(const LabelVolume& vol, Label label, const io::LabelMap& map) {
    if (!map.contains(label))
        throw Error(ErrorCode::UnknownLabel, "label " + std::to_string(label) + " is not in the label map");
    return label_volume_ml(vol, label);
}

/// All three structure volumes from one pass over the grid.
struct FrameVolumes {
    double lvbp_ml = 0.0;
    double myocardium_ml = 0.0;
    double rvbp_ml = 0.0;
};

inline FrameVolumes frame_volumes(const LabelVolume& vol, const io::LabelMap& map = {}) {
    std::size_t lv = 0, myo = 0, rv = 0;
    for (Label l : vol.labels()) {
        lv += (l == map.lvbp);
        myo += (l == map.myocardium);
        rv += (l == map.rvbp);
    }
    const double v = vol.spacing().voxel_volume_mm3() / 1000.0;
    return {static_cast<double>(lv) * v, static_cast<double>(myo) * v, static_cast<double>(rv) * v};
}

/// 2|A∩B| / (|A|+|B|) over voxels equal to `label`; 1 when both are empty.
inline double dice(const LabelVolume& a, const LabelVolume& b, Label label) {
    if (a.dims() != b.dims())
        throw Error(ErrorCode::DimensionMismatch,
                    "dice: dims (" + std::to_string(a.dims().nx) + "," + std::to_string(a.dims().ny) + "," +
                        std::to_string(a.dims().nz) + ") vs (" + std::to_string(b.dims().nx) + "," +
                        std::to_string(b.dims().ny) + "," + std::to_string(b.dims().nz) + ")");
    std::size_t na = 0, nb = 0, both = 0;
    const auto la = a.labels();
    const auto lb = b.labels();
    for (std::size_t i = 0; i < la.size(); ++i) {
        const bool in_a = la[i] == label;
        const bool in_b = lb[i] == label;
        na += in_a;
        nb += in_b;
        both += in_a && in_b;
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

}  // namespace cardioprec
