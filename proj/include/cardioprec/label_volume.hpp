#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cardioprec/error.hpp"

namespace cardioprec {

using Label = std::uint16_t;

struct Dims {
    std::size_t nx = 0, ny = 0, nz = 0;

    std::size_t voxel_count() const noexcept { return nx * ny * nz; }
    friend bool operator==(const Dims&, const Dims&) = default;
};

/// Voxel extent in millimetres along each axis.
struct Spacing {
    double sx = 1.0, sy = 1.0, sz = 1.0;

    double voxel_volume_mm3() const noexcept { return sx * sy * sz; }
    friend bool operator==(const Spacing&, const Spacing&) = default;
};

/// Dense 3D label grid, x fastest, then y, then z. 0 is background.
class LabelVolume {
public:
    LabelVolume() = default;

    LabelVolume(Dims dims, Spacing spacing, std::vector<Label> labels)
        : dims_(dims), spacing_(spacing), labels_(std::move(labels)) {
        if (dims_.nx == 0 || dims_.ny == 0 || dims_.nz == 0)
            throw Error(ErrorCode::LengthMismatch, "dims must be positive");
        if (labels_.size() != dims_.voxel_count())
            throw Error(ErrorCode::LengthMismatch,
                        "labels: expected " + std::to_string(dims_.voxel_count()) + " voxels, got " +
                            std::to_string(labels_.size()));
        for (double s : {spacing_.sx, spacing_.sy, spacing_.sz})
            if (!(std::isfinite(s) && s > 0.0))
                throw Error(ErrorCode::NonPositiveSpacing,
                            "spacing components must be finite and > 0");
    }

    /// All-background volume.
    LabelVolume(Dims dims, Spacing spacing)
        : LabelVolume(dims, spacing, std::vector<Label>(dims.voxel_count(), 0)) {}

    const Dims& dims() const noexcept { return dims_; }
    const Spacing& spacing() const noexcept { return spacing_; }
    std::span<const Label> labels() const noexcept { return labels_; }
    std::span<Label> labels() noexcept { return labels_; }
    std::size_t size() const noexcept { return labels_.size(); }

    std::size_t index(std::size_t x, std::size_t y, std::size_t z) const noexcept {
        return x + dims_.nx * (y + dims_.ny * z);
    }
    Label at(std::size_t x, std::size_t y, std::size_t z) const noexcept {
        return labels_[index(x, y, z)];
    }
    Label& at(std::size_t x, std::size_t y, std::size_t z) noexcept { return labels_[index(x, y, z)]; }

    Label max_label() const noexcept {
        Label m = 0;
        for (Label l : labels_) m = l > m ? l : m;
        return m;
    }

    friend bool operator==(const LabelVolume&, const LabelVolume&) = default;

private:
    Dims dims_;
    Spacing spacing_;
    std::vector<Label> labels_;
};

}  // namespace cardioprec
