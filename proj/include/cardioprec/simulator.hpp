#pragma once

// Synthetic scan-rescan datasets with known ground truth.
//
// A phantom is a pair of concentric ellipsoids (LV myocardium shell around
// the LV blood pool) plus an offset ellipsoid clipped against the LV outer
// wall (RV blood pool). Voxels are labelled by testing their centre point.
//
// Random streams (see rng.hpp), all children of Stream(seed):
//   subject/<s>/phantom                    size scale, LVEF, RVEF targets
//   subject/<s>/between                    scan B replanning perturbation
//   subject/<s>/method/<m>/scan/<A|B>/<i>  within-scan draw i, shared by ED and ES

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cardioprec/biomarkers.hpp"
#include "cardioprec/error.hpp"
#include "cardioprec/label_volume.hpp"
#include "cardioprec/mask_io.hpp"
#include "cardioprec/parallel.hpp"
#include "cardioprec/rng.hpp"
#include "cardioprec/types.hpp"

namespace cardioprec::sim {

namespace fs = std::filesystem;

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(Vec3 a, double k) { return {a.x * k, a.y * k, a.z * k}; }
    friend Vec3 hadamard(Vec3 a, Vec3 b) { return {a.x * b.x, a.y * b.y, a.z * b.z}; }
    double product() const noexcept { return x * y * z; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

struct Ellipsoid {
    Vec3 center;
    Vec3 semi_axes;

    bool contains(Vec3 p) const noexcept {
        const double dx = (p.x - center.x) / semi_axes.x;
        const double dy = (p.y - center.y) / semi_axes.y;
        const double dz = (p.z - center.z) / semi_axes.z;
        return dx * dx + dy * dy + dz * dz <= 1.0;
    }
    double volume_mm3() const noexcept { return 4.0 / 3.0 * std::numbers::pi * semi_axes.product(); }
};

// ---------------------------------------------------------------- phantom

struct PhantomSpec {
    Dims dims{64, 64, 64};
    Spacing spacing{2.0, 2.0, 2.0};
    Vec3 lv_center{64.0, 64.0, 64.0};  // mm, grid frame (voxel i centre at (i+0.5)·s)
    Vec3 lv_outer{38.0, 38.0, 58.0};
    Vec3 lv_inner{30.0, 30.0, 50.0};
    Vec3 rv_center{100.0, 64.0, 64.0};
    Vec3 rv_axes{28.0, 34.0, 44.0};
    /// Per-axis factor applied to the ED cavity semi-axes at ES.
    Vec3 lv_es_scale{1.0, 1.0, 1.0};
    Vec3 rv_es_scale{1.0, 1.0, 1.0};
    io::LabelMap labels;

    Ellipsoid lv_cavity(Frame f) const {
        return {lv_center, f == Frame::ED ? lv_inner : hadamard(lv_inner, lv_es_scale)};
    }
    Ellipsoid lv_wall() const { return {lv_center, lv_outer}; }
    Ellipsoid rv(Frame f) const { return {rv_center, f == Frame::ED ? rv_axes : hadamard(rv_axes, rv_es_scale)}; }

    void validate() const {
        auto positive = [](Vec3 v) { return v.x > 0.0 && v.y > 0.0 && v.z > 0.0; };
        if (!positive(lv_outer) || !positive(lv_inner) || !positive(rv_axes))
            throw Error(ErrorCode::InvalidArgument, "phantom: semi-axes must be positive");
        if (!(lv_inner.x < lv_outer.x && lv_inner.y < lv_outer.y && lv_inner.z < lv_outer.z))
            throw Error(ErrorCode::InvalidArgument, "phantom: inner semi-axes must be strictly inside the outer wall");
        for (Vec3 s : {lv_es_scale, rv_es_scale})
            if (!(positive(s) && s.x <= 1.0 && s.y <= 1.0 && s.z <= 1.0))
                throw Error(ErrorCode::InvalidArgument, "phantom: ES scale factors must be in (0,1]");
        const Vec3 extent{static_cast<double>(dims.nx) * spacing.sx, static_cast<double>(dims.ny) * spacing.sy,
                          static_cast<double>(dims.nz) * spacing.sz};
        auto fits = [&](const Ellipsoid& e, const char* what) {
            const Vec3 lo = e.center - e.semi_axes, hi = e.center + e.semi_axes;
            if (lo.x < 0 || lo.y < 0 || lo.z < 0 || hi.x > extent.x || hi.y > extent.y || hi.z > extent.z)
                throw Error(ErrorCode::ShapeExceedsGrid, std::string("phantom: ") + what + " exceeds the grid");
        };
        fits(lv_wall(), "LV outer wall");
        fits(rv(Frame::ED), "RV");
    }
};

inline Vec3 voxel_center(const Spacing& s, std::size_t x, std::size_t y, std::size_t z) noexcept {
    return {(static_cast<double>(x) + 0.5) * s.sx, (static_cast<double>(y) + 0.5) * s.sy,
            (static_cast<double>(z) + 0.5) * s.sz};
}

/// Label decided by the voxel centre: cavity, else wall, else RV.
inline Label phantom_label_at(const PhantomSpec& spec, Frame frame, Vec3 p) noexcept {
    if (spec.lv_cavity(frame).contains(p)) return spec.labels.lvbp;
    if (spec.lv_wall().contains(p)) return spec.labels.myocardium;
    if (spec.rv(frame).contains(p)) return spec.labels.rvbp;
    return 0;
}

inline LabelVolume generate_phantom(const PhantomSpec& spec, Frame frame) {
    spec.validate();
    LabelVolume vol(spec.dims, spec.spacing);
    for (std::size_t z = 0; z < spec.dims.nz; ++z)
        for (std::size_t y = 0; y < spec.dims.ny; ++y)
            for (std::size_t x = 0; x < spec.dims.nx; ++x)
                vol.at(x, y, z) = phantom_label_at(spec, frame, voxel_center(spec.spacing, x, y, z));
    return vol;
}

struct PhantomTruth {
    double lv_edv_ml, lv_esv_ml, myocardium_ed_ml, rv_edv_ml, rv_esv_ml;
    double lvef, rvef, lvm;
};

/// RV blood pool volume (clipped ellipsoid) by midpoint quadrature on a
/// lattice of the given step over the RV bounding box.
inline double rv_volume_quadrature_ml(const PhantomSpec& spec, Frame frame, double step_mm = 0.5) {
    const Ellipsoid rv = spec.rv(frame);
    const Ellipsoid wall = spec.lv_wall();
    const Vec3 lo = rv.center - rv.semi_axes;
    const auto nx = static_cast<std::size_t>(std::ceil(2.0 * rv.semi_axes.x / step_mm));
    const auto ny = static_cast<std::size_t>(std::ceil(2.0 * rv.semi_axes.y / step_mm));
    const auto nz = static_cast<std::size_t>(std::ceil(2.0 * rv.semi_axes.z / step_mm));
    std::size_t inside = 0;
    for (std::size_t k = 0; k < nz; ++k) {
        const double pz = lo.z + (static_cast<double>(k) + 0.5) * step_mm;
        for (std::size_t j = 0; j < ny; ++j) {
            const double py = lo.y + (static_cast<double>(j) + 0.5) * step_mm;
            for (std::size_t i = 0; i < nx; ++i) {
                const Vec3 p{lo.x + (static_cast<double>(i) + 0.5) * step_mm, py, pz};
                inside += rv.contains(p) && !wall.contains(p);
            }
        }
    }
    return static_cast<double>(inside) * step_mm * step_mm * step_mm / 1000.0;
}

/// Continuous-geometry biomarkers. LV quantities are closed form; the RV
/// crescent uses quadrature.
inline PhantomTruth phantom_truth(const PhantomSpec& spec, double rv_step_mm = 0.5) {
    PhantomTruth t{};
    t.lv_edv_ml = spec.lv_cavity(Frame::ED).volume_mm3() / 1000.0;
    t.lv_esv_ml = spec.lv_cavity(Frame::ES).volume_mm3() / 1000.0;
    t.myocardium_ed_ml = (spec.lv_wall().volume_mm3() - spec.lv_cavity(Frame::ED).volume_mm3()) / 1000.0;
    t.rv_edv_ml = rv_volume_quadrature_ml(spec, Frame::ED, rv_step_mm);
    t.rv_esv_ml = rv_volume_quadrature_ml(spec, Frame::ES, rv_step_mm);
    t.lvef = ejection_fraction(t.lv_edv_ml, t.lv_esv_ml);
    t.rvef = ejection_fraction(t.rv_edv_ml, t.rv_esv_ml);
    t.lvm = lv_mass(t.myocardium_ed_ml);
    return t;
}

/// Isotropic cavity scale giving the requested EF for an unclipped ellipsoid.
inline double es_scale_for_ef(double ef_percent) { return std::cbrt(1.0 - ef_percent / 100.0); }

// ---------------------------------------------------------------- perturbation

struct PerturbationSpec {
    double rotation_deg_max = 10.0;
    /// Fraction of the in-plane area removed by a centred crop.
    double crop_fraction_max = 0.10;
    std::array<double, 2> blur_sigma_range{0.0, 1.0};  // voxels
    /// Per-axis maximum shift; each draw scales it by u in [-1, 1].
    Vec3 translation_mm{0.0, 0.0, 0.0};
    std::uint64_t seed = 0;

    static PerturbationSpec identity() {
        PerturbationSpec p;
        p.rotation_deg_max = 0.0;
        p.crop_fraction_max = 0.0;
        p.blur_sigma_range = {0.0, 0.0};
        return p;
    }

    void validate() const {
        const bool ok = rotation_deg_max >= 0.0 && crop_fraction_max >= 0.0 && crop_fraction_max < 1.0 &&
                        blur_sigma_range[0] >= 0.0 && blur_sigma_range[1] >= blur_sigma_range[0] &&
                        translation_mm.x >= 0.0 && translation_mm.y >= 0.0 && translation_mm.z >= 0.0;
        if (!ok) throw Error(ErrorCode::InvalidArgument, "perturbation: magnitudes must be >= 0 (crop < 1, sigma lo <= hi)");
    }
};

/// Concrete parameters of one perturbation.
struct PerturbationDraw {
    double angle_deg = 0.0;
    Vec3 shift_mm;
    double crop_fraction = 0.0;
    double sigma = 0.0;
};

/// Always consumes six variates so stream positions do not depend on which
/// magnitudes are zero.
inline PerturbationDraw draw_perturbation(const PerturbationSpec& spec, Stream& rng) {
    spec.validate();
    PerturbationDraw d;
    d.angle_deg = rng.uniform(-1.0, 1.0) * spec.rotation_deg_max;
    d.shift_mm.x = rng.uniform(-1.0, 1.0) * spec.translation_mm.x;
    d.shift_mm.y = rng.uniform(-1.0, 1.0) * spec.translation_mm.y;
    d.shift_mm.z = rng.uniform(-1.0, 1.0) * spec.translation_mm.z;
    d.crop_fraction = rng.uniform() * spec.crop_fraction_max;
    d.sigma = rng.uniform(spec.blur_sigma_range[0], spec.blur_sigma_range[1]);
    return d;
}

namespace detail {

// In-plane rotation about the grid centre followed by a shift, nearest
// neighbour. Output voxel p samples the source at R(-θ)(p - c - t) + c.
inline LabelVolume rotate_translate(const LabelVolume& in, double angle_deg, Vec3 shift) {
    const auto& d = in.dims();
    const auto& s = in.spacing();
    const Vec3 c{static_cast<double>(d.nx) * s.sx / 2.0, static_cast<double>(d.ny) * s.sy / 2.0,
                 static_cast<double>(d.nz) * s.sz / 2.0};
    const double th = angle_deg * std::numbers::pi / 180.0;
    const double cs = std::cos(th), sn = std::sin(th);
    LabelVolume out(d, s);
    for (std::size_t z = 0; z < d.nz; ++z) {
        const double sz = (static_cast<double>(z) + 0.5) * s.sz - shift.z;
        const double fz = std::floor(sz / s.sz);
        if (fz < 0 || fz >= static_cast<double>(d.nz)) continue;
        for (std::size_t y = 0; y < d.ny; ++y) {
            const double ry = (static_cast<double>(y) + 0.5) * s.sy - c.y - shift.y;
            for (std::size_t x = 0; x < d.nx; ++x) {
                const double rx = (static_cast<double>(x) + 0.5) * s.sx - c.x - shift.x;
                const double srcx = cs * rx + sn * ry + c.x;
                const double srcy = -sn * rx + cs * ry + c.y;
                const double fx = std::floor(srcx / s.sx), fy = std::floor(srcy / s.sy);
                if (fx < 0 || fy < 0 || fx >= static_cast<double>(d.nx) || fy >= static_cast<double>(d.ny)) continue;
                out.at(x, y, z) = in.at(static_cast<std::size_t>(fx), static_cast<std::size_t>(fy),
                                        static_cast<std::size_t>(fz));
            }
        }
    }
    return out;
}

// Centred in-plane window keeping (1 - fraction) of the area; the rest
// becomes background.
inline void crop_in_plane(LabelVolume& vol, double fraction) {
    const auto& d = vol.dims();
    const double keep = std::sqrt(1.0 - fraction);
    const auto kx = static_cast<std::size_t>(std::lround(keep * static_cast<double>(d.nx)));
    const auto ky = static_cast<std::size_t>(std::lround(keep * static_cast<double>(d.ny)));
    const std::size_t x0 = (d.nx - kx) / 2, y0 = (d.ny - ky) / 2;
    for (std::size_t z = 0; z < d.nz; ++z)
        for (std::size_t y = 0; y < d.ny; ++y)
            for (std::size_t x = 0; x < d.nx; ++x)
                if (x < x0 || x >= x0 + kx || y < y0 || y >= y0 + ky) vol.at(x, y, z) = 0;
}

inline std::vector<float> gaussian_kernel(double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<float> k(2 * radius + 1);
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) total += std::exp(-0.5 * i * i / (sigma * sigma));
    for (int i = -radius; i <= radius; ++i)
        k[i + radius] = static_cast<float>(std::exp(-0.5 * i * i / (sigma * sigma)) / total);
    return k;
}

// Zero-padded separable convolution along one axis (stride in voxels).
inline void convolve_axis(std::vector<float>& data, const Dims& d, int axis, const std::vector<float>& k) {
    const int radius = static_cast<int>(k.size() / 2);
    const std::size_t n[3] = {d.nx, d.ny, d.nz};
    const std::size_t stride[3] = {1, d.nx, d.nx * d.ny};
    const std::size_t len = n[axis];
    std::vector<float> line(len), out(len);
    const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
    for (std::size_t j = 0; j < n[a2]; ++j) {
        for (std::size_t i = 0; i < n[a1]; ++i) {
            const std::size_t base = i * stride[a1] + j * stride[a2];
            bool any = false;
            for (std::size_t t = 0; t < len; ++t) {
                line[t] = data[base + t * stride[axis]];
                any = any || line[t] != 0.0f;
            }
            if (!any) continue;
            for (std::size_t t = 0; t < len; ++t) {
                float acc = 0.0f;
                for (int r = -radius; r <= radius; ++r) {
                    const auto u = static_cast<std::ptrdiff_t>(t) + r;
                    if (u < 0 || u >= static_cast<std::ptrdiff_t>(len)) continue;
                    acc += k[r + radius] * line[static_cast<std::size_t>(u)];
                }
                out[t] = acc;
            }
            for (std::size_t t = 0; t < len; ++t) data[base + t * stride[axis]] = out[t];
        }
    }
}

// Each label's indicator is blurred; a voxel takes the label with the
// largest response when that response reaches 0.5.
inline LabelVolume soft_blur_rethreshold(const LabelVolume& in, double sigma) {
    std::vector<Label> present;
    {
        std::vector<bool> seen(static_cast<std::size_t>(in.max_label()) + 1, false);
        for (Label l : in.labels()) seen[l] = true;
        for (std::size_t l = 1; l < seen.size(); ++l)
            if (seen[l]) present.push_back(static_cast<Label>(l));
    }
    const auto k = gaussian_kernel(sigma);
    std::vector<float> best(in.size(), 0.0f);
    LabelVolume out(in.dims(), in.spacing());
    for (Label l : present) {
        std::vector<float> soft(in.size());
        for (std::size_t i = 0; i < in.size(); ++i) soft[i] = in.labels()[i] == l ? 1.0f : 0.0f;
        for (int axis = 0; axis < 3; ++axis) convolve_axis(soft, in.dims(), axis, k);
        for (std::size_t i = 0; i < in.size(); ++i) {
            if (soft[i] >= 0.5f && soft[i] > best[i]) {
                best[i] = soft[i];
                out.labels()[i] = l;
            }
        }
    }
    return out;
}

}  // namespace detail

/// Rotation + translation, crop, then blur-and-rethreshold. Zero-magnitude
/// steps are skipped, so an all-zero draw is the exact identity.
inline LabelVolume apply_perturbation(const LabelVolume& vol, const PerturbationDraw& d) {
    LabelVolume out = (d.angle_deg != 0.0 || d.shift_mm != Vec3{})
                          ? detail::rotate_translate(vol, d.angle_deg, d.shift_mm)
                          : vol;
    if (d.crop_fraction > 0.0) detail::crop_in_plane(out, d.crop_fraction);
    if (d.sigma > 0.0) out = detail::soft_blur_rethreshold(out, d.sigma);
    return out;
}

inline LabelVolume perturb(const LabelVolume& vol, const PerturbationSpec& spec, Stream& rng) {
    return apply_perturbation(vol, draw_perturbation(spec, rng));
}

/// Uses spec.seed as the stream seed.
inline LabelVolume perturb(const LabelVolume& vol, const PerturbationSpec& spec) {
    Stream rng(spec.seed);
    return perturb(vol, spec, rng);
}

// ---------------------------------------------------------------- scenarios

/// Subject-independent geometry at size scale 1. Subjects scale every
/// length, and the LV-to-RV offset, about the LV centre.
struct PhantomTemplate {
    Dims dims{64, 64, 13};
    Spacing spacing{2.0, 2.0, 8.0};
    Vec3 lv_center{56.0, 64.0, 52.0};
    Vec3 lv_outer{32.0, 32.0, 46.0};
    Vec3 lv_inner{24.0, 24.0, 40.0};
    Vec3 rv_offset{30.0, 0.0, -2.0};
    Vec3 rv_axes{26.0, 34.0, 38.0};
};

struct TargetRanges {
    std::array<double, 2> lvef{55.0, 65.0};
    std::array<double, 2> rvef{50.0, 60.0};
    std::array<double, 2> size_scale{0.92, 1.08};
};

struct MethodConfig {
    Method method = Method::TTA;
    std::size_t samples = 10;
    PerturbationSpec within;
};

struct ScenarioConfig {
    std::string name = "simulated";
    std::size_t n_subjects = 20;
    std::vector<MethodConfig> methods{MethodConfig{}};
    PerturbationSpec between_scan = default_between_scan();
    TargetRanges targets;
    PhantomTemplate geometry;
    fs::path output_dir = "simulated";
    std::uint64_t seed = 1;
    std::size_t threads = 1;

    static PerturbationSpec default_between_scan() {
        PerturbationSpec p = PerturbationSpec::identity();
        p.rotation_deg_max = 3.0;
        p.translation_mm = {2.0, 2.0, 8.0};
        return p;
    }

    /// Sets every method's sample count.
    void set_samples(std::size_t n) {
        for (auto& m : methods) m.samples = n;
    }

    void validate() const {
        if (n_subjects < 1) throw Error(ErrorCode::InvalidArgument, "scenario: n_subjects must be >= 1");
        if (methods.empty()) throw Error(ErrorCode::InvalidArgument, "scenario: at least one method");
        for (const auto& m : methods) {
            if (m.samples < 2) throw Error(ErrorCode::InvalidArgument, "scenario: samples per scan must be >= 2");
            m.within.validate();
        }
        between_scan.validate();
        for (const auto& r : {targets.lvef, targets.rvef, targets.size_scale})
            if (!(r[0] <= r[1])) throw Error(ErrorCode::InvalidArgument, "scenario: target ranges need lo <= hi");
        if (!(targets.lvef[0] >= 0.0 && targets.lvef[1] < 100.0 && targets.rvef[0] >= 0.0 && targets.rvef[1] < 100.0))
            throw Error(ErrorCode::InvalidArgument, "scenario: EF targets must be in [0,100)");
        if (!(targets.size_scale[0] > 0.0)) throw Error(ErrorCode::InvalidArgument, "scenario: size scale must be > 0");
    }
};

/// Draws one subject's phantom from its stream.
inline PhantomSpec subject_phantom(const ScenarioConfig& cfg, Stream rng) {
    const auto& g = cfg.geometry;
    const double scale = rng.uniform(cfg.targets.size_scale[0], cfg.targets.size_scale[1]);
    const double lvef = rng.uniform(cfg.targets.lvef[0], cfg.targets.lvef[1]);
    const double rvef = rng.uniform(cfg.targets.rvef[0], cfg.targets.rvef[1]);
    PhantomSpec p;
    p.dims = g.dims;
    p.spacing = g.spacing;
    p.lv_center = g.lv_center;
    p.lv_outer = g.lv_outer * scale;
    p.lv_inner = g.lv_inner * scale;
    p.rv_center = g.lv_center + g.rv_offset * scale;
    p.rv_axes = g.rv_axes * scale;
    const double kl = es_scale_for_ef(lvef), kr = es_scale_for_ef(rvef);
    p.lv_es_scale = {kl, kl, kl};
    p.rv_es_scale = {kr, kr, kr};
    return p;
}

struct ScenarioResult {
    io::DatasetManifest manifest;
    io::DatasetManifest reference;
    std::vector<std::pair<std::string, PhantomTruth>> truth;
    fs::path manifest_path;
    fs::path reference_path;
    fs::path truth_path;
};

inline std::string subject_id(std::size_t s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "sub%03zu", s + 1);
    return buf;
}

/// Writes CPV1 masks, manifest.json, reference_manifest.json (unperturbed
/// per-scan masks) and ground_truth.json under cfg.output_dir.
inline ScenarioResult generate_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    const fs::path root = cfg.output_dir;
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create '" + root.string() + "': " + ec.message());

    const Stream master(cfg.seed);
    std::vector<io::SubjectEntry> entries(cfg.n_subjects), refs(cfg.n_subjects);
    std::vector<PhantomTruth> truths(cfg.n_subjects);

    parallel_for(cfg.n_subjects, cfg.threads, [&](std::size_t s) {
        const std::string sid = subject_id(s);
        const Stream subj = master.child("subject").child(s);
        const PhantomSpec spec = subject_phantom(cfg, subj.child("phantom"));
        truths[s] = phantom_truth(spec);

        std::map<Frame, LabelVolume> base;
        for (Frame f : kFrames) base.emplace(f, generate_phantom(spec, f));

        // One replanning per subject, shared by both frames of scan B.
        Stream between = subj.child("between");
        const PerturbationDraw replan = draw_perturbation(cfg.between_scan, between);

        io::SubjectEntry entry{sid, {}, {}}, ref{sid, {}, {}};
        for (Scan scan : kScans) {
            std::map<Frame, LabelVolume> scan_base;
            for (Frame f : kFrames)
                scan_base.emplace(f, scan == Scan::A ? base.at(f) : apply_perturbation(base.at(f), replan));

            const fs::path scan_dir = fs::path("masks") / sid / std::string(to_string(scan));
            fs::create_directories(root / scan_dir / "reference");
            io::FrameSamples ref_paths;
            for (Frame f : kFrames) {
                const fs::path rel = scan_dir / "reference" / (std::string(to_string(f)) + ".cpv");
                io::write_volume(scan_base.at(f), root / rel);
                (f == Frame::ED ? ref_paths.ed : ref_paths.es).push_back(root / rel);
            }

            for (const auto& mc : cfg.methods) {
                const fs::path mdir = scan_dir / std::string(to_string(mc.method));
                fs::create_directories(root / mdir);
                const Stream mstream = subj.child("method")
                                           .child(static_cast<std::uint64_t>(mc.method))
                                           .child("scan")
                                           .child(std::string(to_string(scan)));
                io::FrameSamples paths;
                for (std::size_t i = 0; i < mc.samples; ++i) {
                    Stream draw_rng = mstream.child(i);
                    const PerturbationDraw draw = draw_perturbation(mc.within, draw_rng);
                    for (Frame f : kFrames) {
                        char name[32];
                        std::snprintf(name, sizeof name, "%s_%02zu.cpv", std::string(to_string(f)).c_str(), i);
                        const fs::path rel = mdir / name;
                        io::write_volume(apply_perturbation(scan_base.at(f), draw), root / rel);
                        (f == Frame::ED ? paths.ed : paths.es).push_back(root / rel);
                    }
                }
                entry.scan(scan).methods.emplace(mc.method, std::move(paths));
                ref.scan(scan).methods.emplace(mc.method, ref_paths);
            }
        }
        entries[s] = std::move(entry);
        refs[s] = std::move(ref);
    });

    ScenarioResult result;
    result.manifest.name = cfg.name;
    result.manifest.subjects = std::move(entries);
    result.reference.name = cfg.name + "-reference";
    result.reference.subjects = std::move(refs);
    result.manifest_path = root / "manifest.json";
    result.reference_path = root / "reference_manifest.json";
    result.truth_path = root / "ground_truth.json";
    io::write_manifest(result.manifest, result.manifest_path);
    io::write_manifest(result.reference, result.reference_path);

    nlohmann::ordered_json truth_doc = nlohmann::ordered_json::object();
    for (std::size_t s = 0; s < cfg.n_subjects; ++s) {
        const auto& t = truths[s];
        truth_doc[subject_id(s)] = {{"LVEF", t.lvef}, {"RVEF", t.rvef}, {"LVM", t.lvm}};
        result.truth.emplace_back(subject_id(s), t);
    }
    io::write_text_file(result.truth_path, truth_doc.dump(2) + "\n");
    return result;
}

// ---------------------------------------------------------------- config JSON

inline Vec3 vec3_from_json(const nlohmann::json& j, const char* field) {
    if (!j.is_array() || j.size() != 3)
        throw Error(ErrorCode::InvalidArgument, std::string("scenario: '") + field + "' must be [x, y, z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline std::array<double, 2> range_from_json(const nlohmann::json& j, const char* field) {
    if (!j.is_array() || j.size() != 2)
        throw Error(ErrorCode::InvalidArgument, std::string("scenario: '") + field + "' must be [lo, hi]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline PerturbationSpec perturbation_from_json(const nlohmann::json& j, PerturbationSpec p = {}) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "scenario: perturbation must be an object");
    if (j.contains("rotation_deg_max")) p.rotation_deg_max = j.at("rotation_deg_max").get<double>();
    if (j.contains("crop_fraction_max")) p.crop_fraction_max = j.at("crop_fraction_max").get<double>();
    if (j.contains("blur_sigma_range")) p.blur_sigma_range = range_from_json(j.at("blur_sigma_range"), "blur_sigma_range");
    if (j.contains("translation_mm")) p.translation_mm = vec3_from_json(j.at("translation_mm"), "translation_mm");
    if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
    p.validate();
    return p;
}

inline nlohmann::ordered_json perturbation_to_json(const PerturbationSpec& p) {
    return {{"rotation_deg_max", p.rotation_deg_max},
            {"crop_fraction_max", p.crop_fraction_max},
            {"blur_sigma_range", {p.blur_sigma_range[0], p.blur_sigma_range[1]}},
            {"translation_mm", {p.translation_mm.x, p.translation_mm.y, p.translation_mm.z}}};
}

/// Missing keys keep their defaults. Relative output_dir stays relative to
/// the caller's working directory.
inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
    ScenarioConfig cfg;
    try {
        if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "scenario: top level must be an object");
        if (j.contains("name")) cfg.name = j.at("name").get<std::string>();
        if (j.contains("n_subjects")) cfg.n_subjects = j.at("n_subjects").get<std::size_t>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
        const std::size_t samples = j.value("samples_per_scan", std::size_t{10});
        if (j.contains("methods")) {
            cfg.methods.clear();
            for (const auto& [name, mj] : j.at("methods").items()) {
                const auto method = parse_method(name);
                if (!method) throw Error(ErrorCode::InvalidArgument, "scenario: unknown method '" + name + "'");
                MethodConfig mc{*method, mj.value("samples", samples), perturbation_from_json(mj.value("within_scan", nlohmann::json::object()))};
                cfg.methods.push_back(mc);
            }
        } else {
            cfg.methods = {MethodConfig{Method::TTA, samples,
                                        perturbation_from_json(j.value("within_scan", nlohmann::json::object()))}};
        }
        std::sort(cfg.methods.begin(), cfg.methods.end(),
                  [](const MethodConfig& a, const MethodConfig& b) { return a.method < b.method; });
        if (j.contains("between_scan"))
            cfg.between_scan = perturbation_from_json(j.at("between_scan"), ScenarioConfig::default_between_scan());
        if (j.contains("targets")) {
            const auto& t = j.at("targets");
            if (t.contains("lvef")) cfg.targets.lvef = range_from_json(t.at("lvef"), "targets.lvef");
            if (t.contains("rvef")) cfg.targets.rvef = range_from_json(t.at("rvef"), "targets.rvef");
            if (t.contains("size_scale")) cfg.targets.size_scale = range_from_json(t.at("size_scale"), "targets.size_scale");
        }
        if (j.contains("geometry")) {
            const auto& g = j.at("geometry");
            auto& t = cfg.geometry;
            if (g.contains("dims")) {
                const auto d = g.at("dims");
                if (!d.is_array() || d.size() != 3) throw Error(ErrorCode::InvalidArgument, "scenario: geometry.dims must be [nx, ny, nz]");
                t.dims = {d[0].get<std::size_t>(), d[1].get<std::size_t>(), d[2].get<std::size_t>()};
            }
            if (g.contains("spacing")) {
                const Vec3 s = vec3_from_json(g.at("spacing"), "geometry.spacing");
                t.spacing = {s.x, s.y, s.z};
            }
            if (g.contains("lv_center")) t.lv_center = vec3_from_json(g.at("lv_center"), "geometry.lv_center");
            if (g.contains("lv_outer")) t.lv_outer = vec3_from_json(g.at("lv_outer"), "geometry.lv_outer");
            if (g.contains("lv_inner")) t.lv_inner = vec3_from_json(g.at("lv_inner"), "geometry.lv_inner");
            if (g.contains("rv_offset")) t.rv_offset = vec3_from_json(g.at("rv_offset"), "geometry.rv_offset");
            if (g.contains("rv_axes")) t.rv_axes = vec3_from_json(g.at("rv_axes"), "geometry.rv_axes");
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("scenario: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

}  // namespace cardioprec::sim
