#pragma once

// Volume and manifest ingestion.
//
// Two volume formats are read: CPV1 (native, written by write_volume) and a
// subset of single-file NIfTI-1 (uncompressed, integer voxel types, 3D).

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cardioprec/error.hpp"
#include "cardioprec/label_volume.hpp"
#include "cardioprec/types.hpp"

namespace cardioprec::io {

namespace fs = std::filesystem;

inline std::vector<std::byte> read_file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MissingFile, "cannot open '" + path.string() + "'");
    in.seekg(0, std::ios::end);
    const auto size = static_cast<std::size_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    std::vector<std::byte> bytes(size);
    if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size)))
        throw Error(ErrorCode::Io, "failed reading '" + path.string() + "'");
    return bytes;
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view token) {
    T value{};
    const char* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return value;
}

template <typename T>
T load_scalar(std::span<const std::byte> bytes, std::size_t offset, bool swap) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<std::byte, sizeof(T)> raw;
    std::memcpy(raw.data(), bytes.data() + offset, sizeof(T));
    if (swap) std::reverse(raw.begin(), raw.end());
    T value;
    std::memcpy(&value, raw.data(), sizeof(T));
    return value;
}

}  // namespace detail

// ---------------------------------------------------------------- CPV1

inline constexpr std::string_view kCpv1Magic = "CPV1";

/// Parses an in-memory CPV1 image. The payload must be exactly
/// nx*ny*nz little-endian values of the declared dtype.
inline LabelVolume parse_cpv1(std::span<const std::byte> bytes) {
    std::size_t pos = 0;
    auto next_line = [&](std::string_view field) -> std::string_view {
        const auto* begin = reinterpret_cast<const char*>(bytes.data());
        std::string_view rest(begin + pos, bytes.size() - pos);
        const auto nl = rest.find('\n');
        if (nl == std::string_view::npos || nl > 256)
            throw Error(ErrorCode::MalformedHeader, "missing '" + std::string(field) + "' line");
        pos += nl + 1;
        auto line = rest.substr(0, nl);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        return line;
    };

    if (next_line("CPV1") != kCpv1Magic)
        throw Error(ErrorCode::MalformedHeader, "magic: first line must be 'CPV1'");

    auto dims_tok = detail::split_ws(next_line("dims"));
    if (dims_tok.size() != 4 || dims_tok[0] != "dims")
        throw Error(ErrorCode::MalformedHeader, "dims: expected 'dims nx ny nz'");
    std::array<std::size_t, 3> n{};
    for (int i = 0; i < 3; ++i) {
        auto v = detail::parse_number<std::size_t>(dims_tok[i + 1]);
        if (!v || *v == 0)
            throw Error(ErrorCode::MalformedHeader,
                        "dims: '" + std::string(dims_tok[i + 1]) + "' is not a positive integer");
        n[i] = *v;
    }

    auto sp_tok = detail::split_ws(next_line("spacing"));
    if (sp_tok.size() != 4 || sp_tok[0] != "spacing")
        throw Error(ErrorCode::MalformedHeader, "spacing: expected 'spacing sx sy sz'");
    std::array<double, 3> s{};
    for (int i = 0; i < 3; ++i) {
        auto v = detail::parse_number<double>(sp_tok[i + 1]);
        if (!v) throw Error(ErrorCode::MalformedHeader, "spacing: '" + std::string(sp_tok[i + 1]) + "' is not a number");
        if (!(std::isfinite(*v) && *v > 0.0))
            throw Error(ErrorCode::NonPositiveSpacing,
                        "spacing: component " + std::to_string(i) + " must be finite and > 0");
        s[i] = *v;
    }

    auto dt_tok = detail::split_ws(next_line("dtype"));
    if (dt_tok.size() != 2 || dt_tok[0] != "dtype")
        throw Error(ErrorCode::MalformedHeader, "dtype: expected 'dtype u8|u16'");
    std::size_t width = 0;
    if (dt_tok[1] == "u8") width = 1;
    else if (dt_tok[1] == "u16") width = 2;
    else throw Error(ErrorCode::UnsupportedDataType, "dtype: '" + std::string(dt_tok[1]) + "'");

    if (next_line("end") != "end") throw Error(ErrorCode::MalformedHeader, "end: expected 'end'");

    const Dims dims{n[0], n[1], n[2]};
    const std::size_t count = dims.voxel_count();
    if (count / n[0] / n[1] != n[2] || count > (std::size_t{1} << 40))
        throw Error(ErrorCode::MalformedHeader, "dims: voxel count overflows");
    const std::size_t payload = bytes.size() - pos;
    if (payload != count * width)
        throw Error(ErrorCode::LengthMismatch, "payload: header declares " + std::to_string(count) +
                                                   " voxels (" + std::to_string(count * width) +
                                                   " bytes), file has " + std::to_string(payload));

    std::vector<Label> labels(count);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
    if (width == 1) {
        for (std::size_t i = 0; i < count; ++i) labels[i] = p[i];
    } else {
        for (std::size_t i = 0; i < count; ++i)
            labels[i] = static_cast<Label>(p[2 * i] | (p[2 * i + 1] << 8));
    }
    return LabelVolume(dims, Spacing{s[0], s[1], s[2]}, std::move(labels));
}

inline std::string format_double(double v) {
    std::array<char, 64> buf;
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

inline std::vector<std::byte> encode_cpv1(const LabelVolume& vol) {
    const bool wide = vol.max_label() > 0xFF;
    std::ostringstream header;
    const auto& d = vol.dims();
    const auto& s = vol.spacing();
    header << kCpv1Magic << '\n'
           << "dims " << d.nx << ' ' << d.ny << ' ' << d.nz << '\n'
           << "spacing " << format_double(s.sx) << ' ' << format_double(s.sy) << ' '
           << format_double(s.sz) << '\n'
           << "dtype " << (wide ? "u16" : "u8") << '\n'
           << "end\n";
    const std::string h = header.str();
    std::vector<std::byte> out(h.size() + vol.size() * (wide ? 2 : 1));
    std::memcpy(out.data(), h.data(), h.size());
    auto* p = reinterpret_cast<unsigned char*>(out.data() + h.size());
    const auto labels = vol.labels();
    if (wide) {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            p[2 * i] = static_cast<unsigned char>(labels[i] & 0xFF);
            p[2 * i + 1] = static_cast<unsigned char>(labels[i] >> 8);
        }
    } else {
        for (std::size_t i = 0; i < labels.size(); ++i) p[i] = static_cast<unsigned char>(labels[i]);
    }
    return out;
}

/// Writes CPV1. Uses u8 payload unless a label exceeds 255.
inline void write_volume(const LabelVolume& vol, const fs::path& path) {
    const auto bytes = encode_cpv1(vol);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------- NIfTI-1

/// Reads the supported NIfTI-1 subset. Orientation is ignored; the affine
/// only contributes voxel spacing (sform column norms when sform_code > 0,
/// otherwise pixdim[1..3]).
inline LabelVolume parse_nifti1(std::span<const std::byte> bytes) {
    constexpr std::size_t kHeaderSize = 348;
    if (bytes.size() >= 2 && bytes[0] == std::byte{0x1f} && bytes[1] == std::byte{0x8b})
        throw Error(ErrorCode::UnsupportedDataType, "compression: gzip-compressed NIfTI is not supported");
    if (bytes.size() < kHeaderSize + 4)
        throw Error(ErrorCode::MalformedHeader, "sizeof_hdr: file shorter than a NIfTI-1 header");

    bool swap = false;
    if (detail::load_scalar<std::int32_t>(bytes, 0, false) != 348) {
        if (detail::load_scalar<std::int32_t>(bytes, 0, true) != 348)
            throw Error(ErrorCode::MalformedHeader, "sizeof_hdr: expected 348");
        swap = true;
    }
    auto i16 = [&](std::size_t off) { return detail::load_scalar<std::int16_t>(bytes, off, swap); };
    auto f32 = [&](std::size_t off) { return detail::load_scalar<float>(bytes, off, swap); };

    const auto* magic = reinterpret_cast<const char*>(bytes.data() + 344);
    if (std::memcmp(magic, "n+1\0", 4) != 0)
        throw Error(ErrorCode::MalformedHeader, "magic: only single-file 'n+1' NIfTI-1 is supported");

    const int ndim = i16(40);
    if (ndim < 3 || ndim > 7) throw Error(ErrorCode::MalformedHeader, "dim[0]: expected 3..7, got " + std::to_string(ndim));
    std::array<std::size_t, 3> n{};
    for (int i = 1; i <= 3; ++i) {
        const int d = i16(40 + 2 * i);
        if (d <= 0) throw Error(ErrorCode::MalformedHeader, "dim[" + std::to_string(i) + "]: must be positive");
        n[i - 1] = static_cast<std::size_t>(d);
    }
    for (int i = 4; i <= ndim; ++i)
        if (i16(40 + 2 * i) > 1)
            throw Error(ErrorCode::MalformedHeader, "dim[" + std::to_string(i) + "]: multi-frame volumes are not supported");

    const int datatype = i16(70);
    std::size_t width = 0;
    bool is_signed = false;
    switch (datatype) {
    case 2: width = 1; break;                    // uint8
    case 256: width = 1; is_signed = true; break;  // int8
    case 4: width = 2; is_signed = true; break;    // int16
    case 512: width = 2; break;                  // uint16
    case 8: width = 4; is_signed = true; break;    // int32
    case 768: width = 4; break;                  // uint32
    default:
        throw Error(ErrorCode::UnsupportedDataType, "datatype: code " + std::to_string(datatype) +
                                                        " (integer label types only)");
    }

    const float slope = f32(112), inter = f32(116);
    if (!((slope == 0.0f || slope == 1.0f) && inter == 0.0f))
        throw Error(ErrorCode::UnsupportedDataType, "scl_slope/scl_inter: scaled label data is not supported");

    std::array<double, 3> s{};
    if (i16(254) > 0) {
        for (int c = 0; c < 3; ++c) {
            double sum = 0.0;
            for (int r = 0; r < 3; ++r) {
                const double v = f32(280 + 16 * r + 4 * c);
                sum += v * v;
            }
            s[c] = std::sqrt(sum);
        }
    } else {
        for (int i = 0; i < 3; ++i) s[i] = std::fabs(static_cast<double>(f32(80 + 4 * i)));
    }
    for (int i = 0; i < 3; ++i)
        if (!(std::isfinite(s[i]) && s[i] > 0.0))
            throw Error(ErrorCode::NonPositiveSpacing, "pixdim[" + std::to_string(i + 1) + "]: must be finite and > 0");

    const float vox_offset = f32(108);
    if (!(vox_offset >= 352.0f) || vox_offset != std::floor(vox_offset))
        throw Error(ErrorCode::MalformedHeader, "vox_offset: must be an integer >= 352");
    const auto offset = static_cast<std::size_t>(vox_offset);

    const Dims dims{n[0], n[1], n[2]};
    const std::size_t count = dims.voxel_count();
    if (offset > bytes.size() || (bytes.size() - offset) / width < count)
        throw Error(ErrorCode::LengthMismatch, "payload: header declares " + std::to_string(count) +
                                                   " voxels, file is truncated");

    std::vector<Label> labels(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t at = offset + i * width;
        std::int64_t v = 0;
        if (width == 1) {
            v = is_signed ? static_cast<std::int64_t>(static_cast<std::int8_t>(bytes[at]))
                          : static_cast<std::int64_t>(static_cast<std::uint8_t>(bytes[at]));
        } else if (width == 2) {
            v = is_signed ? detail::load_scalar<std::int16_t>(bytes, at, swap)
                          : detail::load_scalar<std::uint16_t>(bytes, at, swap);
        } else {
            v = is_signed ? detail::load_scalar<std::int32_t>(bytes, at, swap)
                          : detail::load_scalar<std::uint32_t>(bytes, at, swap);
        }
        if (v < 0 || v > 0xFFFF)
            throw Error(ErrorCode::InvalidLabel, "voxel " + std::to_string(i) + ": value " +
                                                     std::to_string(v) + " is not a label");
        labels[i] = static_cast<Label>(v);
    }
    return LabelVolume(dims, Spacing{s[0], s[1], s[2]}, std::move(labels));
}

/// Dispatches on content: CPV1 magic, else NIfTI-1.
inline LabelVolume parse_volume(const fs::path& path) {
    const auto bytes = read_file_bytes(path);
    try {
        if (bytes.size() >= 5 && std::memcmp(bytes.data(), "CPV1\n", 5) == 0) return parse_cpv1(bytes);
        if (bytes.size() >= 6 && std::memcmp(bytes.data(), "CPV1\r\n", 6) == 0) return parse_cpv1(bytes);
        return parse_nifti1(bytes);
    } catch (const Error& e) {
        throw e.with_context(path.string());
    }
}

// ---------------------------------------------------------------- manifest

struct LabelMap {
    Label lvbp = 1;
    Label myocardium = 2;
    Label rvbp = 3;

    Label label(Structure s) const noexcept {
        switch (s) {
        case Structure::LVBP: return lvbp;
        case Structure::Myocardium: return myocardium;
        case Structure::RVBP: return rvbp;
        }
        return 0;
    }
    bool contains(Label l) const noexcept { return l == lvbp || l == myocardium || l == rvbp; }

    friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

/// Throws InvalidLabel when the volume carries a value outside {0} and the map.
inline void check_labels(const LabelVolume& vol, const LabelMap& map) {
    for (std::size_t i = 0; i < vol.size(); ++i) {
        const Label l = vol.labels()[i];
        if (l != 0 && !map.contains(l))
            throw Error(ErrorCode::InvalidLabel,
                        "voxel " + std::to_string(i) + ": label " + std::to_string(l) + " not in label map");
    }
}

struct FrameSamples {
    std::vector<fs::path> ed;
    std::vector<fs::path> es;

    const std::vector<fs::path>& frame(Frame f) const { return f == Frame::ED ? ed : es; }
    std::size_t size() const noexcept { return ed.size(); }
    friend bool operator==(const FrameSamples&, const FrameSamples&) = default;
};

struct ScanEntry {
    std::map<Method, FrameSamples> methods;
    friend bool operator==(const ScanEntry&, const ScanEntry&) = default;
};

struct SubjectEntry {
    std::string id;
    ScanEntry a;
    ScanEntry b;

    const ScanEntry& scan(Scan s) const noexcept { return s == Scan::A ? a : b; }
    ScanEntry& scan(Scan s) noexcept { return s == Scan::A ? a : b; }
    friend bool operator==(const SubjectEntry&, const SubjectEntry&) = default;
};

struct DatasetManifest {
    std::string name;
    LabelMap label_map;
    std::vector<SubjectEntry> subjects;
    std::optional<fs::path> precomputed_samples;

    /// Methods with mask samples for at least one subject, in canonical order.
    std::vector<Method> methods() const {
        std::set<Method> seen;
        for (const auto& s : subjects)
            for (const auto& [m, _] : s.a.methods) seen.insert(m);
        return {seen.begin(), seen.end()};
    }
};

struct ManifestOptions {
    /// Check that every referenced file exists while loading.
    bool strict = false;
    /// Minimum samples per (subject, scan, method, frame). Reference
    /// segmentations for Dice use 1.
    std::size_t min_samples = 2;
};

/// Validates a manifest document. Relative paths resolve against base_dir.
inline DatasetManifest parse_manifest(const nlohmann::json& doc, const fs::path& base_dir,
                                      const ManifestOptions& options = {}) {
    using nlohmann::json;
    auto fail = [](ErrorCode code, const std::string& msg) { throw Error(code, msg); };
    if (!doc.is_object()) fail(ErrorCode::InvalidManifest, "top level must be a JSON object");

    DatasetManifest m;
    m.name = doc.value("name", std::string{});

    if (doc.contains("label_map")) {
        const auto& lm = doc.at("label_map");
        if (!lm.is_object()) fail(ErrorCode::InvalidManifest, "label_map must be an object");
        std::set<Label> used;
        LabelMap map;
        for (const auto& [name, value] : lm.items()) {
            const auto structure = parse_structure(name);
            if (!structure) fail(ErrorCode::UnknownLabel, "label_map: unknown structure '" + name + "'");
            if (!value.is_number_integer() || value.get<long long>() <= 0 || value.get<long long>() > 0xFFFF)
                fail(ErrorCode::InvalidManifest, "label_map." + name + ": must be an integer in 1..65535");
            const auto l = value.get<Label>();
            switch (*structure) {
            case Structure::LVBP: map.lvbp = l; break;
            case Structure::Myocardium: map.myocardium = l; break;
            case Structure::RVBP: map.rvbp = l; break;
            }
        }
        for (Structure s : kStructures)
            if (!used.insert(map.label(s)).second)
                fail(ErrorCode::InvalidManifest, "label_map: structures share label " + std::to_string(map.label(s)));
        m.label_map = map;
    }

    auto resolve = [&](const fs::path& p) { return p.is_absolute() ? p : (base_dir / p).lexically_normal(); };

    if (doc.contains("precomputed_samples")) {
        const auto& p = doc.at("precomputed_samples");
        if (!p.is_string()) fail(ErrorCode::InvalidManifest, "precomputed_samples must be a path string");
        m.precomputed_samples = resolve(p.get<std::string>());
        if (options.strict && !fs::exists(*m.precomputed_samples))
            fail(ErrorCode::MissingFile, "precomputed_samples: '" + m.precomputed_samples->string() + "' does not exist");
    }

    if (!doc.contains("subjects") || !doc.at("subjects").is_array())
        fail(ErrorCode::InvalidManifest, "subjects must be an array");

    std::set<std::string> ids;
    for (const auto& sj : doc.at("subjects")) {
        if (!sj.is_object() || !sj.contains("id") || !sj.at("id").is_string())
            fail(ErrorCode::InvalidManifest, "every subject needs a string 'id'");
        SubjectEntry entry;
        entry.id = sj.at("id").get<std::string>();
        const std::string ctx = "subject '" + entry.id + "'";
        if (!ids.insert(entry.id).second) fail(ErrorCode::InvalidManifest, ctx + ": duplicate id");
        if (!sj.contains("scans") || !sj.at("scans").is_object())
            fail(ErrorCode::InvalidManifest, ctx + ": missing 'scans' object");
        const auto& scans = sj.at("scans");
        for (const auto& [key, _] : scans.items())
            if (!parse_scan(key)) fail(ErrorCode::InvalidManifest, ctx + ": unknown scan '" + key + "'");
        if (!scans.contains("A")) fail(ErrorCode::MissingScan, ctx + ": missing scan A");
        if (!scans.contains("B")) fail(ErrorCode::MissingScan, ctx + ": missing scan B");

        for (Scan scan : kScans) {
            const auto& sc = scans.at(std::string(to_string(scan)));
            const std::string sctx = ctx + " scan " + std::string(to_string(scan));
            if (!sc.is_object()) fail(ErrorCode::InvalidManifest, sctx + ": must be an object");
            if (!sc.contains("methods")) {
                if (m.precomputed_samples) continue;
                fail(ErrorCode::InvalidManifest, sctx + ": missing 'methods'");
            }
            const auto& methods = sc.at("methods");
            if (!methods.is_object()) fail(ErrorCode::InvalidManifest, sctx + ": 'methods' must be an object");
            for (const auto& [mname, frames] : methods.items()) {
                const auto method = parse_method(mname);
                const std::string mctx = sctx + " method " + mname;
                if (!method) fail(ErrorCode::InvalidManifest, mctx + ": unknown method (DE, TTA, MCD)");
                if (!frames.is_object() || !frames.contains("ED") || !frames.contains("ES"))
                    fail(ErrorCode::InvalidManifest, mctx + ": needs 'ED' and 'ES' path lists");
                FrameSamples fsamp;
                for (Frame f : kFrames) {
                    const auto& list = frames.at(std::string(to_string(f)));
                    if (!list.is_array()) fail(ErrorCode::InvalidManifest, mctx + ": frame lists must be arrays");
                    auto& dst = f == Frame::ED ? fsamp.ed : fsamp.es;
                    for (const auto& p : list) {
                        if (!p.is_string()) fail(ErrorCode::InvalidManifest, mctx + ": paths must be strings");
                        dst.push_back(resolve(p.get<std::string>()));
                        if (options.strict && !fs::exists(dst.back()))
                            fail(ErrorCode::MissingFile, mctx + ": '" + dst.back().string() + "' does not exist");
                    }
                }
                if (fsamp.ed.size() != fsamp.es.size())
                    fail(ErrorCode::SampleCountMismatch, mctx + ": " + std::to_string(fsamp.ed.size()) +
                                                             " ED samples vs " + std::to_string(fsamp.es.size()) +
                                                             " ES samples");
                if (fsamp.ed.size() < options.min_samples)
                    fail(ErrorCode::SampleCountMismatch, mctx + ": needs at least " +
                                                             std::to_string(options.min_samples) + " samples per frame");
                entry.scan(scan).methods.emplace(*method, std::move(fsamp));
            }
        }
        // Paired tests match sample i of A with sample i of B.
        for (const auto& [method, fa] : entry.a.methods) {
            auto it = entry.b.methods.find(method);
            const std::string mctx = ctx + " method " + std::string(to_string(method));
            if (it == entry.b.methods.end())
                fail(ErrorCode::MissingScan, mctx + ": missing scan B samples");
            if (it->second.size() != fa.size())
                fail(ErrorCode::SampleCountMismatch, mctx + ": scan A has " + std::to_string(fa.size()) +
                                                         " samples, scan B has " + std::to_string(it->second.size()));
        }
        for (const auto& [method, _] : entry.b.methods)
            if (!entry.a.methods.contains(method))
                fail(ErrorCode::MissingScan, ctx + " method " + std::string(to_string(method)) + ": missing scan A samples");
        m.subjects.push_back(std::move(entry));
    }
    if (m.subjects.empty() && !m.precomputed_samples)
        fail(ErrorCode::InvalidManifest, "no subjects");
    return m;
}

inline DatasetManifest load_manifest(const fs::path& path, const ManifestOptions& options = {}) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MissingFile, "manifest '" + path.string() + "' cannot be opened");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidManifest, path.string() + ": " + e.what());
    }
    auto m = parse_manifest(doc, path.parent_path(), options);
    if (m.name.empty()) m.name = path.stem().string();
    return m;
}

/// Serializes a manifest; paths under base_dir are written relative to it.
inline nlohmann::json manifest_to_json(const DatasetManifest& m, const fs::path& base_dir) {
    using nlohmann::json;
    auto rel = [&](const fs::path& p) {
        const auto r = p.lexically_relative(base_dir);
        return (r.empty() || *r.begin() == "..") ? p.generic_string() : r.generic_string();
    };
    json doc;
    doc["name"] = m.name;
    doc["label_map"] = {{std::string(to_string(Structure::LVBP)), m.label_map.lvbp},
                        {std::string(to_string(Structure::Myocardium)), m.label_map.myocardium},
                        {std::string(to_string(Structure::RVBP)), m.label_map.rvbp}};
    if (m.precomputed_samples) doc["precomputed_samples"] = rel(*m.precomputed_samples);
    json subjects = json::array();
    for (const auto& s : m.subjects) {
        json scans = json::object();
        for (Scan scan : kScans) {
            json methods = json::object();
            for (const auto& [method, fsamp] : s.scan(scan).methods) {
                json ed = json::array(), es = json::array();
                for (const auto& p : fsamp.ed) ed.push_back(rel(p));
                for (const auto& p : fsamp.es) es.push_back(rel(p));
                methods[std::string(to_string(method))] = {{"ED", ed}, {"ES", es}};
            }
            scans[std::string(to_string(scan))] = {{"methods", methods}};
        }
        subjects.push_back({{"id", s.id}, {"scans", scans}});
    }
    doc["subjects"] = subjects;
    return doc;
}

inline void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

inline void write_manifest(const DatasetManifest& m, const fs::path& path) {
    write_text_file(path, manifest_to_json(m, path.parent_path()).dump(2) + "\n");
}

}  // namespace cardioprec::io
