#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace cardioprec {

enum class Scan { A, B };
enum class Method { DE, TTA, MCD };
enum class Frame { ED, ES };
enum class Biomarker { LVEF, LVM, RVEF };
enum class Structure { LVBP, Myocardium, RVBP };

inline constexpr std::array kScans{Scan::A, Scan::B};
inline constexpr std::array kMethods{Method::DE, Method::TTA, Method::MCD};
inline constexpr std::array kFrames{Frame::ED, Frame::ES};
// Row order of the published tables.
inline constexpr std::array kBiomarkers{Biomarker::LVEF, Biomarker::LVM, Biomarker::RVEF};
inline constexpr std::array kStructures{Structure::LVBP, Structure::Myocardium, Structure::RVBP};

constexpr std::string_view to_string(Scan s) { return s == Scan::A ? "A" : "B"; }

constexpr std::string_view to_string(Method m) {
    switch (m) {
    case Method::DE: return "DE";
    case Method::TTA: return "TTA";
    case Method::MCD: return "MCD";
    }
    return "?";
}

constexpr std::string_view to_string(Frame f) { return f == Frame::ED ? "ED" : "ES"; }

constexpr std::string_view to_string(Biomarker b) {
    switch (b) {
    case Biomarker::LVEF: return "LVEF";
    case Biomarker::LVM: return "LVM";
    case Biomarker::RVEF: return "RVEF";
    }
    return "?";
}

constexpr std::string_view to_string(Structure s) {
    switch (s) {
    case Structure::LVBP: return "LVBP";
    case Structure::Myocardium: return "LV-myocardium";
    case Structure::RVBP: return "RVBP";
    }
    return "?";
}

template <typename Enum, std::size_t N>
std::optional<Enum> enum_from_string(std::string_view text, const std::array<Enum, N>& values) {
    for (Enum v : values)
        if (to_string(v) == text) return v;
    return std::nullopt;
}

inline std::optional<Scan> parse_scan(std::string_view s) { return enum_from_string(s, kScans); }
inline std::optional<Method> parse_method(std::string_view s) { return enum_from_string(s, kMethods); }
inline std::optional<Frame> parse_frame(std::string_view s) { return enum_from_string(s, kFrames); }
inline std::optional<Biomarker> parse_biomarker(std::string_view s) {
    return enum_from_string(s, kBiomarkers);
}
inline std::optional<Structure> parse_structure(std::string_view s) {
    return enum_from_string(s, kStructures);
}

}  // namespace cardioprec
