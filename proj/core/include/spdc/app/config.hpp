#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdc/dispersion.hpp"

namespace spdc::app {

using Json = nlohmann::json;

struct CrystalConfig {
    std::string material = "kdp";
    double length_mm = 0.0;
    std::optional<double> cut_angle_deg;  // solved for degenerate phase matching when absent
    PolarizationAssignment polarization;
};

enum class PumpShape { Gaussian, FabryPerot, GaussianComb };

struct FabryPerotConfig {
    double spacing_um = 0.0;
    double reflectance = 0.0;
    double tilt_deg = 0.0;
};

struct CombConfig {
    double spacing_nm = 0.0;
    double peak_fwhm_nm = 0.0;  // intensity FWHM of each peak
    int half_count = 10;
    double offset_nm = 0.0;
};

struct PumpConfig {
    PumpShape shape = PumpShape::Gaussian;
    double center_nm = 0.0;
    // Exactly one of these sets the envelope width.
    std::optional<double> pulse_fwhm_fs;      // transform-limited intensity duration
    std::optional<double> bandwidth_fwhm_nm;  // intensity FWHM of the spectrum
    FabryPerotConfig fp;
    CombConfig comb;
};

struct GridConfig {
    int points = 512;
    double half_span_sigmas = 4.0;  // envelope sigmas on each side of degeneracy
};

enum class WindowMode { Neighbors, Wavelength, Full };

struct AnalysisConfig {
    WindowMode window = WindowMode::Neighbors;
    double window_signal_nm = 0.0;  // full widths for WindowMode::Wavelength
    double window_idler_nm = 0.0;
    double intensity_cut = 0.0;
    bool use_modulus = true;
    int local_points = 256;
    bool refinement_check = false;
    double width_factor = 1.0;  // sinc to Gaussian width rule for the margins
};

struct FiberConfig {
    std::string table;  // bundled name or path
    double length_km = 1.0;
};

struct MeasurementConfig {
    FiberConfig signal_fiber;
    FiberConfig idler_fiber;
    double jitter_ps = 50.0;
    double trigger_jitter_ps = 0.0;
    double bin_width_ps = 10.0;
    std::uint64_t pairs = 100000;
    std::uint64_t seed = 1;
    int shards = 1;
    double theory_resolution_nm = 0.0;  // 0 uses the chain's effective resolution
};

struct SweepConfig {
    std::string param;
    std::vector<Json> values;
};

struct RunConfig {
    std::string name;
    CrystalConfig crystal;
    PumpConfig pump;
    GridConfig grid;
    AnalysisConfig analysis;
    std::optional<MeasurementConfig> measurement;
    std::optional<SweepConfig> sweep;
    std::string output_dir;
    Json source;  // the validated document
};

/// Builds a RunConfig from a JSON document. Unknown keys, wrong types and out
/// of range values raise ValidationError with the offending field path.
RunConfig parse_config(const Json& doc);

/// Reads and parses a config file. Relative paths inside the document stay
/// relative to the caller's working directory.
RunConfig load_config(const std::filesystem::path& file);

/// Reads a JSON document, raising ValidationError on syntax errors.
Json read_json(const std::filesystem::path& file);

/// Converts a dotted parameter path ("crystal.length_mm") to a JSON pointer.
Json::json_pointer parameter_pointer(const std::string& dotted);

/// Copy of `doc` with the value at `dotted` set. The parent object must
/// exist; the leaf itself is checked when the result is parsed.
Json with_parameter(const Json& doc, const std::string& dotted, const Json& value);

Polarization parse_polarization(const std::string& text, const std::string& path);

}  // namespace spdc::app
