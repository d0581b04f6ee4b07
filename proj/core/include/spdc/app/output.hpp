#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spdc/app/config.hpp"
#include "spdc/app/measure.hpp"
#include "spdc/app/pipeline.hpp"
#include "spdc/app/search.hpp"
#include "spdc/measurement.hpp"

namespace spdc::app {

/// Environment variable naming the root for relative output directories.
inline constexpr const char* kOutputRootVariable = "SPDC_OUT_ROOT";

/// Absolute output directory: `dir` itself when absolute, else relative to
/// $SPDC_OUT_ROOT (or the working directory when unset).
std::filesystem::path resolve_output_dir(const std::string& dir);

/// Collects files in memory and publishes them together with manifest.json.
/// Nothing touches the disk before commit(), so a failed run leaves no
/// partial output. An existing target directory is replaced only if it holds
/// a manifest from an earlier run.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path target) : target_(std::move(target)) {}

    void add(const std::string& relative, std::string content);
    void add(const std::string& relative, const std::vector<std::uint8_t>& content);

    /// Writes everything plus manifest.json; `info` is stored in the manifest.
    void commit(const Json& info);

    const std::filesystem::path& target() const { return target_; }

private:
    std::filesystem::path target_;
    std::map<std::string, std::string> files_;
};

std::string sha256_hex(const std::string& bytes);

/// Shortest round-trip decimal representation.
std::string format_number(double value);

/// Two header lines (signal_nm, idler_nm axes) followed by one row of values
/// per signal sample.
std::string grid_csv(const FrequencyGrid& grid, const RealMatrix& values);

/// Like grid_csv but each cell is written as a re,im pair.
std::string complex_grid_csv(const TpsaGrid& tpsa);

/// Linear-scale heatmap; signal along x, idler increasing upwards.
std::vector<std::uint8_t> heatmap_png(const RealMatrix& values);

/// Leading `count` Schmidt modes on both axes (nm, re, im columns).
std::string modes_csv(const SchmidtDecomposition& d, int count);

Json run_report(const RunConfig& cfg, const RunResult& result);

/// Files of one pipeline run, prefixed by `prefix` ("" or "point_03/").
void add_run_files(OutputSet& out, const RunConfig& cfg, const RunResult& result, const std::string& prefix = "");

/// Four header lines (signal_ps, idler_ps, signal_nm, idler_nm bin centers)
/// followed by one row of counts per signal bin.
std::string histogram_csv(const ArrivalHistogram& h, const FiberPair& fibers);

/// Histogram, blurred theory and metadata of a measurement run; returns the metadata.
Json add_measurement_files(OutputSet& out, const RunConfig& cfg, const MeasurementRun& m, const std::string& prefix = "");

Json search_report(const DesignSpace& space, const SearchResult& result);

}  // namespace spdc::app
