#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "spdc/app/config.hpp"
#include "spdc/app/pipeline.hpp"
#include "spdc/measurement.hpp"

namespace spdc::app {

/// Resolves a fiber table: an existing file, else <data>/fibers/<name>.csv.
std::filesystem::path fiber_table_path(const std::string& name_or_path);

struct MeasurementRun {
    TpsaGrid tpsa;  // full normalized grid that was sampled
    FiberPair fibers;
    DetectorChain chain;
    BandCenters centers;
    ArrivalHistogram histogram;
    WavelengthHistogram wavelength;
    double signal_resolution_nm = 0.0;
    double idler_resolution_nm = 0.0;
    double theory_resolution_nm = 0.0;
    RealMatrix theory;  // |F|^2 blurred to theory_resolution_nm
    std::string signal_table_sha256;
    std::string idler_table_sha256;
};

/// Samples the arrival-time histogram of the configured source and computes
/// the matching blurred theory. Requires a measurement block.
MeasurementRun run_measurement(const RunConfig& cfg, std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace spdc::app
