#include "spdc/app/measure.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "spdc/app/output.hpp"
#include "spdc/errors.hpp"

namespace spdc::app {

namespace fs = std::filesystem;

fs::path fiber_table_path(const std::string& name_or_path) {
    if (fs::is_regular_file(name_or_path)) return name_or_path;
    std::string name = name_or_path;
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::tolower(ch); });
    const fs::path bundled = data_directory() / "fibers" / (name + ".csv");
    if (!fs::is_regular_file(bundled)) throw DataError("fiber table not found: " + name_or_path);
    return bundled;
}

namespace {

std::string file_sha256(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

}  // namespace

MeasurementRun run_measurement(const RunConfig& cfg, std::optional<std::uint64_t> seed) {
    if (!cfg.measurement) throw ValidationError("measurement", "measure-sim needs a measurement block");
    const MeasurementConfig& mc = *cfg.measurement;
    MeasurementRun run;

    const fs::path signal_table = fiber_table_path(mc.signal_fiber.table);
    const fs::path idler_table = fiber_table_path(mc.idler_fiber.table);
    run.fibers.signal = {mc.signal_fiber.length_km, FiberDispersion::load(signal_table)};
    run.fibers.idler = {mc.idler_fiber.length_km, FiberDispersion::load(idler_table)};
    run.signal_table_sha256 = file_sha256(signal_table);
    run.idler_table_sha256 = file_sha256(idler_table);
    run.chain = {mc.jitter_ps, mc.trigger_jitter_ps, mc.bin_width_ps, mc.pairs};

    const SourceModel model = build_model(cfg);
    run.tpsa = normalize(build_tpsa(model.crystal, model.pump, full_grid(cfg, model)));
    run.centers = BandCenters::of(run.tpsa.grid);
    run.histogram =
        simulate_histogram(run.tpsa, run.fibers, run.chain, seed.value_or(mc.seed), run.centers, std::nullopt, mc.shards);
    run.wavelength = time_to_wavelength(run.histogram, run.fibers, run.centers);
    run.signal_resolution_nm = run.wavelength.signal_resolution_nm;
    run.idler_resolution_nm = run.wavelength.idler_resolution_nm;
    run.theory_resolution_nm = mc.theory_resolution_nm > 0.0
                                   ? mc.theory_resolution_nm
                                   : 0.5 * (run.signal_resolution_nm + run.idler_resolution_nm);
    run.theory = blur_to_resolution(run.tpsa.intensity(), run.tpsa.grid, run.theory_resolution_nm);
    return run;
}

}  // namespace spdc::app
