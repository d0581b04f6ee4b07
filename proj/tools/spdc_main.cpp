// spdc: command-line front end for running, sweeping and searching
// two-photon spectral amplitude configurations.

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spdc/app/config.hpp"
#include "spdc/app/measure.hpp"
#include "spdc/app/output.hpp"
#include "spdc/app/pipeline.hpp"
#include "spdc/app/search.hpp"
#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace {

using namespace spdc;
using namespace spdc::app;

constexpr int kExitValidation = 2;
constexpr int kExitComputation = 3;

struct Common {
    std::string config;
    std::optional<int> grid;
    std::string out;
};

Json load_document(const Common& c) {
    Json doc = read_json(c.config);
    if (c.grid) {
        if (!doc.is_object()) throw ValidationError("<root>", "expected an object");
        if (!doc.contains("grid")) doc["grid"] = Json::object();
        doc["grid"]["points"] = *c.grid;
    }
    return doc;
}

std::filesystem::path target_dir(const Common& c, const RunConfig& cfg) {
    return resolve_output_dir(c.out.empty() ? cfg.output_dir : c.out);
}

Json run_info(const std::string& command, const Common& c, const RunConfig& cfg) {
    return {{"command", command}, {"config", c.config}, {"config_sha256", sha256_hex(cfg.source.dump())}};
}

void print_run(const RunResult& r) {
    std::cout << "tilt " << units::rad_to_deg(r.tilt) << " deg";
    if (r.tilt_estimate) std::cout << " (estimate " << units::rad_to_deg(r.tilt_estimate->angle) << " deg)";
    std::cout << "\nbrightest spot " << units::omega_to_nm(r.peak.window.center.first) << " nm / "
              << units::omega_to_nm(r.peak.window.center.second) << " nm\n";
    std::cout << "K " << r.peak.schmidt_number;
    if (r.peak.refined_schmidt_number) std::cout << " (refined " << *r.peak.refined_schmidt_number << ")";
    std::cout << "\nedge intensity " << r.peak.edge_intensity << "\n";
    if (r.margins) std::cout << "margins " << r.margins->first << ", " << r.margins->second << "\n";
}

int cmd_run(const Common& c) {
    const RunConfig cfg = parse_config(load_document(c));
    const auto target = target_dir(c, cfg);
    const RunResult r = run_pipeline(cfg);
    OutputSet out(target);
    add_run_files(out, cfg, r);
    if (cfg.measurement) add_measurement_files(out, cfg, run_measurement(cfg));
    out.commit(run_info("run", c, cfg));
    print_run(r);
    std::cout << "wrote " << target.string() << "\n";
    return 0;
}

std::vector<Json> parse_values(const std::string& text) {
    std::vector<Json> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            values.push_back(Json::parse(item));
        } catch (const Json::parse_error&) {
            values.push_back(item);
        }
    }
    if (values.empty()) throw ValidationError("--values", "no values given");
    return values;
}

int cmd_sweep(const Common& c, const std::string& param, const std::string& values_text) {
    const Json base = load_document(c);
    const RunConfig base_cfg = parse_config(base);
    std::string path = param;
    std::vector<Json> values;
    if (!param.empty()) {
        values = parse_values(values_text);
    } else if (base_cfg.sweep) {
        path = base_cfg.sweep->param;
        values = base_cfg.sweep->values;
    } else {
        throw ValidationError("--param", "no parameter given and the config has no sweep block");
    }
    // Validate every point before computing any.
    std::vector<RunConfig> points;
    for (const auto& v : values) points.push_back(parse_config(with_parameter(base, path, v)));

    const auto target = target_dir(c, base_cfg);
    OutputSet out(target);
    std::string table = "value,schmidt_number,tilt_deg,tilt_estimate_deg,margin_first,margin_second,edge_intensity,status\n";
    for (std::size_t k = 0; k < points.size(); ++k) {
        char prefix[32];
        std::snprintf(prefix, sizeof prefix, "point_%02zu/", k);
        table += values[k].dump() + ",";
        try {
            const RunResult r = run_pipeline(points[k]);
            add_run_files(out, points[k], r, prefix);
            if (points[k].measurement) add_measurement_files(out, points[k], run_measurement(points[k]), prefix);
            table += format_number(r.peak.schmidt_number) + "," + format_number(units::rad_to_deg(r.tilt)) + ",";
            table += (r.tilt_estimate ? format_number(units::rad_to_deg(r.tilt_estimate->angle)) : "") + ",";
            table += (r.margins ? format_number(r.margins->first) + "," + format_number(r.margins->second) : ",");
            table += "," + format_number(r.peak.edge_intensity) + ",ok\n";
            std::cout << path << "=" << values[k].dump() << ": K " << r.peak.schmidt_number << ", tilt "
                      << units::rad_to_deg(r.tilt) << " deg\n";
        } catch (const Error& e) {
            std::string msg = e.what();
            for (char& ch : msg)
                if (ch == ',' || ch == '\n') ch = ';';
            table += ",,,,,,error: " + msg + "\n";
            std::cout << path << "=" << values[k].dump() << ": failed: " << e.what() << "\n";
        }
    }
    out.add("sweep.csv", table);
    Json info = run_info("sweep", c, base_cfg);
    info["param"] = path;
    info["values"] = values;
    out.commit(info);
    std::cout << "wrote " << target.string() << "\n";
    return 0;
}

int cmd_search(const Common& c, const std::string& space_file, int budget) {
    const Json base = load_document(c);
    const RunConfig cfg = parse_config(base);
    const DesignSpace space = DesignSpace::parse(read_json(space_file));
    if (budget < 1) throw ValidationError("--budget", "must be at least 1");
    const auto target = target_dir(c, cfg);
    const SearchResult result = design_search(base, space, budget);
    OutputSet out(target);
    out.add("search.json", search_report(space, result).dump(2) + "\n");
    Json info = run_info("search", c, cfg);
    info["space_sha256"] = sha256_hex(read_json(space_file).dump());
    info["budget"] = budget;
    out.commit(info);
    for (std::size_t k = 0; k < space.variables.size(); ++k)
        std::cout << space.variables[k].param << " = " << result.best.x[k] << "\n";
    std::cout << "K " << result.best.objective << " after " << result.log.size() << " evaluations\n";
    std::cout << "wrote " << target.string() << "\n";
    return 0;
}

int cmd_pump_spectrum(const Common& c, int points) {
    const RunConfig cfg = parse_config(load_document(c));
    if (points < 2) throw ValidationError("--points", "must be at least 2");
    const auto target = target_dir(c, cfg);
    const SourceModel model = build_model(cfg);
    const double w0 = model.envelope.center;
    const double half = cfg.grid.half_span_sigmas * model.envelope.sigma;
    std::string csv = "wavelength_nm,omega_rad_per_fs,re,im,intensity\n";
    for (int k = 0; k < points; ++k) {
        const double w = w0 - half + 2.0 * half * k / (points - 1);
        const Complex a = pump_amplitude(model.pump, w);
        csv += format_number(units::omega_to_nm(w)) + "," + format_number(w) + "," + format_number(a.real()) + "," +
               format_number(a.imag()) + "," + format_number(std::norm(a)) + "\n";
    }
    Json summary = {{"center_nm", cfg.pump.center_nm},
                    {"envelope_fwhm_nm", units::omega_interval_to_nm(model.envelope.intensity_fwhm(), cfg.pump.center_nm)}};
    if (const auto* shaped = std::get_if<ShapedPump>(&model.pump)) {
        summary["free_spectral_range_nm"] =
            units::omega_interval_to_nm(free_spectral_range(shaped->fp), cfg.pump.center_nm);
        summary["peak_fwhm_nm"] = units::omega_interval_to_nm(fp_peak_fwhm(shaped->fp), cfg.pump.center_nm);
    }
    if (model.comb_spacing) summary["line_spacing_rad_per_fs"] = *model.comb_spacing;
    OutputSet out(target);
    out.add("pump_spectrum.csv", csv);
    out.add("pump.json", summary.dump(2) + "\n");
    out.commit(run_info("pump-spectrum", c, cfg));
    std::cout << summary.dump(2) << "\nwrote " << target.string() << "\n";
    return 0;
}

int cmd_measure(const Common& c, std::optional<std::uint64_t> seed) {
    const RunConfig cfg = parse_config(load_document(c));
    if (!cfg.measurement) throw ValidationError("measurement", "measure-sim needs a measurement block");
    const auto target = target_dir(c, cfg);
    const MeasurementRun m = run_measurement(cfg, seed);

    OutputSet out(target);
    const Json meta = add_measurement_files(out, cfg, m);
    out.commit(run_info("measure-sim", c, cfg));
    std::cout << meta.dump(2) << "\nwrote " << target.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-photon spectral amplitude engineering with comb-shaped pumps"};
    app.require_subcommand(1);

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", common.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--grid", common.grid, "Override grid.points");
        sub->add_option("--out", common.out, "Output directory (overrides output_dir)");
    };

    auto* run = app.add_subcommand("run", "Run the pipeline for one configuration");
    add_common(run);

    std::string param;
    std::string values;
    auto* sweep = app.add_subcommand("sweep", "Run one configuration per parameter value");
    add_common(sweep);
    sweep->add_option("--param", param, "Dotted config path, e.g. crystal.length_mm");
    sweep->add_option("--values", values, "Comma-separated values");

    std::string space;
    int budget = 40;
    auto* search = app.add_subcommand("search", "Minimize the brightest-spot Schmidt number");
    add_common(search);
    search->add_option("--space", space, "Design space (JSON)")->required()->check(CLI::ExistingFile);
    search->add_option("--budget", budget, "Maximum number of evaluations");

    int points = 4096;
    auto* pump = app.add_subcommand("pump-spectrum", "Tabulate the pump spectral amplitude");
    add_common(pump);
    pump->add_option("--points", points, "Number of samples");

    std::optional<std::uint64_t> seed;
    auto* measure = app.add_subcommand("measure-sim", "Simulate the fiber-spectrometer histogram");
    add_common(measure);
    measure->add_option("--seed", seed, "Random seed (overrides measurement.seed)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*run) return cmd_run(common);
        if (*sweep) return cmd_sweep(common, param, values);
        if (*search) return cmd_search(common, space, budget);
        if (*pump) return cmd_pump_spectrum(common, points);
        if (*measure) return cmd_measure(common, seed);
    } catch (const ValidationError& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return kExitValidation;
    } catch (const Error& e) {
        std::cerr << "computation failed: " << e.what() << "\n";
        return kExitComputation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitComputation;
    }
    return 0;
}
