#include "spdc/app/output.hpp"

#include <png.h>

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdlib>
#include <fstream>

#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc::app {

namespace fs = std::filesystem;

fs::path resolve_output_dir(const std::string& dir) {
    fs::path p(dir);
    if (p.is_absolute()) return p.lexically_normal();
    const char* root = std::getenv(kOutputRootVariable);
    const fs::path base = (root && *root) ? fs::path(root) : fs::current_path();
    return fs::absolute(base / p).lexically_normal();
}

void OutputSet::add(const std::string& relative, std::string content) { files_[relative] = std::move(content); }

void OutputSet::add(const std::string& relative, const std::vector<std::uint8_t>& content) {
    files_[relative] = std::string(content.begin(), content.end());
}

void OutputSet::commit(const Json& info) {
    if (fs::exists(target_)) {
        const bool ours = fs::is_directory(target_) &&
                          (fs::exists(target_ / "manifest.json") || fs::is_empty(target_));
        if (!ours) throw Error("refusing to replace " + target_.string() + ": not an output directory of this tool");
    }
    Json manifest = info;
    manifest["files"] = Json::array();
    for (const auto& [name, bytes] : files_)
        manifest["files"].push_back({{"path", name}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
    files_["manifest.json"] = manifest.dump(2) + "\n";

    const fs::path staging = target_.parent_path() / ("." + target_.filename().string() + ".staging");
    fs::remove_all(staging);
    try {
        for (const auto& [name, bytes] : files_) {
            const fs::path file = staging / name;
            fs::create_directories(file.parent_path());
            std::ofstream out(file, std::ios::binary);
            out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
            if (!out) throw Error("failed to write " + file.string());
        }
        if (fs::exists(target_)) fs::remove_all(target_);
        fs::rename(staging, target_);
    } catch (...) {
        std::error_code ec;
        fs::remove_all(staging, ec);
        throw;
    }
}

std::string sha256_hex(const std::string& bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::string format_number(double value) {
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), end);
}

namespace {

void append_axis(std::string& out, const char* label, const std::vector<double>& omega) {
    out += label;
    for (double w : omega) {
        out += ',';
        out += format_number(units::omega_to_nm(w));
    }
    out += '\n';
}

}  // namespace

std::string grid_csv(const FrequencyGrid& grid, const RealMatrix& values) {
    std::string out;
    append_axis(out, "signal_nm", grid.signal());
    append_axis(out, "idler_nm", grid.idler());
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            if (c) out += ',';
            out += format_number(values(r, c));
        }
        out += '\n';
    }
    return out;
}

std::string complex_grid_csv(const TpsaGrid& tpsa) {
    std::string out;
    append_axis(out, "signal_nm", tpsa.grid.signal());
    append_axis(out, "idler_nm", tpsa.grid.idler());
    for (Eigen::Index r = 0; r < tpsa.amplitude.rows(); ++r) {
        for (Eigen::Index c = 0; c < tpsa.amplitude.cols(); ++c) {
            if (c) out += ',';
            out += format_number(tpsa.amplitude(r, c).real());
            out += ',';
            out += format_number(tpsa.amplitude(r, c).imag());
        }
        out += '\n';
    }
    return out;
}

namespace {

std::array<std::uint8_t, 3> colormap(double v) {
    static constexpr std::array<std::array<double, 3>, 9> stops{{{68, 1, 84},
                                                                  {71, 44, 122},
                                                                  {59, 81, 139},
                                                                  {44, 113, 142},
                                                                  {33, 144, 141},
                                                                  {39, 173, 129},
                                                                  {92, 200, 99},
                                                                  {170, 220, 50},
                                                                  {253, 231, 37}}};
    v = std::clamp(v, 0.0, 1.0) * 8.0;
    const int i = std::min(7, static_cast<int>(v));
    const double t = v - i;
    std::array<std::uint8_t, 3> rgb{};
    for (int k = 0; k < 3; ++k)
        rgb[k] = static_cast<std::uint8_t>(std::lround(stops[i][k] + t * (stops[i + 1][k] - stops[i][k])));
    return rgb;
}

void png_append(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void png_noop_flush(png_structp) {}

}  // namespace

std::vector<std::uint8_t> heatmap_png(const RealMatrix& values) {
    const int width = static_cast<int>(values.rows());
    const int height = static_cast<int>(values.cols());
    if (width == 0 || height == 0) throw ContractError("heatmap of an empty grid");
    const double top = values.maxCoeff();
    const double scale = top > 0.0 ? 1.0 / top : 0.0;

    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height * 3);
    for (int y = 0; y < height; ++y) {
        const int c = height - 1 - y;
        for (int x = 0; x < width; ++x) {
            const auto rgb = colormap(values(x, c) * scale);
            std::copy(rgb.begin(), rgb.end(), pixels.begin() + (static_cast<std::size_t>(y) * width + x) * 3);
        }
    }

    std::vector<std::uint8_t> out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("png: cannot create writer");
    png_infop info = png_create_info_struct(png);
    if (!info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("png: encoding failed");
    }
    png_set_write_fn(png, &out, png_append, png_noop_flush);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < height; ++y)
        png_write_row(png, pixels.data() + static_cast<std::size_t>(y) * width * 3);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

std::string modes_csv(const SchmidtDecomposition& d, int count) {
    count = std::min(count, d.size());
    std::string out = "axis,index,nm";
    for (int n = 0; n < count; ++n) out += ",re_" + std::to_string(n) + ",im_" + std::to_string(n);
    out += '\n';
    auto axis = [&](const char* name, const std::vector<double>& omega, const ComplexMatrix& modes) {
        for (std::size_t k = 0; k < omega.size(); ++k) {
            out += name;
            out += ',' + std::to_string(k) + ',' + format_number(units::omega_to_nm(omega[k]));
            for (int n = 0; n < count; ++n) {
                out += ',' + format_number(modes(static_cast<Eigen::Index>(k), n).real());
                out += ',' + format_number(modes(static_cast<Eigen::Index>(k), n).imag());
            }
            out += '\n';
        }
    };
    axis("signal", d.grid.signal(), d.signal_modes);
    axis("idler", d.grid.idler(), d.idler_modes);
    return out;
}

namespace {

Json margins_json(const std::optional<SeparationMargins>& m, const std::string& note) {
    if (!m) return {{"available", false}, {"note", note}};
    return {{"available", true}, {"first", m->first}, {"second", m->second}, {"binding", m->binding()}};
}

}  // namespace

Json run_report(const RunConfig& cfg, const RunResult& r) {
    const auto& p = r.peak;
    Json j;
    j["name"] = cfg.name;
    j["cut_angle_deg"] = units::rad_to_deg(r.model.crystal.cut_angle);
    j["tilt_deg"] = units::rad_to_deg(r.tilt);
    j["tilt_estimate_deg"] = r.tilt_estimate ? Json(units::rad_to_deg(r.tilt_estimate->angle)) : Json(nullptr);
    j["brightest_peak"] = {{"signal_nm", units::omega_to_nm(p.brightest.omega_s)},
                           {"idler_nm", units::omega_to_nm(p.brightest.omega_i)},
                           {"row", p.brightest.row},
                           {"col", p.brightest.col}};
    j["window"] = {{"center_signal_nm", units::omega_to_nm(p.window.center.first)},
                   {"center_idler_nm", units::omega_to_nm(p.window.center.second)},
                   {"width_signal_rad_per_fs", p.window.full_width.first},
                   {"width_idler_rad_per_fs", p.window.full_width.second},
                   {"width_signal_nm", units::omega_interval_to_nm(p.window.full_width.first,
                                                                    units::omega_to_nm(p.window.center.first))},
                   {"width_idler_nm", units::omega_interval_to_nm(p.window.full_width.second,
                                                                   units::omega_to_nm(p.window.center.second))},
                   {"local_points", cfg.analysis.local_points},
                   {"intensity_cut", cfg.analysis.intensity_cut},
                   {"edge_intensity", p.edge_intensity}};
    j["use_modulus"] = cfg.analysis.use_modulus;
    j["schmidt_number"] = p.schmidt_number;
    if (p.refined_schmidt_number) {
        j["refinement"] = {{"local_points", 2 * cfg.analysis.local_points},
                           {"schmidt_number", *p.refined_schmidt_number},
                           {"relative_change", std::abs(*p.refined_schmidt_number - p.schmidt_number) / p.schmidt_number}};
    }
    Json lambda = Json::array();
    Json centroids = Json::array();
    const int shown = std::min(p.decomposition.size(), 64);
    for (int n = 0; n < shown; ++n) {
        lambda.push_back(p.decomposition.coefficients[n]);
        centroids.push_back({{"signal_nm", units::omega_to_nm(p.decomposition.signal_centroid(n))},
                             {"idler_nm", units::omega_to_nm(p.decomposition.idler_centroid(n))}});
    }
    j["coefficients"] = lambda;
    j["coefficients_total"] = p.decomposition.size();
    j["mode_centroids"] = centroids;
    j["margins"] = margins_json(r.margins, r.margins_note);
    if (r.gaussian_peak)
        j["gaussian_model"] = {{"tilt_deg", units::rad_to_deg(r.gaussian_peak->tilt)},
                               {"sigma_c_rad_per_fs", r.gaussian_peak->sigma_c},
                               {"sigma_p_rad_per_fs", r.gaussian_peak->sigma_p},
                               {"alignment_residual", alignment_residual(*r.gaussian_peak)}};
    return j;
}

void add_run_files(OutputSet& out, const RunConfig& cfg, const RunResult& r, const std::string& prefix) {
    const RealMatrix full = r.full.intensity();
    const RealMatrix spot = r.peak.isolated.intensity();
    out.add(prefix + "tpsa_intensity.csv", grid_csv(r.full.grid, full));
    out.add(prefix + "tpsa.png", heatmap_png(full));
    out.add(prefix + "peak_intensity.csv", grid_csv(r.peak.isolated.grid, spot));
    out.add(prefix + "peak_complex.csv", complex_grid_csv(r.peak.isolated));
    out.add(prefix + "peak.png", heatmap_png(spot));
    out.add(prefix + "schmidt.json", run_report(cfg, r).dump(2) + "\n");
    out.add(prefix + "modes.csv", modes_csv(r.peak.decomposition, 4));
}

std::string histogram_csv(const ArrivalHistogram& h, const FiberPair& fibers) {
    std::string out;
    auto axis = [&](const char* label, const TimeAxis& a, const FiberSpec* fiber, double center_nm) {
        out += label;
        for (int k = 0; k < a.bins; ++k) {
            out += ',';
            out += format_number(fiber ? time_to_wavelength(*fiber, a.center(k), center_nm) : a.center(k));
        }
        out += '\n';
    };
    axis("signal_ps", h.axes.signal, nullptr, 0.0);
    axis("idler_ps", h.axes.idler, nullptr, 0.0);
    axis("signal_nm", h.axes.signal, &fibers.signal, h.centers.signal_nm);
    axis("idler_nm", h.axes.idler, &fibers.idler, h.centers.idler_nm);
    for (int s = 0; s < h.axes.signal.bins; ++s) {
        for (int i = 0; i < h.axes.idler.bins; ++i) {
            if (i) out += ',';
            out += std::to_string(h.at(s, i));
        }
        out += '\n';
    }
    return out;
}

Json add_measurement_files(OutputSet& out, const RunConfig& cfg, const MeasurementRun& m, const std::string& prefix) {
    RealMatrix counts(m.histogram.axes.signal.bins, m.histogram.axes.idler.bins);
    for (int s = 0; s < counts.rows(); ++s)
        for (int i = 0; i < counts.cols(); ++i) counts(s, i) = static_cast<double>(m.histogram.at(s, i));

    const auto fiber = [](const FiberConfig& f, const std::string& sha) {
        return Json{{"table", f.table}, {"length_km", f.length_km}, {"sha256", sha}};
    };
    Json meta = {{"seed", m.histogram.seed},
                 {"pairs", m.histogram.pairs},
                 {"registered", m.histogram.total()},
                 {"overflow", m.histogram.overflow},
                 {"jitter_ps", m.chain.jitter_ps},
                 {"trigger_jitter_ps", m.chain.trigger_jitter_ps},
                 {"bin_width_ps", m.chain.bin_width_ps},
                 {"signal_center_nm", m.centers.signal_nm},
                 {"idler_center_nm", m.centers.idler_nm},
                 {"signal_resolution_nm", m.signal_resolution_nm},
                 {"idler_resolution_nm", m.idler_resolution_nm},
                 {"theory_resolution_nm", m.theory_resolution_nm},
                 {"signal_fiber", fiber(cfg.measurement->signal_fiber, m.signal_table_sha256)},
                 {"idler_fiber", fiber(cfg.measurement->idler_fiber, m.idler_table_sha256)}};
    out.add(prefix + "histogram.csv", histogram_csv(m.histogram, m.fibers));
    out.add(prefix + "histogram.png", heatmap_png(counts));
    out.add(prefix + "theory_intensity.csv", grid_csv(m.tpsa.grid, m.theory));
    out.add(prefix + "theory.png", heatmap_png(m.theory));
    out.add(prefix + "measurement.json", meta.dump(2) + "\n");
    return meta;
}

Json search_report(const DesignSpace& space, const SearchResult& result) {
    auto point = [&](const Evaluation& e) {
        Json x = Json::object();
        for (std::size_t k = 0; k < e.x.size(); ++k) x[space.variables[k].param] = e.x[k];
        Json j = {{"x", x}, {"feasible", e.feasible}, {"note", e.note}};
        j["schmidt_number"] = e.feasible ? Json(e.objective) : Json(nullptr);
        j["peak"] = {{"signal_nm", e.peak_signal_nm}, {"idler_nm", e.peak_idler_nm}};
        j["margins"] = margins_json(e.margins, e.note);
        return j;
    };
    Json j;
    j["best"] = point(result.best);
    j["evaluations"] = result.log.size();
    j["log"] = Json::array();
    for (const auto& e : result.log) j["log"].push_back(point(e));
    return j;
}

}  // namespace spdc::app
