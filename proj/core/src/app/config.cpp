#include "spdc/app/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "spdc/errors.hpp"

namespace spdc::app {
namespace {

// Reads fields of one JSON object and remembers which keys were consumed so
// that leftovers can be rejected.
class ObjectReader {
public:
    ObjectReader(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ValidationError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const { return obj_.contains(key); }

    const Json* find(const std::string& key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    const Json& required(const std::string& key) {
        const Json* v = find(key);
        if (!v) throw ValidationError(child(key), "required field is missing");
        return *v;
    }

    double number(const std::string& key) { return as_number(required(key), key); }

    std::optional<double> optional_number(const std::string& key) {
        const Json* v = find(key);
        if (!v) return std::nullopt;
        return as_number(*v, key);
    }

    double number_or(const std::string& key, double fallback) { return optional_number(key).value_or(fallback); }

    std::int64_t integer_or(const std::string& key, std::int64_t fallback) {
        const Json* v = find(key);
        if (!v) return fallback;
        if (!v->is_number_integer()) throw ValidationError(child(key), "expected an integer");
        return v->get<std::int64_t>();
    }

    std::string string(const std::string& key) {
        const Json& v = required(key);
        if (!v.is_string()) throw ValidationError(child(key), "expected a string");
        return v.get<std::string>();
    }

    std::string string_or(const std::string& key, const std::string& fallback) {
        return has(key) ? string(key) : (seen_.insert(key), fallback);
    }

    bool boolean_or(const std::string& key, bool fallback) {
        const Json* v = find(key);
        if (!v) return fallback;
        if (!v->is_boolean()) throw ValidationError(child(key), "expected true or false");
        return v->get<bool>();
    }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key())) throw ValidationError(child(it.key()), "unknown key");
    }

private:
    double as_number(const Json& v, const std::string& key) const {
        if (!v.is_number()) throw ValidationError(child(key), "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ValidationError(child(key), "must be finite");
        return x;
    }

    const Json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& message) {
    if (!ok) throw ValidationError(path, message);
}

CrystalConfig parse_crystal(const Json& j) {
    ObjectReader r(j, "crystal");
    CrystalConfig c;
    c.material = r.string("material");
    c.length_mm = r.number("length_mm");
    require(c.length_mm > 0.0, r.child("length_mm"), "must be positive");
    c.cut_angle_deg = r.optional_number("cut_angle_deg");
    if (c.cut_angle_deg)
        require(*c.cut_angle_deg >= 0.0 && *c.cut_angle_deg <= 90.0, r.child("cut_angle_deg"), "must lie in [0, 90]");
    c.polarization.signal = parse_polarization(r.string_or("signal_polarization", "ordinary"), r.child("signal_polarization"));
    c.polarization.idler =
        parse_polarization(r.string_or("idler_polarization", "extraordinary"), r.child("idler_polarization"));
    r.finish();
    return c;
}

PumpConfig parse_pump(const Json& j) {
    ObjectReader r(j, "pump");
    PumpConfig p;
    const std::string model = r.string("model");
    if (model == "gaussian") {
        p.shape = PumpShape::Gaussian;
    } else if (model == "fabry_perot") {
        p.shape = PumpShape::FabryPerot;
    } else if (model == "gaussian_comb") {
        p.shape = PumpShape::GaussianComb;
    } else {
        throw ValidationError(r.child("model"), "expected gaussian, fabry_perot or gaussian_comb");
    }
    p.center_nm = r.number("center_nm");
    require(p.center_nm > 0.0, r.child("center_nm"), "must be positive");
    p.pulse_fwhm_fs = r.optional_number("pulse_fwhm_fs");
    p.bandwidth_fwhm_nm = r.optional_number("bandwidth_fwhm_nm");
    require(p.pulse_fwhm_fs.has_value() != p.bandwidth_fwhm_nm.has_value(), r.child("pulse_fwhm_fs"),
            "give exactly one of pulse_fwhm_fs and bandwidth_fwhm_nm");
    if (p.pulse_fwhm_fs) require(*p.pulse_fwhm_fs > 0.0, r.child("pulse_fwhm_fs"), "must be positive");
    if (p.bandwidth_fwhm_nm) require(*p.bandwidth_fwhm_nm > 0.0, r.child("bandwidth_fwhm_nm"), "must be positive");

    if (const Json* fp = r.find("fabry_perot")) {
        require(p.shape == PumpShape::FabryPerot, r.child("fabry_perot"), "only valid with model fabry_perot");
        ObjectReader f(*fp, r.child("fabry_perot"));
        p.fp.spacing_um = f.number("spacing_um");
        p.fp.reflectance = f.number("reflectance");
        p.fp.tilt_deg = f.number_or("tilt_deg", 0.0);
        require(p.fp.spacing_um > 0.0, f.child("spacing_um"), "must be positive");
        require(p.fp.reflectance > 0.0 && p.fp.reflectance < 1.0, f.child("reflectance"), "must lie in (0, 1)");
        require(p.fp.tilt_deg >= 0.0 && p.fp.tilt_deg < 90.0, f.child("tilt_deg"), "must lie in [0, 90)");
        f.finish();
    } else {
        require(p.shape != PumpShape::FabryPerot, r.child("fabry_perot"), "required for model fabry_perot");
    }

    if (const Json* comb = r.find("comb")) {
        require(p.shape == PumpShape::GaussianComb, r.child("comb"), "only valid with model gaussian_comb");
        ObjectReader c(*comb, r.child("comb"));
        p.comb.spacing_nm = c.number("spacing_nm");
        p.comb.peak_fwhm_nm = c.number("peak_fwhm_nm");
        p.comb.half_count = static_cast<int>(c.integer_or("half_count", 10));
        p.comb.offset_nm = c.number_or("offset_nm", 0.0);
        require(p.comb.spacing_nm > 0.0, c.child("spacing_nm"), "must be positive");
        require(p.comb.peak_fwhm_nm > 0.0, c.child("peak_fwhm_nm"), "must be positive");
        require(p.comb.half_count >= 0 && p.comb.half_count <= 1000, c.child("half_count"), "must lie in [0, 1000]");
        c.finish();
    } else {
        require(p.shape != PumpShape::GaussianComb, r.child("comb"), "required for model gaussian_comb");
    }
    r.finish();
    return p;
}

GridConfig parse_grid(const Json& j) {
    ObjectReader r(j, "grid");
    GridConfig g;
    g.points = static_cast<int>(r.integer_or("points", g.points));
    g.half_span_sigmas = r.number_or("half_span_sigmas", g.half_span_sigmas);
    require(g.points >= 16 && g.points <= 8192, r.child("points"), "must lie in [16, 8192]");
    require(g.half_span_sigmas > 0.0, r.child("half_span_sigmas"), "must be positive");
    r.finish();
    return g;
}

AnalysisConfig parse_analysis(const Json& j) {
    ObjectReader r(j, "analysis");
    AnalysisConfig a;
    if (const Json* w = r.find("window")) {
        const std::string path = r.child("window");
        if (w->is_string()) {
            const auto mode = w->get<std::string>();
            if (mode == "neighbors") {
                a.window = WindowMode::Neighbors;
            } else if (mode == "full") {
                a.window = WindowMode::Full;
            } else {
                throw ValidationError(path, "expected \"neighbors\", \"full\" or {signal_nm, idler_nm}");
            }
        } else {
            ObjectReader wr(*w, path);
            a.window = WindowMode::Wavelength;
            a.window_signal_nm = wr.number("signal_nm");
            a.window_idler_nm = wr.number("idler_nm");
            require(a.window_signal_nm > 0.0, wr.child("signal_nm"), "must be positive");
            require(a.window_idler_nm > 0.0, wr.child("idler_nm"), "must be positive");
            wr.finish();
        }
    }
    a.intensity_cut = r.number_or("intensity_cut", a.intensity_cut);
    require(a.intensity_cut >= 0.0 && a.intensity_cut < 1.0, r.child("intensity_cut"), "must lie in [0, 1)");
    a.use_modulus = r.boolean_or("use_modulus", a.use_modulus);
    a.local_points = static_cast<int>(r.integer_or("local_points", a.local_points));
    require(a.local_points >= 16 && a.local_points <= 4096, r.child("local_points"), "must lie in [16, 4096]");
    a.refinement_check = r.boolean_or("refinement_check", a.refinement_check);
    a.width_factor = r.number_or("width_factor", a.width_factor);
    require(a.width_factor > 0.0, r.child("width_factor"), "must be positive");
    r.finish();
    return a;
}

FiberConfig parse_fiber(const Json& j, const std::string& path) {
    ObjectReader r(j, path);
    FiberConfig f;
    f.table = r.string("table");
    f.length_km = r.number("length_km");
    require(f.length_km > 0.0, r.child("length_km"), "must be positive");
    r.finish();
    return f;
}

MeasurementConfig parse_measurement(const Json& j) {
    ObjectReader r(j, "measurement");
    MeasurementConfig m;
    m.signal_fiber = parse_fiber(r.required("signal_fiber"), r.child("signal_fiber"));
    m.idler_fiber = parse_fiber(r.required("idler_fiber"), r.child("idler_fiber"));
    m.jitter_ps = r.number_or("jitter_ps", m.jitter_ps);
    m.trigger_jitter_ps = r.number_or("trigger_jitter_ps", m.trigger_jitter_ps);
    m.bin_width_ps = r.number_or("bin_width_ps", m.bin_width_ps);
    const std::int64_t pairs = r.integer_or("pairs", static_cast<std::int64_t>(m.pairs));
    const std::int64_t seed = r.integer_or("seed", static_cast<std::int64_t>(m.seed));
    m.shards = static_cast<int>(r.integer_or("shards", m.shards));
    m.theory_resolution_nm = r.number_or("theory_resolution_nm", m.theory_resolution_nm);
    require(m.jitter_ps >= 0.0, r.child("jitter_ps"), "must be non-negative");
    require(m.trigger_jitter_ps >= 0.0, r.child("trigger_jitter_ps"), "must be non-negative");
    require(m.bin_width_ps > 0.0, r.child("bin_width_ps"), "must be positive");
    require(pairs >= 0, r.child("pairs"), "must be non-negative");
    require(seed >= 0, r.child("seed"), "must be non-negative");
    require(m.shards >= 1 && m.shards <= 256, r.child("shards"), "must lie in [1, 256]");
    require(m.theory_resolution_nm >= 0.0, r.child("theory_resolution_nm"), "must be non-negative");
    m.pairs = static_cast<std::uint64_t>(pairs);
    m.seed = static_cast<std::uint64_t>(seed);
    r.finish();
    return m;
}

SweepConfig parse_sweep(const Json& j) {
    ObjectReader r(j, "sweep");
    SweepConfig s;
    s.param = r.string("param");
    const Json& values = r.required("values");
    require(values.is_array() && !values.empty(), r.child("values"), "expected a non-empty array");
    for (const auto& v : values) s.values.push_back(v);
    r.finish();
    return s;
}

}  // namespace

Polarization parse_polarization(const std::string& text, const std::string& path) {
    if (text == "ordinary" || text == "o") return Polarization::Ordinary;
    if (text == "extraordinary" || text == "e") return Polarization::Extraordinary;
    throw ValidationError(path, "expected ordinary or extraordinary");
}

RunConfig parse_config(const Json& doc) {
    ObjectReader r(doc, "");
    RunConfig cfg;
    cfg.name = r.string_or("name", "run");
    require(!cfg.name.empty() && cfg.name.find('/') == std::string::npos, "name", "must be a non-empty file name");
    cfg.crystal = parse_crystal(r.required("crystal"));
    cfg.pump = parse_pump(r.required("pump"));
    if (const Json* g = r.find("grid")) cfg.grid = parse_grid(*g);
    if (const Json* a = r.find("analysis")) cfg.analysis = parse_analysis(*a);
    if (const Json* m = r.find("measurement")) cfg.measurement = parse_measurement(*m);
    if (const Json* s = r.find("sweep")) cfg.sweep = parse_sweep(*s);
    cfg.output_dir = r.string_or("output_dir", cfg.name);
    require(!cfg.output_dir.empty(), "output_dir", "must not be empty");
    r.finish();
    if (cfg.analysis.window == WindowMode::Neighbors && cfg.pump.shape == PumpShape::Gaussian)
        throw ValidationError("analysis.window", "\"neighbors\" needs a comb-structured pump");
    cfg.source = doc;
    return cfg;
}

Json read_json(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ValidationError(file.string(), "cannot open file");
    try {
        return Json::parse(in, nullptr, true, true);
    } catch (const Json::parse_error& e) {
        throw ValidationError(file.string(), std::string("invalid JSON: ") + e.what());
    }
}

RunConfig load_config(const std::filesystem::path& file) { return parse_config(read_json(file)); }

Json::json_pointer parameter_pointer(const std::string& dotted) {
    if (dotted.empty()) throw ValidationError("<param>", "empty parameter path");
    std::string pointer;
    std::stringstream ss(dotted);
    std::string part;
    while (std::getline(ss, part, '.')) {
        if (part.empty()) throw ValidationError(dotted, "malformed parameter path");
        pointer += "/" + part;
    }
    return Json::json_pointer(pointer);
}

Json with_parameter(const Json& doc, const std::string& dotted, const Json& value) {
    const auto ptr = parameter_pointer(dotted);
    if (!doc.contains(ptr.parent_pointer()) || !doc.at(ptr.parent_pointer()).is_object())
        throw ValidationError(dotted, "parameter does not exist in the configuration");
    Json out = doc;
    out[ptr] = value;
    return out;
}

}  // namespace spdc::app
