#include "spdc/app/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc::app {

SourceModel build_model(const RunConfig& cfg) {
    SourceModel m;
    const double wp = units::nm_to_omega(cfg.pump.center_nm);
    SellmeierData data = load_material(cfg.crystal.material);
    if (cfg.crystal.cut_angle_deg) {
        m.crystal.sellmeier = std::move(data);
        m.crystal.length_mm = cfg.crystal.length_mm;
        m.crystal.cut_angle = units::deg_to_rad(*cfg.crystal.cut_angle_deg);
        m.crystal.polarization = cfg.crystal.polarization;
        m.crystal.pump_center = wp;
        m.crystal.validate();
    } else {
        m.crystal = make_phase_matched_crystal(std::move(data), cfg.crystal.length_mm, wp, cfg.crystal.polarization);
    }

    const double fwhm = cfg.pump.pulse_fwhm_fs ? units::transform_limited_bandwidth(*cfg.pump.pulse_fwhm_fs)
                                               : units::nm_interval_to_omega(*cfg.pump.bandwidth_fwhm_nm, cfg.pump.center_nm);
    m.envelope = GaussianPulse::from_intensity_fwhm(wp, fwhm);

    switch (cfg.pump.shape) {
        case PumpShape::Gaussian:
            m.pump = m.envelope;
            break;
        case PumpShape::FabryPerot: {
            FabryPerot fp{cfg.pump.fp.spacing_um, cfg.pump.fp.reflectance, units::deg_to_rad(cfg.pump.fp.tilt_deg)};
            fp.validate();
            m.pump = ShapedPump{m.envelope, fp};
            m.comb_spacing = free_spectral_range(fp);
            m.peak_sigma = fp_peak_fwhm(fp) / (2.0 * std::sqrt(std::numbers::ln2));
            break;
        }
        case PumpShape::GaussianComb: {
            const double spacing = units::nm_interval_to_omega(cfg.pump.comb.spacing_nm, cfg.pump.center_nm);
            const double peak_fwhm = units::nm_interval_to_omega(cfg.pump.comb.peak_fwhm_nm, cfg.pump.center_nm);
            const double sigma = peak_fwhm / (2.0 * std::sqrt(std::numbers::ln2));
            const double offset = units::nm_to_omega(cfg.pump.center_nm + cfg.pump.comb.offset_nm) - wp;
            m.pump = GaussianComb::under_envelope(m.envelope, spacing, sigma, cfg.pump.comb.half_count, offset);
            m.comb_spacing = spacing;
            m.peak_sigma = sigma;
            break;
        }
    }
    return m;
}

FrequencyGrid full_grid(const RunConfig& cfg, const SourceModel& model, std::optional<int> points) {
    const int n = points.value_or(cfg.grid.points);
    const double center = 0.5 * model.crystal.pump_center;
    const double half = cfg.grid.half_span_sigmas * model.envelope.sigma;
    return FrequencyGrid::centered(center, half, n, center, half, n);
}

Peak brightest_peak(const TpsaGrid& tpsa) {
    const auto peaks = find_peaks(tpsa);
    if (!peaks.empty()) return peaks.front();
    // No strict interior maximum (e.g. the brightest cell is on the border).
    const RealMatrix intensity = tpsa.intensity();
    Eigen::Index r = 0;
    Eigen::Index c = 0;
    const double top = intensity.maxCoeff(&r, &c);
    if (!(top > 0.0)) throw DegenerateInput("tpsa: grid carries no intensity");
    return {static_cast<int>(r), static_cast<int>(c), tpsa.grid.signal()[r], tpsa.grid.idler()[c], top};
}

namespace {

double nearest_line(const SourceModel& model, double sum) {
    if (const auto* shaped = std::get_if<ShapedPump>(&model.pump)) return nearest_resonance(shaped->fp, sum);
    const auto& comb = std::get<GaussianComb>(model.pump);
    auto it = std::min_element(comb.centers.begin(), comb.centers.end(),
                               [&](double a, double b) { return std::abs(a - sum) < std::abs(b - sum); });
    return *it;
}

// Signal frequency where dk vanishes on the line w_s + w_i = sum, starting
// from the linearized ridge estimate.
double ridge_crossing(const CrystalSpec& crystal, double sum, double guess) {
    auto g = [&](double ws) { return delta_kz(crystal, ws, sum - ws); };
    double ws = guess;
    const double h = 1e-5;
    for (int i = 0; i < 30; ++i) {
        const double f = g(ws);
        const double df = (g(ws + h) - g(ws - h)) / (2.0 * h);
        if (df == 0.0) break;
        const double step = f / df;
        ws -= step;
        if (std::abs(step) < 1e-13) return ws;
    }
    return std::abs(g(ws)) < std::abs(g(guess)) ? ws : guess;
}

double boundary_fraction(const TpsaGrid& tpsa) {
    const RealMatrix intensity = tpsa.intensity();
    const double top = intensity.maxCoeff();
    if (!(top > 0.0)) return 0.0;
    const Eigen::Index n = intensity.rows() - 1;
    const Eigen::Index m = intensity.cols() - 1;
    const double edge = std::max({intensity.row(0).maxCoeff(), intensity.row(n).maxCoeff(),
                                  intensity.col(0).maxCoeff(), intensity.col(m).maxCoeff()});
    return edge / top;
}

}  // namespace

SpotWindow locate_spot(const RunConfig& cfg, const SourceModel& model, const Peak& brightest) {
    SpotWindow w;
    w.center = {brightest.omega_s, brightest.omega_i};
    const double wp = model.crystal.pump_center;
    const double t = std::tan(tpsa_tilt(model.crystal));

    if (model.comb_spacing) {
        const double line = nearest_line(model, brightest.omega_s + brightest.omega_i);
        if (std::abs(1.0 + t) > 1e-6) {
            const double guess = 0.5 * wp + (line - wp) / (1.0 + t);
            const double ws = ridge_crossing(model.crystal, line, guess);
            w.center = {ws, line - ws};
        }
    }

    switch (cfg.analysis.window) {
        case WindowMode::Neighbors: {
            if (!model.comb_spacing) throw NotApplicable("neighbors window needs a comb-structured pump");
            const double step_s = *model.comb_spacing / (1.0 + t);
            const double step_i = t * step_s;
            if (!(std::abs(t) > 0.05 && std::abs(1.0 + t) > 0.05)) {
                std::ostringstream os;
                os << "neighbors window: adjacent spots are not separated along both axes (tilt "
                   << units::rad_to_deg(std::atan(t)) << " deg); use a wavelength window";
                throw NotApplicable(os.str());
            }
            w.full_width = {std::abs(step_s), std::abs(step_i)};
            break;
        }
        case WindowMode::Wavelength: {
            const double ls = units::omega_to_nm(w.center.first);
            const double li = units::omega_to_nm(w.center.second);
            w.full_width = {units::nm_interval_to_omega(cfg.analysis.window_signal_nm, ls),
                            units::nm_interval_to_omega(cfg.analysis.window_idler_nm, li)};
            break;
        }
        case WindowMode::Full: {
            const FrequencyGrid g = full_grid(cfg, model);
            w.center = {0.5 * (g.signal().front() + g.signal().back()), 0.5 * (g.idler().front() + g.idler().back())};
            w.full_width = {g.signal().back() - g.signal().front(), g.idler().back() - g.idler().front()};
            break;
        }
    }
    return w;
}

namespace {

struct LocalResult {
    TpsaGrid isolated;
    SchmidtDecomposition decomposition;
    double edge = 0.0;
};

LocalResult local_schmidt(const RunConfig& cfg, const SourceModel& model, const SpotWindow& w, int n) {
    const FrequencyGrid grid = FrequencyGrid::centered(w.center.first, 0.5 * w.full_width.first, n, w.center.second,
                                                       0.5 * w.full_width.second, n);
    const TpsaGrid local = build_tpsa(model.crystal, model.pump, grid);
    LocalResult out;
    out.edge = boundary_fraction(local);
    out.isolated = isolate_peak(local, w.center, w.full_width, cfg.analysis.intensity_cut);
    out.decomposition = decompose(out.isolated, cfg.analysis.use_modulus);
    return out;
}

}  // namespace

PeakAnalysis analyze_peak(const RunConfig& cfg, const SourceModel& model, const Peak& brightest) {
    PeakAnalysis a;
    a.brightest = brightest;
    a.window = locate_spot(cfg, model, brightest);
    LocalResult r = local_schmidt(cfg, model, a.window, cfg.analysis.local_points);
    a.isolated = std::move(r.isolated);
    a.decomposition = std::move(r.decomposition);
    a.schmidt_number = a.decomposition.schmidt_number;
    a.edge_intensity = r.edge;
    if (cfg.analysis.refinement_check)
        a.refined_schmidt_number = local_schmidt(cfg, model, a.window, 2 * cfg.analysis.local_points).decomposition.schmidt_number;
    return a;
}

RunResult run_pipeline(const RunConfig& cfg) {
    RunResult res;
    res.model = build_model(cfg);
    res.full = normalize(build_tpsa(res.model.crystal, res.model.pump, full_grid(cfg, res.model)));
    res.tilt = tpsa_tilt(res.model.crystal);
    res.tilt_estimate = tilt_estimate(res.full);
    res.peak = analyze_peak(cfg, res.model, brightest_peak(res.full));
    if (res.model.comb_spacing && res.model.peak_sigma) {
        try {
            res.gaussian_peak = gaussian_peak_for(res.model.crystal, *res.model.peak_sigma, cfg.analysis.width_factor);
            res.margins = separation_margins(*res.gaussian_peak, *res.model.comb_spacing);
        } catch (const NotApplicable& e) {
            res.margins_note = e.what();
        }
    } else {
        res.margins_note = "separation margins need a comb-structured pump";
    }
    return res;
}

}  // namespace spdc::app
