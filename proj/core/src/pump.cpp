#include "spdc/pump.hpp"

#include <cmath>

#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc {

GaussianPulse GaussianPulse::from_intensity_fwhm(double center, double fwhm) {
    GaussianPulse p{center, fwhm / kFwhmPerSigma};
    p.validate();
    return p;
}

double GaussianPulse::intensity_fwhm() const { return kFwhmPerSigma * sigma; }

void GaussianPulse::validate() const {
    if (!(sigma > 0.0)) throw ContractError("Gaussian pulse width must be positive");
}

void FabryPerot::validate() const {
    if (!(spacing_um > 0.0)) throw ContractError("Fabry-Perot spacing must be positive");
    if (!(reflectance > 0.0 && reflectance < 1.0)) throw ContractError("Fabry-Perot reflectance must lie in (0, 1)");
    if (!(std::abs(tilt) < kPi / 2)) throw ContractError("Fabry-Perot tilt must lie in (-90, 90) degrees");
}

Complex gaussian_amplitude(const GaussianPulse& pulse, double omega) {
    const double x = omega - pulse.center;
    return {std::exp(-x * x / (4.0 * pulse.sigma * pulse.sigma)), 0.0};
}

namespace {

// Round-trip phase 2 w d cos(phi) / c per unit frequency, in fs.
double round_trip_delay(const FabryPerot& fp) {
    return 2.0 * units::um_to_mm(fp.spacing_um) * std::cos(fp.tilt) / kSpeedOfLight;
}

}  // namespace

Complex fp_transmission(const FabryPerot& fp, double omega) {
    const double phase = omega * round_trip_delay(fp);
    const double r = fp.reflectance;
    // Phase reduced to [-pi, pi] before exponentiation.
    const double reduced = std::remainder(phase, 2.0 * kPi);
    const Complex denom = 1.0 - r * std::polar(1.0, -reduced);
    return (1.0 - r) / denom;
}

double free_spectral_range(const FabryPerot& fp) {
    return kPi * kSpeedOfLight / (units::um_to_mm(fp.spacing_um) * std::cos(fp.tilt));
}

double fp_peak_fwhm(const FabryPerot& fp) {
    const double r = fp.reflectance;
    const double s = (1.0 - r) / (2.0 * std::sqrt(r));
    if (s >= 1.0) return free_spectral_range(fp);  // peaks never fall to half maximum
    return 4.0 * std::asin(s) / round_trip_delay(fp);
}

double nearest_resonance(const FabryPerot& fp, double omega) {
    const double fsr = free_spectral_range(fp);
    return std::round(omega / fsr) * fsr;
}

Complex shaped_pump(const GaussianPulse& pulse, const FabryPerot& fp, double omega) {
    return gaussian_amplitude(pulse, omega) * fp_transmission(fp, omega);
}

GaussianComb GaussianComb::under_envelope(const GaussianPulse& envelope, double spacing, double sigma,
                                          int half_count, double offset) {
    GaussianComb comb;
    comb.sigma = sigma;
    for (int k = -half_count; k <= half_count; ++k) {
        const double center = envelope.center + offset + k * spacing;
        comb.centers.push_back(center);
        comb.amplitudes.push_back(gaussian_amplitude(envelope, center));
    }
    comb.validate();
    return comb;
}

double GaussianComb::spacing() const {
    return centers.size() < 2 ? 0.0 : centers[1] - centers[0];
}

void GaussianComb::validate() const {
    if (centers.empty()) throw ContractError("Gaussian comb needs at least one peak");
    if (centers.size() != amplitudes.size()) throw ContractError("Gaussian comb: one amplitude per peak");
    if (!(sigma > 0.0)) throw ContractError("Gaussian comb: peak width must be positive");
    for (std::size_t i = 1; i < centers.size(); ++i)
        if (!(centers[i] > centers[i - 1])) throw ContractError("Gaussian comb: centers must be strictly increasing");
}

Complex comb_amplitude(const GaussianComb& comb, double omega) {
    Complex sum{0.0, 0.0};
    const double inv = 1.0 / (2.0 * comb.sigma * comb.sigma);
    for (std::size_t i = 0; i < comb.centers.size(); ++i) {
        const double x = omega - comb.centers[i];
        sum += comb.amplitudes[i] * std::exp(-x * x * inv);
    }
    return sum;
}

Complex pump_amplitude(const PumpModel& model, double omega) {
    struct Visitor {
        double omega;
        Complex operator()(const GaussianPulse& p) const { return gaussian_amplitude(p, omega); }
        Complex operator()(const ShapedPump& p) const { return shaped_pump(p.pulse, p.fp, omega); }
        Complex operator()(const GaussianComb& c) const { return comb_amplitude(c, omega); }
    };
    return std::visit(Visitor{omega}, model);
}

double pump_center(const PumpModel& model) {
    struct Visitor {
        double operator()(const GaussianPulse& p) const { return p.center; }
        double operator()(const ShapedPump& p) const { return p.pulse.center; }
        double operator()(const GaussianComb& c) const {
            return 0.5 * (c.centers.front() + c.centers.back());
        }
    };
    return std::visit(Visitor{}, model);
}

}  // namespace spdc
