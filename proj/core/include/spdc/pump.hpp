#pragma once

#include <complex>
#include <variant>
#include <vector>

namespace spdc {

using Complex = std::complex<double>;

/// Gaussian pump pulse. The amplitude is exp(-(w - w0)^2 / (4 sigma^2)), so the
/// spectral *intensity* is exp(-(w - w0)^2 / (2 sigma^2)) and its FWHM equals
/// 2 sqrt(2 ln 2) sigma.
struct GaussianPulse {
    double center = 0.0;  // rad/fs
    double sigma = 1.0;   // rad/fs

    static GaussianPulse from_intensity_fwhm(double center, double fwhm);
    double intensity_fwhm() const;
    void validate() const;
};

/// Plane-parallel Fabry-Perot etalon with identical mirrors.
struct FabryPerot {
    double spacing_um = 100.0;
    double reflectance = 0.5;  // effective intensity reflectance of each mirror
    double tilt = 0.0;         // radians

    void validate() const;
};

/// Sum of Gaussian peaks, sum_i A_i exp(-(w - w_i)^2 / (2 sigma^2)).
struct GaussianComb {
    std::vector<double> centers;  // rad/fs, strictly increasing
    double sigma = 1.0;           // rad/fs
    std::vector<Complex> amplitudes;

    /// Peaks at `center + k * spacing` for |k| <= half_count, each weighted by
    /// the envelope amplitude at its own center.
    static GaussianComb under_envelope(const GaussianPulse& envelope, double spacing, double sigma,
                                       int half_count, double offset = 0.0);
    double spacing() const;
    void validate() const;
};

Complex gaussian_amplitude(const GaussianPulse& pulse, double omega);

/// (1 - R) / (1 - R exp(-2 i w d cos(phi) / c)).
Complex fp_transmission(const FabryPerot& fp, double omega);

/// Spacing of adjacent transmission maxima, pi c / (d cos phi), in rad/fs.
double free_spectral_range(const FabryPerot& fp);

/// Intensity FWHM (rad/fs) of one Airy transmission peak, exact for the
/// formula above: 4 arcsin((1 - R) / (2 sqrt R)) / (2 d cos(phi) / c).
double fp_peak_fwhm(const FabryPerot& fp);

/// Resonance frequency m * FSR closest to `omega`.
double nearest_resonance(const FabryPerot& fp, double omega);

Complex shaped_pump(const GaussianPulse& pulse, const FabryPerot& fp, double omega);

Complex comb_amplitude(const GaussianComb& comb, double omega);

/// Gaussian pulse filtered by a Fabry-Perot etalon.
struct ShapedPump {
    GaussianPulse pulse;
    FabryPerot fp;
};

/// Any supported pump spectrum. Evaluated at the absolute pump frequency.
using PumpModel = std::variant<GaussianPulse, ShapedPump, GaussianComb>;

Complex pump_amplitude(const PumpModel& model, double omega);

/// Center frequency of the underlying pulse or comb envelope.
double pump_center(const PumpModel& model);

}  // namespace spdc
