#pragma once

#include <vector>

#include "spdc/dispersion.hpp"
#include "spdc/pump.hpp"
#include "spdc/tpsa.hpp"

namespace spdc {

/// Single TPSA spot approximated by
///   exp(-(sin a w_s - cos a w_i)^2 / (2 sc^2) - (w_s + w_i)^2 / (2 sp^2)),
/// frequencies measured from the spot center.
struct DoubleGaussianPeak {
    double tilt = 0.0;          // alpha, radians in (-pi/2, pi/2]
    double sigma_c = 1.0;       // phase-matching width, rad/fs
    double sigma_p = 1.0;       // pump-peak width, rad/fs

    void validate() const;
};

struct WeightedPeak {
    Complex amplitude{1.0, 0.0};
    double x = 0.0;  // signal center, rad/fs
    double y = 0.0;  // idler center, rad/fs
};

/// sum_i A_i exp(-(x - x_i)^2 / (2 s^2)) exp(-(y - y_i)^2 / (2 s^2)).
struct MultiPeakModel {
    std::vector<WeightedPeak> peaks;
    double sigma = 1.0;

    /// Smallest |x_i - x_j| and |y_i - y_j| over all pairs (infinite for one peak).
    std::pair<double, double> min_separation() const;
    Complex amplitude(double x, double y) const;
};

double peak_amplitude(const DoubleGaussianPeak& peak, double omega_s, double omega_i);

/// Coefficient of w_s w_i in the exponent: sin(2a)/(2 sc^2) - 1/sp^2.
/// Zero exactly when the spot's elliptical cross-section is axis aligned,
/// i.e. when sin(2a) = 2 sc^2 / sp^2.
double alignment_residual(const DoubleGaussianPeak& peak);

/// Pump-peak width that zeroes the alignment residual for the given tilt and sigma_c.
double aligned_sigma_p(double tilt, double sigma_c);

/// Spot-separation ratios for comb spacing `delta_omega`. Each is the
/// projected spacing divided by the corresponding spot width:
///   first  = dw cos a (cos^2 a / sc^2 + 1/(2 sp^2))^(1/2)
///   second = dw sin a (sin^2 a / sc^2 + 1/(2 sp^2))^(1/2)
/// Values much larger than one mean the spots do not overlap.
struct SeparationMargins {
    double first = 0.0;
    double second = 0.0;

    double binding() const { return first < second ? first : second; }
};

/// Requires 0 < alpha < 90 deg; throws NotApplicable otherwise.
SeparationMargins separation_margins(const DoubleGaussianPeak& peak, double delta_omega);

/// Half-maximum abscissa of sinc^2(x): sinc^2(x) = 1/2.
double sinc2_half_width();

/// Gaussian width matching the sinc^2 phase-matching profile at half
/// maximum along the ridge normal:
///   sigma_c = width_factor * 2 x_h / (|gamma| L sqrt(ln 2)),
/// where |gamma| = sqrt(gamma_s^2 + gamma_i^2), x_h = sinc2_half_width().
/// `width_factor` = 1 is the FWHM-matching rule.
double sigma_c_from_crystal(const CrystalSpec& crystal, double width_factor = 1.0);

/// Builds the Gaussian-model spot of a crystal and a single pump peak of
/// amplitude width `pump_peak_sigma` (exp(-w^2 / (2 sigma^2)) convention).
DoubleGaussianPeak gaussian_peak_for(const CrystalSpec& crystal, double pump_peak_sigma, double width_factor = 1.0);

/// Analytic Schmidt coefficients of disjoint Gaussian peaks, lambda_n ~ |A_n|^2,
/// in descending order. Throws NotDisjoint when any pair of
/// centers is closer than `min_separation_sigmas` * sigma on either axis.
std::vector<double> disjoint_sum_schmidt(const MultiPeakModel& model, double min_separation_sigmas = 6.0);

/// Samples a model onto a grid.
TpsaGrid rasterize(const MultiPeakModel& model, const FrequencyGrid& grid);
TpsaGrid rasterize(const DoubleGaussianPeak& peak, const FrequencyGrid& grid);

}  // namespace spdc
