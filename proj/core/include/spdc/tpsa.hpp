#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spdc/dispersion.hpp"
#include "spdc/pump.hpp"

namespace spdc {

using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

/// Uniform rectangular grid over (w_s, w_i), rad/fs.
class FrequencyGrid {
public:
    FrequencyGrid() = default;
    FrequencyGrid(std::vector<double> signal, std::vector<double> idler);

    /// `n` samples spanning [center - half_span, center + half_span] on each axis.
    static FrequencyGrid centered(double signal_center, double signal_half_span, int n_signal,
                                  double idler_center, double idler_half_span, int n_idler);

    const std::vector<double>& signal() const { return signal_; }
    const std::vector<double>& idler() const { return idler_; }
    int n_signal() const { return static_cast<int>(signal_.size()); }
    int n_idler() const { return static_cast<int>(idler_.size()); }
    double signal_step() const { return signal_[1] - signal_[0]; }
    double idler_step() const { return idler_[1] - idler_[0]; }
    double cell_area() const { return signal_step() * idler_step(); }

private:
    std::vector<double> signal_;
    std::vector<double> idler_;
};

/// Complex two-photon amplitude sampled on a FrequencyGrid; rows follow the
/// signal axis, columns the idler axis.
struct TpsaGrid {
    FrequencyGrid grid;
    ComplexMatrix amplitude;
    bool normalized = false;

    RealMatrix intensity() const { return amplitude.cwiseAbs2(); }
    /// sum |F|^2 dw_s dw_i
    double power() const;
};

/// sin(x)/x with a series branch for |x| < 1e-4.
double sinc(double x);

/// exp(i dk L/2) F_p(w_s + w_i) sinc(dk L/2) on every grid cell.
TpsaGrid build_tpsa(const CrystalSpec& crystal, const PumpModel& pump, const FrequencyGrid& grid);

/// Default grid: n x n samples over +-4 pump-envelope sigmas around degeneracy.
FrequencyGrid default_grid(const CrystalSpec& crystal, double envelope_sigma, int n = 512);

TpsaGrid normalize(const TpsaGrid& tpsa);

/// Zeroes everything outside the rectangular window (full widths, rad/fs)
/// centered on `center` and every cell whose intensity is not strictly above
/// `intensity_cut` times the in-window maximum, then renormalizes.
TpsaGrid isolate_peak(const TpsaGrid& tpsa, std::pair<double, double> center, std::pair<double, double> window,
                      double intensity_cut);

struct Marginals {
    std::vector<double> signal;  // sum_i |F|^2 dw_i
    std::vector<double> idler;   // sum_s |F|^2 dw_s
};

Marginals marginals(const TpsaGrid& tpsa);

struct TiltEstimate {
    double angle = 0.0;       // radians in (-pi/2, pi/2], from the signal axis
    double anisotropy = 0.0;  // 1 - minor/major eigenvalue of the covariance
    int cells = 0;            // size of the analysed region
};

/// Principal-axis angle of the |F|^2 covariance over the region connected to
/// the brightest cell (8-neighbourhood, intensity above `threshold` x max).
/// Returns nullopt when the region is isotropic (anisotropy below `min_anisotropy`).
std::optional<TiltEstimate> tilt_estimate(const TpsaGrid& tpsa, double threshold = 5e-3,
                                          double min_anisotropy = 0.05);

/// A local maximum of |F|^2.
struct Peak {
    int row = 0;
    int col = 0;
    double omega_s = 0.0;
    double omega_i = 0.0;
    double intensity = 0.0;
};

/// Strict local maxima (8-neighbourhood) above `min_fraction` of the global
/// maximum, brightest first.
std::vector<Peak> find_peaks(const TpsaGrid& tpsa, double min_fraction = 0.05);

}  // namespace spdc
