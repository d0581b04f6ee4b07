#pragma once

// Internal unit system: angular frequency in rad/fs, length in mm, time in fs.
// The helpers below are the only place where nm, um, ps or km appear.

#include <cmath>
#include <numbers>

namespace spdc {

/// Vacuum speed of light in mm/fs.
inline constexpr double kSpeedOfLight = 2.99792458e-4;

/// Vacuum speed of light in nm/fs, used by wavelength conversions.
inline constexpr double kSpeedOfLightNmPerFs = 299.792458;

inline constexpr double kPi = std::numbers::pi;

/// 2*sqrt(2 ln 2): ratio between FWHM and standard deviation of a Gaussian.
inline const double kFwhmPerSigma = 2.0 * std::sqrt(2.0 * std::numbers::ln2);

namespace units {

inline constexpr double um_to_mm(double um) { return um * 1e-3; }
inline constexpr double mm_to_um(double mm) { return mm * 1e3; }
inline constexpr double km_to_mm(double km) { return km * 1e6; }
inline constexpr double ps_to_fs(double ps) { return ps * 1e3; }
inline constexpr double fs_to_ps(double fs) { return fs * 1e-3; }
inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Vacuum wavelength (nm) to angular frequency (rad/fs).
inline double nm_to_omega(double nm) { return 2.0 * kPi * kSpeedOfLightNmPerFs / nm; }

/// Angular frequency (rad/fs) to vacuum wavelength (nm).
inline double omega_to_nm(double omega) { return 2.0 * kPi * kSpeedOfLightNmPerFs / omega; }

inline double nm_to_um(double nm) { return nm * 1e-3; }

/// Local linear conversion of a wavelength interval (nm) around `center_nm`
/// into an angular-frequency interval (rad/fs): |dw| = 2 pi c |dl| / l^2.
inline double nm_interval_to_omega(double delta_nm, double center_nm) {
    return 2.0 * kPi * kSpeedOfLightNmPerFs * delta_nm / (center_nm * center_nm);
}

inline double omega_interval_to_nm(double delta_omega, double center_nm) {
    return delta_omega * center_nm * center_nm / (2.0 * kPi * kSpeedOfLightNmPerFs);
}

/// Fiber dispersion parameter D: ps/(nm km) -> fs/(nm mm).
inline constexpr double ps_per_nm_km_to_internal(double d) { return d * 1e-3; }
inline constexpr double internal_to_ps_per_nm_km(double d) { return d * 1e3; }

/// Spectral intensity FWHM (rad/fs) of a transform-limited Gaussian pulse
/// whose temporal intensity FWHM is `duration_fs` (time-bandwidth product 2 ln2 / pi).
inline double transform_limited_bandwidth(double duration_fs) {
    return 4.0 * std::numbers::ln2 / duration_fs;
}

}  // namespace units
}  // namespace spdc
