#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "spdc/dispersion.hpp"
#include "spdc/tpsa.hpp"

namespace spdc {

struct FiberSpec {
    double length_km = 1.0;
    FiberDispersion dispersion;

    void validate() const;
};

/// Signal photon and idler photon each travel through their own fiber.
struct FiberPair {
    FiberSpec signal;
    FiberSpec idler;
};

struct DetectorChain {
    double jitter_ps = 0.0;          // Gaussian sigma of each detector
    double trigger_jitter_ps = 0.0;  // sigma of the common trigger
    double bin_width_ps = 10.0;
    std::uint64_t total_pairs = 0;

    void validate() const;
    /// sigma of a single arrival-time measurement relative to the trigger.
    double timing_sigma_ps() const;
};

/// Wavelengths around which the frequency-to-time map is linearized.
struct BandCenters {
    double signal_nm = 0.0;
    double idler_nm = 0.0;

    /// Mid-points of the grid axes.
    static BandCenters of(const FrequencyGrid& grid);
};

/// Arrival time (ps) of detuning `detuning` (rad/fs) around `center_nm`:
/// t = k''(center) l detuning.
double time_map(const FiberSpec& fiber, double detuning, double center_nm);

/// Inverse of time_map: detuning (rad/fs) of arrival time `t_ps`.
double detuning_from_time(const FiberSpec& fiber, double t_ps, double center_nm);

/// Wavelength (nm) of arrival time `t_ps` for a photon band centered at `center_nm`.
double time_to_wavelength(const FiberSpec& fiber, double t_ps, double center_nm);

/// Regular bin edges in ps.
struct TimeAxis {
    double min_ps = 0.0;
    double max_ps = 0.0;
    int bins = 0;

    double width() const { return (max_ps - min_ps) / bins; }
    double center(int k) const { return min_ps + (k + 0.5) * width(); }
    /// Bin index, or -1 outside [min, max).
    int locate(double t_ps) const;
};

struct HistogramAxes {
    TimeAxis signal;
    TimeAxis idler;
};

/// Axes covering the time image of the grid plus six timing sigmas, with
/// bins of the chain's bin width.
HistogramAxes default_axes(const FrequencyGrid& grid, const FiberPair& fibers, const DetectorChain& chain,
                           const BandCenters& centers);

struct ArrivalHistogram {
    HistogramAxes axes;
    std::vector<std::uint64_t> counts;  // signal-major: counts[s * idler.bins + i]
    std::uint64_t overflow = 0;         // pairs landing outside the axes
    std::uint64_t seed = 0;
    std::uint64_t pairs = 0;
    DetectorChain chain;
    BandCenters centers;
    double signal_scale_fs2 = 0.0;  // k''_s l, recorded for consistency checks
    double idler_scale_fs2 = 0.0;

    std::uint64_t at(int s, int i) const { return counts[static_cast<std::size_t>(s) * axes.idler.bins + i]; }
    std::uint64_t total() const;
};

/// Monte-Carlo registration: draws `chain.total_pairs` cells from |F|^2, places
/// each uniformly inside its cell, maps both photons to arrival times, adds
/// independent detector jitter and a common trigger jitter, and bins. The
/// quadratic spectral phase acquired in the fiber does not enter: only |F|^2
/// is sampled. Output depends only on (tpsa, fibers, chain, centers, axes,
/// seed), not on `shards`.
ArrivalHistogram simulate_histogram(const TpsaGrid& tpsa, const FiberPair& fibers, const DetectorChain& chain,
                                    std::uint64_t seed, std::optional<BandCenters> centers = std::nullopt,
                                    std::optional<HistogramAxes> axes = std::nullopt, int shards = 1);

/// Exact expected bin probabilities of simulate_histogram (sums to at most 1).
std::vector<double> expected_histogram(const TpsaGrid& tpsa, const FiberPair& fibers, const DetectorChain& chain,
                                       const BandCenters& centers, const HistogramAxes& axes);

struct WavelengthHistogram {
    std::vector<double> signal_edges_nm;  // ascending
    std::vector<double> idler_edges_nm;
    std::vector<std::uint64_t> counts;    // signal-major, rows follow signal_edges_nm
    double signal_resolution_nm = 0.0;
    double idler_resolution_nm = 0.0;
};

/// Effective spectral resolution (FWHM, nm) of a timing chain at `center_nm`.
double effective_resolution_nm(const FiberSpec& fiber, const DetectorChain& chain, double center_nm);

/// Relabels a time histogram in wavelength by inverting the fiber map.
WavelengthHistogram time_to_wavelength(const ArrivalHistogram& histogram, const FiberPair& fibers,
                                       const BandCenters& centers);

/// Gaussian blur with FWHM `resolution_nm` along both axes. Each input cell
/// spreads its power with a kernel normalized over the grid, so the total is
/// conserved.
RealMatrix blur_to_resolution(const RealMatrix& intensity, const FrequencyGrid& grid, double resolution_nm);

}  // namespace spdc
