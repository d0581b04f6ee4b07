#pragma once

#include <optional>
#include <string>

#include "spdc/app/config.hpp"
#include "spdc/dispersion.hpp"
#include "spdc/gaussian_model.hpp"
#include "spdc/pump.hpp"
#include "spdc/schmidt.hpp"
#include "spdc/tpsa.hpp"

namespace spdc::app {

/// Physical objects built from a RunConfig.
struct SourceModel {
    CrystalSpec crystal;
    PumpModel pump;
    GaussianPulse envelope;
    std::optional<double> comb_spacing;  // rad/fs, for comb-structured pumps
    std::optional<double> peak_sigma;    // rad/fs, one comb line as exp(-w^2 / (2 s^2))
};

SourceModel build_model(const RunConfig& cfg);

/// Square grid of cfg.grid.points around degeneracy (or `points` when given).
FrequencyGrid full_grid(const RunConfig& cfg, const SourceModel& model, std::optional<int> points = std::nullopt);

struct SpotWindow {
    std::pair<double, double> center;      // rad/fs
    std::pair<double, double> full_width;  // rad/fs
};

/// Locates the spot belonging to the comb line nearest `near_sum` (= w_s + w_i).
/// The center solves dk = 0 on the line w_s + w_i = w_m; the neighbors-mode
/// window reaches halfway to the adjacent spots along each axis.
SpotWindow locate_spot(const RunConfig& cfg, const SourceModel& model, const Peak& brightest);

struct PeakAnalysis {
    Peak brightest;         // brightest local maximum of the full grid
    SpotWindow window;
    TpsaGrid isolated;      // local grid after windowing and cut
    SchmidtDecomposition decomposition;
    double schmidt_number = 1.0;
    double edge_intensity = 0.0;  // max |F|^2 on the window boundary over the in-window max
    std::optional<double> refined_schmidt_number;  // at twice the local resolution
};

/// Single-spot Schmidt analysis around `brightest`.
PeakAnalysis analyze_peak(const RunConfig& cfg, const SourceModel& model, const Peak& brightest);

struct RunResult {
    SourceModel model;
    TpsaGrid full;
    double tilt = 0.0;  // radians, from group velocities
    std::optional<TiltEstimate> tilt_estimate;
    PeakAnalysis peak;
    std::optional<DoubleGaussianPeak> gaussian_peak;
    std::optional<SeparationMargins> margins;
    std::string margins_note;  // why margins are absent
};

/// Full pipeline: model, full grid, brightest spot, Schmidt analysis, margins.
RunResult run_pipeline(const RunConfig& cfg);

/// Brightest strict local maximum of |F|^2 on the grid.
Peak brightest_peak(const TpsaGrid& tpsa);

}  // namespace spdc::app
