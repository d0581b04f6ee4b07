#pragma once

#include <vector>

#include "spdc/tpsa.hpp"

namespace spdc {

/// Schmidt decomposition of a sampled two-photon amplitude,
/// F(w_s, w_i) = sum_n sqrt(lambda_n) f_n^s(w_s) f_n^i(w_i).
struct SchmidtDecomposition {
    std::vector<double> coefficients;  // lambda_n, descending, only those above 1e-12
    ComplexMatrix signal_modes;        // column n samples f_n^s on the signal axis
    ComplexMatrix idler_modes;         // column n samples f_n^i on the idler axis
    double schmidt_number = 1.0;       // from the full singular spectrum
    FrequencyGrid grid;

    int size() const { return static_cast<int>(coefficients.size()); }

    /// sum |f_n^s|^2 w dw over the signal axis.
    double signal_centroid(int n) const;
    double idler_centroid(int n) const;
};

/// Coefficients at or below this value are dropped from the reported spectrum.
inline constexpr double kCoefficientFloor = 1e-12;

/// SVD of sqrt(dw_s) F sqrt(dw_i); with `use_modulus` the SVD runs on |F|.
/// Requires a normalized grid.
SchmidtDecomposition decompose(const TpsaGrid& tpsa, bool use_modulus = true);

/// 1 / sum lambda^2 for a probability vector.
double schmidt_number(const std::vector<double>& lambda);

/// Discretized K1(x, x') = int dy F(x, y) F*(x', y) including the grid measure,
/// so its eigenvalues are the Schmidt coefficients.
ComplexMatrix kernel(const TpsaGrid& tpsa, bool use_modulus = false);

/// int |f_m^s| |f_n^s| dw over the signal axis.
double mode_overlap(const SchmidtDecomposition& decomposition, int m, int n);

/// sum_n sqrt(lambda_n) f_n^s f_n^i over the kept modes.
ComplexMatrix reconstruct(const SchmidtDecomposition& decomposition);

}  // namespace spdc
