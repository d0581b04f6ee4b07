#include "spdc/schmidt.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/SVD>

#include "spdc/errors.hpp"

namespace spdc {

namespace {

void require_normalized(const TpsaGrid& tpsa) {
    if (!tpsa.amplitude.allFinite()) throw DataError("decompose: amplitude contains non-finite entries");
    const double p = tpsa.power();
    if (!tpsa.normalized || std::abs(p - 1.0) > 1e-8) {
        std::ostringstream os;
        os << "decompose: input must be normalized (power = " << p << ")";
        throw ContractError(os.str());
    }
}

double centroid(const ComplexMatrix& modes, int n, const std::vector<double>& axis) {
    double num = 0.0;
    double den = 0.0;
    for (int k = 0; k < modes.rows(); ++k) {
        const double w = std::norm(modes(k, n));
        num += w * axis[static_cast<std::size_t>(k)];
        den += w;
    }
    return den > 0.0 ? num / den : 0.0;
}

// Within a block of equal coefficients any unitary mix of the modes is a valid
// decomposition. Rotate to the eigenbasis of the signal-frequency operator
// restricted to the block: this localizes modes with disjoint supports and
// orders them by ascending signal centroid.
void resolve_degenerate_block(ComplexMatrix& u, ComplexMatrix& v, int first, int count,
                              const std::vector<double>& signal_axis) {
    ComplexMatrix x(count, count);
    for (int a = 0; a < count; ++a) {
        for (int b = 0; b < count; ++b) {
            Complex sum{0.0, 0.0};
            for (int k = 0; k < u.rows(); ++k)
                sum += std::conj(u(k, first + a)) * signal_axis[static_cast<std::size_t>(k)] * u(k, first + b);
            x(a, b) = sum;
        }
    }
    x = 0.5 * (x + x.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(x);
    const ComplexMatrix w = eig.eigenvectors();
    u.middleCols(first, count) = (u.middleCols(first, count) * w).eval();
    v.middleCols(first, count) = (v.middleCols(first, count) * w).eval();
}

}  // namespace

double SchmidtDecomposition::signal_centroid(int n) const { return centroid(signal_modes, n, grid.signal()); }

double SchmidtDecomposition::idler_centroid(int n) const { return centroid(idler_modes, n, grid.idler()); }

SchmidtDecomposition decompose(const TpsaGrid& tpsa, bool use_modulus) {
    require_normalized(tpsa);
    const double ds = tpsa.grid.signal_step();
    const double di = tpsa.grid.idler_step();
    const double weight = std::sqrt(ds * di);

    Eigen::VectorXd sigma;
    ComplexMatrix u;
    ComplexMatrix v;
    if (use_modulus) {
        const RealMatrix m = tpsa.amplitude.cwiseAbs() * weight;
        Eigen::BDCSVD<RealMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        sigma = svd.singularValues();
        u = svd.matrixU().cast<Complex>();
        v = svd.matrixV().cast<Complex>();
    } else {
        const ComplexMatrix m = tpsa.amplitude * weight;
        Eigen::BDCSVD<ComplexMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        sigma = svd.singularValues();
        u = svd.matrixU();
        v = svd.matrixV();
    }

    const Eigen::VectorXd all = sigma.array().square();
    const double total = all.sum();
    if (!(total > 0.0)) throw DegenerateInput("decompose: zero amplitude");
    const Eigen::VectorXd lambda = all / total;

    SchmidtDecomposition out;
    out.grid = tpsa.grid;
    out.schmidt_number = 1.0 / lambda.squaredNorm();
    int kept = 0;
    while (kept < lambda.size() && lambda[kept] > kCoefficientFloor) ++kept;
    out.coefficients.assign(lambda.data(), lambda.data() + kept);

    // Tie-break equal coefficients deterministically.
    for (int start = 0; start < kept;) {
        int end = start + 1;
        while (end < kept && std::abs(lambda[end] - lambda[start]) <= 1e-8 * lambda[start]) ++end;
        if (end - start > 1) resolve_degenerate_block(u, v, start, end - start, tpsa.grid.signal());
        start = end;
    }

    // M = U S V^H, so F = sum_n s_n (U_n / sqrt(ds)) (conj(V_n) / sqrt(di))^T.
    out.signal_modes = u.leftCols(kept) / std::sqrt(ds);
    out.idler_modes = v.leftCols(kept).conjugate() / std::sqrt(di);
    return out;
}

double schmidt_number(const std::vector<double>& lambda) {
    if (lambda.empty()) throw ContractError("schmidt_number: empty coefficient list");
    double sum = 0.0;
    double sq = 0.0;
    for (double l : lambda) {
        if (!(l >= 0.0)) throw ContractError("schmidt_number: coefficients must be non-negative");
        sum += l;
        sq += l * l;
    }
    if (std::abs(sum - 1.0) > 1e-8) {
        std::ostringstream os;
        os << "schmidt_number: coefficients sum to " << sum << ", expected 1";
        throw ContractError(os.str());
    }
    return 1.0 / sq;
}

ComplexMatrix kernel(const TpsaGrid& tpsa, bool use_modulus) {
    require_normalized(tpsa);
    const double weight = std::sqrt(tpsa.grid.signal_step() * tpsa.grid.idler_step());
    const ComplexMatrix m = use_modulus ? ComplexMatrix(tpsa.amplitude.cwiseAbs().cast<Complex>() * weight)
                                        : ComplexMatrix(tpsa.amplitude * weight);
    ComplexMatrix k = m * m.adjoint();
    return 0.5 * (k + k.adjoint());
}

double mode_overlap(const SchmidtDecomposition& decomposition, int m, int n) {
    if (m < 0 || n < 0 || m >= decomposition.size() || n >= decomposition.size()) {
        std::ostringstream os;
        os << "mode_overlap: indices (" << m << ", " << n << ") outside [0, " << decomposition.size() << ")";
        throw ContractError(os.str());
    }
    const double ds = decomposition.grid.signal_step();
    return (decomposition.signal_modes.col(m).cwiseAbs().array() * decomposition.signal_modes.col(n).cwiseAbs().array())
               .sum() *
           ds;
}

ComplexMatrix reconstruct(const SchmidtDecomposition& decomposition) {
    ComplexMatrix out = ComplexMatrix::Zero(decomposition.signal_modes.rows(), decomposition.idler_modes.rows());
    for (int n = 0; n < decomposition.size(); ++n)
        out += std::sqrt(decomposition.coefficients[static_cast<std::size_t>(n)]) * decomposition.signal_modes.col(n) *
               decomposition.idler_modes.col(n).transpose();
    return out;
}

}  // namespace spdc
