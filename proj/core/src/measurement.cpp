#include "spdc/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "spdc/counter_rng.hpp"
#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc {

void FiberSpec::validate() const {
    if (!(length_km > 0.0)) throw ContractError("fiber length must be positive");
    if (dispersion.wavelengths().empty()) throw ContractError("fiber dispersion table is empty");
}

void DetectorChain::validate() const {
    if (!(jitter_ps >= 0.0 && trigger_jitter_ps >= 0.0)) throw ContractError("jitter must be non-negative");
    if (!(bin_width_ps > 0.0)) throw ContractError("bin width must be positive");
}

double DetectorChain::timing_sigma_ps() const {
    return std::sqrt(jitter_ps * jitter_ps + trigger_jitter_ps * trigger_jitter_ps);
}

BandCenters BandCenters::of(const FrequencyGrid& grid) {
    const double ws = 0.5 * (grid.signal().front() + grid.signal().back());
    const double wi = 0.5 * (grid.idler().front() + grid.idler().back());
    return {units::omega_to_nm(ws), units::omega_to_nm(wi)};
}

namespace {

// k'' l in fs^2.
double fiber_scale(const FiberSpec& fiber, double center_nm) {
    return fiber.dispersion.gvd(center_nm) * units::km_to_mm(fiber.length_km);
}

}  // namespace

double time_map(const FiberSpec& fiber, double detuning, double center_nm) {
    return units::fs_to_ps(fiber_scale(fiber, center_nm) * detuning);
}

double detuning_from_time(const FiberSpec& fiber, double t_ps, double center_nm) {
    const double scale = fiber_scale(fiber, center_nm);
    if (scale == 0.0) throw DegenerateInput("fiber has zero dispersion at the band center");
    return units::ps_to_fs(t_ps) / scale;
}

double time_to_wavelength(const FiberSpec& fiber, double t_ps, double center_nm) {
    return units::omega_to_nm(units::nm_to_omega(center_nm) + detuning_from_time(fiber, t_ps, center_nm));
}

int TimeAxis::locate(double t_ps) const {
    if (!(t_ps >= min_ps && t_ps < max_ps)) return -1;
    const int k = static_cast<int>(std::floor((t_ps - min_ps) / width()));
    return std::clamp(k, 0, bins - 1);
}

std::uint64_t ArrivalHistogram::total() const {
    std::uint64_t sum = 0;
    for (auto c : counts) sum += c;
    return sum;
}

HistogramAxes default_axes(const FrequencyGrid& grid, const FiberPair& fibers, const DetectorChain& chain,
                           const BandCenters& centers) {
    chain.validate();
    auto axis = [&](const std::vector<double>& w, double step, const FiberSpec& fiber, double center_nm) {
        const double wc = units::nm_to_omega(center_nm);
        const double a = time_map(fiber, w.front() - 0.5 * step - wc, center_nm);
        const double b = time_map(fiber, w.back() + 0.5 * step - wc, center_nm);
        const double margin = 6.0 * chain.timing_sigma_ps() + chain.bin_width_ps;
        TimeAxis t;
        t.min_ps = std::min(a, b) - margin;
        t.bins = static_cast<int>(std::ceil((std::max(a, b) + margin - t.min_ps) / chain.bin_width_ps));
        t.max_ps = t.min_ps + t.bins * chain.bin_width_ps;
        return t;
    };
    return {axis(grid.signal(), grid.signal_step(), fibers.signal, centers.signal_nm),
            axis(grid.idler(), grid.idler_step(), fibers.idler, centers.idler_nm)};
}

namespace {

struct CellTable {
    std::vector<double> cdf;  // cumulative probability over column-major cells
    int rows = 0;
};

CellTable cell_table(const TpsaGrid& tpsa) {
    if (!tpsa.amplitude.allFinite()) throw DataError("simulate_histogram: non-finite amplitude");
    const RealMatrix intensity = tpsa.intensity();
    CellTable t;
    t.rows = static_cast<int>(intensity.rows());
    t.cdf.resize(static_cast<std::size_t>(intensity.size()));
    double acc = 0.0;
    for (Eigen::Index k = 0; k < intensity.size(); ++k) {
        acc += intensity.data()[k];
        t.cdf[static_cast<std::size_t>(k)] = acc;
    }
    if (!(acc > 0.0)) throw DegenerateInput("simulate_histogram: zero-power two-photon amplitude");
    for (double& v : t.cdf) v /= acc;
    t.cdf.back() = 1.0;
    return t;
}

}  // namespace

ArrivalHistogram simulate_histogram(const TpsaGrid& tpsa, const FiberPair& fibers, const DetectorChain& chain,
                                    std::uint64_t seed, std::optional<BandCenters> centers_opt,
                                    std::optional<HistogramAxes> axes_opt, int shards) {
    chain.validate();
    fibers.signal.validate();
    fibers.idler.validate();
    const CellTable table = cell_table(tpsa);
    const BandCenters centers = centers_opt.value_or(BandCenters::of(tpsa.grid));
    const HistogramAxes axes = axes_opt.value_or(default_axes(tpsa.grid, fibers, chain, centers));

    ArrivalHistogram h;
    h.axes = axes;
    h.seed = seed;
    h.pairs = chain.total_pairs;
    h.chain = chain;
    h.centers = centers;
    h.signal_scale_fs2 = fiber_scale(fibers.signal, centers.signal_nm);
    h.idler_scale_fs2 = fiber_scale(fibers.idler, centers.idler_nm);
    const std::size_t nbins = static_cast<std::size_t>(axes.signal.bins) * axes.idler.bins;
    h.counts.assign(nbins, 0);

    const double ws_c = units::nm_to_omega(centers.signal_nm);
    const double wi_c = units::nm_to_omega(centers.idler_nm);
    const double s_scale_ps = units::fs_to_ps(h.signal_scale_fs2);
    const double i_scale_ps = units::fs_to_ps(h.idler_scale_fs2);
    const auto& sig = tpsa.grid.signal();
    const auto& idl = tpsa.grid.idler();
    const double ds = tpsa.grid.signal_step();
    const double di = tpsa.grid.idler_step();
    const CounterRng rng(seed);

    auto run_range = [&](std::uint64_t first, std::uint64_t last, std::vector<std::uint64_t>& counts,
                         std::uint64_t& overflow) {
        for (std::uint64_t j = first; j < last; ++j) {
            const double u = rng.uniform(j, 0);
            auto it = std::lower_bound(table.cdf.begin(), table.cdf.end(), u);
            const auto cell = static_cast<std::size_t>(it - table.cdf.begin());
            const int r = static_cast<int>(cell % static_cast<std::size_t>(table.rows));
            const int c = static_cast<int>(cell / static_cast<std::size_t>(table.rows));
            const double ws = sig[r] + (rng.uniform(j, 1) - 0.5) * ds;
            const double wi = idl[c] + (rng.uniform(j, 2) - 0.5) * di;
            const double trigger = chain.trigger_jitter_ps * rng.normal(j, 7);
            const double ts = s_scale_ps * (ws - ws_c) + chain.jitter_ps * rng.normal(j, 3) + trigger;
            const double ti = i_scale_ps * (wi - wi_c) + chain.jitter_ps * rng.normal(j, 5) + trigger;
            const int bs = axes.signal.locate(ts);
            const int bi = axes.idler.locate(ti);
            if (bs < 0 || bi < 0) {
                ++overflow;
            } else {
                ++counts[static_cast<std::size_t>(bs) * axes.idler.bins + bi];
            }
        }
    };

    const std::uint64_t n = chain.total_pairs;
    shards = std::max(1, shards);
    if (shards == 1) {
        run_range(0, n, h.counts, h.overflow);
        return h;
    }
    std::vector<std::vector<std::uint64_t>> partial(static_cast<std::size_t>(shards), std::vector<std::uint64_t>(nbins, 0));
    std::vector<std::uint64_t> partial_overflow(static_cast<std::size_t>(shards), 0);
    {
        std::vector<std::jthread> workers;
        for (int s = 0; s < shards; ++s) {
            const std::uint64_t first = n * static_cast<std::uint64_t>(s) / static_cast<std::uint64_t>(shards);
            const std::uint64_t last = n * static_cast<std::uint64_t>(s + 1) / static_cast<std::uint64_t>(shards);
            workers.emplace_back([&, s, first, last] {
                run_range(first, last, partial[static_cast<std::size_t>(s)], partial_overflow[static_cast<std::size_t>(s)]);
            });
        }
    }
    for (int s = 0; s < shards; ++s) {
        for (std::size_t k = 0; k < nbins; ++k) h.counts[k] += partial[static_cast<std::size_t>(s)][k];
        h.overflow += partial_overflow[static_cast<std::size_t>(s)];
    }
    return h;
}

namespace {

// Gauss-Hermite rule for E[f(Z)], Z ~ N(0, 1) (Golub-Welsch).
std::pair<std::vector<double>, std::vector<double>> normal_quadrature(int n) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    std::vector<double> nodes(static_cast<std::size_t>(n));
    std::vector<double> weights(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        nodes[k] = eig.eigenvalues()[k];
        weights[k] = eig.eigenvectors()(0, k) * eig.eigenvectors()(0, k);
    }
    return {nodes, weights};
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Antiderivative of the standard normal CDF.
double normal_cdf_integral(double z) {
    return z * normal_cdf(z) + std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// CDF at x of U(lo, hi) + N(0, sigma^2).
double smeared_uniform_cdf(double x, double lo, double hi, double sigma) {
    if (sigma <= 0.0) return std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
    const double a = (x - hi) / sigma;
    const double b = (x - lo) / sigma;
    return sigma * (normal_cdf_integral(b) - normal_cdf_integral(a)) / (hi - lo);
}

// Bin probabilities of U(lo, hi) + N(0, sigma^2) restricted to the bins it can reach.
void bin_probabilities(const TimeAxis& axis, double lo, double hi, double sigma, int& first, std::vector<double>& p) {
    const double reach = 9.0 * sigma + axis.width();
    first = std::max(0, static_cast<int>(std::floor((lo - reach - axis.min_ps) / axis.width())));
    const int last = std::min(axis.bins - 1, static_cast<int>(std::floor((hi + reach - axis.min_ps) / axis.width())));
    p.clear();
    if (last < first) return;
    double prev = smeared_uniform_cdf(axis.min_ps + first * axis.width(), lo, hi, sigma);
    for (int k = first; k <= last; ++k) {
        const double next = smeared_uniform_cdf(axis.min_ps + (k + 1) * axis.width(), lo, hi, sigma);
        p.push_back(next - prev);
        prev = next;
    }
}

}  // namespace

std::vector<double> expected_histogram(const TpsaGrid& tpsa, const FiberPair& fibers, const DetectorChain& chain,
                                       const BandCenters& centers, const HistogramAxes& axes) {
    chain.validate();
    const RealMatrix intensity = tpsa.intensity();
    const double total = intensity.sum();
    if (!(total > 0.0)) throw DegenerateInput("expected_histogram: zero-power two-photon amplitude");

    std::vector<double> nodes{0.0};
    std::vector<double> weights{1.0};
    if (chain.trigger_jitter_ps > 0.0) std::tie(nodes, weights) = normal_quadrature(32);

    const double ws_c = units::nm_to_omega(centers.signal_nm);
    const double wi_c = units::nm_to_omega(centers.idler_nm);
    const double ds = tpsa.grid.signal_step();
    const double di = tpsa.grid.idler_step();
    std::vector<double> out(static_cast<std::size_t>(axes.signal.bins) * axes.idler.bins, 0.0);
    std::vector<double> ps;
    std::vector<double> pi;
    for (int c = 0; c < intensity.cols(); ++c) {
        for (int r = 0; r < intensity.rows(); ++r) {
            const double p = intensity(r, c) / total;
            if (p <= 0.0) continue;
            double s_lo = time_map(fibers.signal, tpsa.grid.signal()[r] - 0.5 * ds - ws_c, centers.signal_nm);
            double s_hi = time_map(fibers.signal, tpsa.grid.signal()[r] + 0.5 * ds - ws_c, centers.signal_nm);
            double i_lo = time_map(fibers.idler, tpsa.grid.idler()[c] - 0.5 * di - wi_c, centers.idler_nm);
            double i_hi = time_map(fibers.idler, tpsa.grid.idler()[c] + 0.5 * di - wi_c, centers.idler_nm);
            if (s_lo > s_hi) std::swap(s_lo, s_hi);
            if (i_lo > i_hi) std::swap(i_lo, i_hi);
            for (std::size_t q = 0; q < nodes.size(); ++q) {
                const double shift = chain.trigger_jitter_ps * nodes[q];
                int fs = 0;
                int fi = 0;
                bin_probabilities(axes.signal, s_lo + shift, s_hi + shift, chain.jitter_ps, fs, ps);
                bin_probabilities(axes.idler, i_lo + shift, i_hi + shift, chain.jitter_ps, fi, pi);
                const double w = p * weights[q];
                for (std::size_t a = 0; a < ps.size(); ++a) {
                    const double wa = w * ps[a];
                    if (wa == 0.0) continue;
                    double* row = &out[static_cast<std::size_t>(fs + static_cast<int>(a)) * axes.idler.bins + fi];
                    for (std::size_t b = 0; b < pi.size(); ++b) row[b] += wa * pi[b];
                }
            }
        }
    }
    return out;
}

double effective_resolution_nm(const FiberSpec& fiber, const DetectorChain& chain, double center_nm) {
    const double sigma_ps =
        std::sqrt(chain.timing_sigma_ps() * chain.timing_sigma_ps() + chain.bin_width_ps * chain.bin_width_ps / 12.0);
    const double ps_per_nm = std::abs(fiber.dispersion.dispersion(center_nm)) * fiber.length_km;
    if (ps_per_nm == 0.0) throw DegenerateInput("fiber has zero dispersion at the band center");
    return kFwhmPerSigma * sigma_ps / ps_per_nm;
}

WavelengthHistogram time_to_wavelength(const ArrivalHistogram& histogram, const FiberPair& fibers,
                                       const BandCenters& centers) {
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); };
    if (!close(centers.signal_nm, histogram.centers.signal_nm) || !close(centers.idler_nm, histogram.centers.idler_nm))
        throw ContractError("time_to_wavelength: band centers differ from those used to build the histogram");
    if (!close(fiber_scale(fibers.signal, centers.signal_nm), histogram.signal_scale_fs2) ||
        !close(fiber_scale(fibers.idler, centers.idler_nm), histogram.idler_scale_fs2))
        throw ContractError("time_to_wavelength: fiber dispersion differs from the one used to build the histogram");
    if (histogram.counts.size() != static_cast<std::size_t>(histogram.axes.signal.bins) * histogram.axes.idler.bins)
        throw ContractError("time_to_wavelength: counts do not match the axes");

    auto edges = [](const TimeAxis& axis, const FiberSpec& fiber, double center_nm) {
        std::vector<double> e(static_cast<std::size_t>(axis.bins) + 1);
        for (int k = 0; k <= axis.bins; ++k)
            e[k] = time_to_wavelength(fiber, axis.min_ps + k * axis.width(), center_nm);
        return e;
    };
    WavelengthHistogram out;
    out.signal_edges_nm = edges(histogram.axes.signal, fibers.signal, centers.signal_nm);
    out.idler_edges_nm = edges(histogram.axes.idler, fibers.idler, centers.idler_nm);
    const int ns = histogram.axes.signal.bins;
    const int ni = histogram.axes.idler.bins;
    const bool flip_s = out.signal_edges_nm.front() > out.signal_edges_nm.back();
    const bool flip_i = out.idler_edges_nm.front() > out.idler_edges_nm.back();
    if (flip_s) std::reverse(out.signal_edges_nm.begin(), out.signal_edges_nm.end());
    if (flip_i) std::reverse(out.idler_edges_nm.begin(), out.idler_edges_nm.end());
    out.counts.resize(histogram.counts.size());
    for (int s = 0; s < ns; ++s)
        for (int i = 0; i < ni; ++i)
            out.counts[static_cast<std::size_t>(flip_s ? ns - 1 - s : s) * ni + (flip_i ? ni - 1 - i : i)] =
                histogram.at(s, i);
    out.signal_resolution_nm = effective_resolution_nm(fibers.signal, histogram.chain, centers.signal_nm);
    out.idler_resolution_nm = effective_resolution_nm(fibers.idler, histogram.chain, centers.idler_nm);
    return out;
}

namespace {

// Column-normalized Gaussian spreading matrix: column j distributes sample j.
RealMatrix spreading_matrix(const std::vector<double>& axis, double sigma) {
    const int n = static_cast<int>(axis.size());
    RealMatrix m = RealMatrix::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        double sum = 0.0;
        for (int k = 0; k < n; ++k) {
            const double x = (axis[k] - axis[j]) / sigma;
            m(k, j) = x * x > 1400.0 ? 0.0 : std::exp(-0.5 * x * x);
            sum += m(k, j);
        }
        m.col(j) /= sum;
    }
    return m;
}

}  // namespace

RealMatrix blur_to_resolution(const RealMatrix& intensity, const FrequencyGrid& grid, double resolution_nm) {
    if (!(resolution_nm >= 0.0)) throw ContractError("resolution must be non-negative");
    if (intensity.rows() != grid.n_signal() || intensity.cols() != grid.n_idler())
        throw ContractError("blur_to_resolution: intensity shape does not match the grid");
    if (resolution_nm == 0.0) return intensity;
    const BandCenters centers = BandCenters::of(grid);
    const double sigma_s = units::nm_interval_to_omega(resolution_nm, centers.signal_nm) / kFwhmPerSigma;
    const double sigma_i = units::nm_interval_to_omega(resolution_nm, centers.idler_nm) / kFwhmPerSigma;
    const RealMatrix bs = spreading_matrix(grid.signal(), sigma_s);
    const RealMatrix bi = spreading_matrix(grid.idler(), sigma_i);
    return bs * intensity * bi.transpose();
}

}  // namespace spdc
