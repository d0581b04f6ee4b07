#include "spdc/gaussian_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc {

void DoubleGaussianPeak::validate() const {
    if (!(sigma_c > 0.0 && sigma_p > 0.0)) throw ContractError("double-Gaussian widths must be positive");
    if (!(tilt > -kPi / 2 && tilt <= kPi / 2)) throw ContractError("tilt must lie in (-pi/2, pi/2]");
}

std::pair<double, double> MultiPeakModel::min_separation() const {
    double dx = std::numeric_limits<double>::infinity();
    double dy = dx;
    for (std::size_t i = 0; i < peaks.size(); ++i) {
        for (std::size_t j = i + 1; j < peaks.size(); ++j) {
            dx = std::min(dx, std::abs(peaks[i].x - peaks[j].x));
            dy = std::min(dy, std::abs(peaks[i].y - peaks[j].y));
        }
    }
    return {dx, dy};
}

Complex MultiPeakModel::amplitude(double x, double y) const {
    const double inv = 1.0 / (2.0 * sigma * sigma);
    Complex sum{0.0, 0.0};
    for (const auto& p : peaks) {
        const double ex = x - p.x;
        const double ey = y - p.y;
        sum += p.amplitude * std::exp(-ex * ex * inv) * std::exp(-ey * ey * inv);
    }
    return sum;
}

double peak_amplitude(const DoubleGaussianPeak& peak, double omega_s, double omega_i) {
    const double ridge = std::sin(peak.tilt) * omega_s - std::cos(peak.tilt) * omega_i;
    const double sum = omega_s + omega_i;
    return std::exp(-ridge * ridge / (2.0 * peak.sigma_c * peak.sigma_c) - sum * sum / (2.0 * peak.sigma_p * peak.sigma_p));
}

double alignment_residual(const DoubleGaussianPeak& peak) {
    return std::sin(2.0 * peak.tilt) / (2.0 * peak.sigma_c * peak.sigma_c) - 1.0 / (peak.sigma_p * peak.sigma_p);
}

double aligned_sigma_p(double tilt, double sigma_c) {
    const double s = std::sin(2.0 * tilt);
    if (!(s > 0.0)) throw NotApplicable("axis alignment needs 0 < alpha < 90 deg");
    return sigma_c * std::sqrt(2.0 / s);
}

SeparationMargins separation_margins(const DoubleGaussianPeak& peak, double delta_omega) {
    peak.validate();
    if (!(delta_omega > 0.0)) throw ContractError("comb spacing must be positive");
    if (!(peak.tilt > 0.0 && peak.tilt < kPi / 2)) {
        std::ostringstream os;
        os << "separation conditions apply only for 0 < alpha < 90 deg (alpha = " << units::rad_to_deg(peak.tilt)
           << " deg)";
        throw NotApplicable(os.str());
    }
    const double s = std::sin(peak.tilt);
    const double c = std::cos(peak.tilt);
    const double sc2 = peak.sigma_c * peak.sigma_c;
    const double pump_term = 1.0 / (2.0 * peak.sigma_p * peak.sigma_p);
    SeparationMargins m;
    m.first = delta_omega * c * std::sqrt(c * c / sc2 + pump_term);
    m.second = delta_omega * s * std::sqrt(s * s / sc2 + pump_term);
    return m;
}

double sinc2_half_width() {
    static const double root = [] {
        // Newton on g(x) = sin(x)/x - 1/sqrt(2) from the textbook estimate.
        double x = 1.39;
        const double target = std::numbers::sqrt2 / 2.0;
        for (int i = 0; i < 50; ++i) {
            const double g = std::sin(x) / x - target;
            const double dg = (x * std::cos(x) - std::sin(x)) / (x * x);
            const double step = g / dg;
            x -= step;
            if (std::abs(step) < 1e-16) break;
        }
        return x;
    }();
    return root;
}

double sigma_c_from_crystal(const CrystalSpec& crystal, double width_factor) {
    crystal.validate();
    if (!(width_factor > 0.0)) throw ContractError("width factor must be positive");
    const double gs = group_properties(crystal, Role::Signal).gamma;
    const double gi = group_properties(crystal, Role::Idler).gamma;
    const double gamma = std::hypot(gs, gi);
    if (!(gamma > 0.0)) throw NotApplicable("phase matching has no frequency dependence to first order");
    return width_factor * 2.0 * sinc2_half_width() / (gamma * crystal.length_mm * std::sqrt(std::numbers::ln2));
}

DoubleGaussianPeak gaussian_peak_for(const CrystalSpec& crystal, double pump_peak_sigma, double width_factor) {
    DoubleGaussianPeak peak{tpsa_tilt(crystal), sigma_c_from_crystal(crystal, width_factor), pump_peak_sigma};
    peak.validate();
    return peak;
}

std::vector<double> disjoint_sum_schmidt(const MultiPeakModel& model, double min_separation_sigmas) {
    if (model.peaks.empty()) throw ContractError("disjoint_sum_schmidt: no peaks");
    if (!(model.sigma > 0.0)) throw ContractError("disjoint_sum_schmidt: sigma must be positive");
    const auto [dx, dy] = model.min_separation();
    const double threshold = min_separation_sigmas * model.sigma;
    if (dx < threshold || dy < threshold) {
        std::ostringstream os;
        os << "peaks are not disjoint: minimum separation (" << dx / model.sigma << ", " << dy / model.sigma
           << ") sigma, need " << min_separation_sigmas << " sigma on both axes";
        throw NotDisjoint(os.str());
    }
    std::vector<double> lambda;
    double total = 0.0;
    for (const auto& p : model.peaks) {
        lambda.push_back(std::norm(p.amplitude));
        total += lambda.back();
    }
    if (!(total > 0.0)) throw DegenerateInput("disjoint_sum_schmidt: all amplitudes are zero");
    for (double& l : lambda) l /= total;
    std::sort(lambda.begin(), lambda.end(), std::greater<>());
    return lambda;
}

TpsaGrid rasterize(const MultiPeakModel& model, const FrequencyGrid& grid) {
    TpsaGrid out;
    out.grid = grid;
    out.amplitude.resize(grid.n_signal(), grid.n_idler());
    for (int c = 0; c < grid.n_idler(); ++c)
        for (int r = 0; r < grid.n_signal(); ++r) out.amplitude(r, c) = model.amplitude(grid.signal()[r], grid.idler()[c]);
    return out;
}

TpsaGrid rasterize(const DoubleGaussianPeak& peak, const FrequencyGrid& grid) {
    TpsaGrid out;
    out.grid = grid;
    out.amplitude.resize(grid.n_signal(), grid.n_idler());
    for (int c = 0; c < grid.n_idler(); ++c)
        for (int r = 0; r < grid.n_signal(); ++r)
            out.amplitude(r, c) = peak_amplitude(peak, grid.signal()[r], grid.idler()[c]);
    return out;
}

}  // namespace spdc
