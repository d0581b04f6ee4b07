#include "spdc/tpsa.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc {

FrequencyGrid::FrequencyGrid(std::vector<double> signal, std::vector<double> idler)
    : signal_(std::move(signal)), idler_(std::move(idler)) {
    auto check = [](const std::vector<double>& axis, const char* name) {
        if (axis.size() < 2) throw ContractError(std::string(name) + " axis needs at least two samples");
        for (std::size_t i = 1; i < axis.size(); ++i)
            if (!(axis[i] > axis[i - 1]))
                throw ContractError(std::string(name) + " axis must be strictly increasing");
    };
    check(signal_, "signal");
    check(idler_, "idler");
}

FrequencyGrid FrequencyGrid::centered(double signal_center, double signal_half_span, int n_signal,
                                      double idler_center, double idler_half_span, int n_idler) {
    auto axis = [](double center, double half, int n) {
        if (n < 2) throw ContractError("grid needs at least two samples per axis");
        std::vector<double> v(static_cast<std::size_t>(n));
        const double step = 2.0 * half / (n - 1);
        for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = center - half + k * step;
        return v;
    };
    return FrequencyGrid(axis(signal_center, signal_half_span, n_signal), axis(idler_center, idler_half_span, n_idler));
}

double TpsaGrid::power() const { return amplitude.cwiseAbs2().sum() * grid.cell_area(); }

double sinc(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

namespace {

double wavevector_at(const CrystalSpec& crystal, double omega, Role role, const char* axis, int index) {
    try {
        return wavevector(crystal, omega, role);
    } catch (const DomainError& e) {
        std::ostringstream os;
        os << "tpsa cell (" << axis << " index " << index << ", " << units::omega_to_nm(omega) << " nm): " << e.what();
        throw DomainError(os.str());
    }
}

}  // namespace

TpsaGrid build_tpsa(const CrystalSpec& crystal, const PumpModel& pump, const FrequencyGrid& grid) {
    crystal.validate();
    const int ns = grid.n_signal();
    const int ni = grid.n_idler();
    std::vector<double> ks(static_cast<std::size_t>(ns));
    std::vector<double> ki(static_cast<std::size_t>(ni));
    for (int r = 0; r < ns; ++r) ks[r] = wavevector_at(crystal, grid.signal()[r], Role::Signal, "signal", r);
    for (int c = 0; c < ni; ++c) ki[c] = wavevector_at(crystal, grid.idler()[c], Role::Idler, "idler", c);

    TpsaGrid out;
    out.grid = grid;
    out.amplitude.resize(ns, ni);
    const double half_length = 0.5 * crystal.length_mm;
    for (int c = 0; c < ni; ++c) {
        const double wi = grid.idler()[c];
        for (int r = 0; r < ns; ++r) {
            const double ws = grid.signal()[r];
            double kp = 0.0;
            try {
                kp = wavevector(crystal, ws + wi, Role::Pump);
            } catch (const DomainError& e) {
                std::ostringstream os;
                os << "tpsa cell (" << r << ", " << c << "): " << e.what();
                throw DomainError(os.str());
            }
            const double x = (kp - ks[r] - ki[c]) * half_length;
            out.amplitude(r, c) = std::polar(1.0, x) * pump_amplitude(pump, ws + wi) * sinc(x);
        }
    }
    return out;
}

FrequencyGrid default_grid(const CrystalSpec& crystal, double envelope_sigma, int n) {
    const double center = 0.5 * crystal.pump_center;
    const double half = 4.0 * envelope_sigma;
    return FrequencyGrid::centered(center, half, n, center, half, n);
}

TpsaGrid normalize(const TpsaGrid& tpsa) {
    if (!tpsa.amplitude.allFinite()) throw DataError("tpsa contains non-finite amplitudes");
    const double p = tpsa.power();
    if (!(p > 0.0)) throw DegenerateInput("cannot normalize an all-zero amplitude");
    TpsaGrid out = tpsa;
    out.amplitude /= std::sqrt(p);
    out.normalized = true;
    return out;
}

TpsaGrid isolate_peak(const TpsaGrid& tpsa, std::pair<double, double> center, std::pair<double, double> window,
                      double intensity_cut) {
    if (!(window.first > 0.0 && window.second > 0.0)) throw ContractError("isolation window must be positive");
    if (!(intensity_cut >= 0.0)) throw ContractError("intensity cut must be non-negative");
    const auto& ws = tpsa.grid.signal();
    const auto& wi = tpsa.grid.idler();
    // Slack of 1e-9 samples keeps edge cells of a grid that spans exactly the window.
    const double hs = 0.5 * window.first + 0.5 * tpsa.grid.signal_step() * 1e-9;
    const double hi = 0.5 * window.second + 0.5 * tpsa.grid.idler_step() * 1e-9;
    auto inside = [&](int r, int c) {
        return std::abs(ws[r] - center.first) <= hs && std::abs(wi[c] - center.second) <= hi;
    };

    const RealMatrix intensity = tpsa.intensity();
    double peak = 0.0;
    for (int c = 0; c < tpsa.grid.n_idler(); ++c)
        for (int r = 0; r < tpsa.grid.n_signal(); ++r)
            if (inside(r, c)) peak = std::max(peak, intensity(r, c));

    TpsaGrid out = tpsa;
    const double level = intensity_cut * peak;
    int kept = 0;
    for (int c = 0; c < tpsa.grid.n_idler(); ++c) {
        for (int r = 0; r < tpsa.grid.n_signal(); ++r) {
            if (inside(r, c) && intensity(r, c) > level && intensity(r, c) > 0.0) {
                ++kept;
            } else {
                out.amplitude(r, c) = 0.0;
            }
        }
    }
    if (kept == 0) throw DegenerateInput("isolate_peak: nothing survives the window and intensity cut");
    return normalize(out);
}

Marginals marginals(const TpsaGrid& tpsa) {
    const RealMatrix intensity = tpsa.intensity();
    Marginals m;
    m.signal.resize(static_cast<std::size_t>(tpsa.grid.n_signal()));
    m.idler.resize(static_cast<std::size_t>(tpsa.grid.n_idler()));
    const Eigen::VectorXd rows = intensity.rowwise().sum() * tpsa.grid.idler_step();
    const Eigen::VectorXd cols = intensity.colwise().sum().transpose() * tpsa.grid.signal_step();
    for (int r = 0; r < rows.size(); ++r) m.signal[r] = rows[r];
    for (int c = 0; c < cols.size(); ++c) m.idler[c] = cols[c];
    return m;
}

std::optional<TiltEstimate> tilt_estimate(const TpsaGrid& tpsa, double threshold, double min_anisotropy) {
    const RealMatrix intensity = tpsa.intensity();
    Eigen::Index r0 = 0;
    Eigen::Index c0 = 0;
    const double peak = intensity.maxCoeff(&r0, &c0);
    if (!(peak > 0.0)) throw DegenerateInput("tilt_estimate: all-zero amplitude");

    const int ns = tpsa.grid.n_signal();
    const int ni = tpsa.grid.n_idler();
    const double level = threshold * peak;
    std::vector<char> visited(static_cast<std::size_t>(ns) * ni, 0);
    auto at = [ns](int r, int c) { return static_cast<std::size_t>(c) * ns + r; };
    std::vector<std::pair<int, int>> stack{{static_cast<int>(r0), static_cast<int>(c0)}};
    visited[at(r0, c0)] = 1;

    // Weighted first and second moments of the connected region.
    double w = 0.0, mx = 0.0, my = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
    int cells = 0;
    const double xs0 = tpsa.grid.signal()[r0];
    const double yi0 = tpsa.grid.idler()[c0];
    while (!stack.empty()) {
        auto [r, c] = stack.back();
        stack.pop_back();
        const double v = intensity(r, c);
        const double x = tpsa.grid.signal()[r] - xs0;
        const double y = tpsa.grid.idler()[c] - yi0;
        w += v;
        mx += v * x;
        my += v * y;
        sxx += v * x * x;
        syy += v * y * y;
        sxy += v * x * y;
        ++cells;
        for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
                const int rr = r + dr;
                const int cc = c + dc;
                if (rr < 0 || cc < 0 || rr >= ns || cc >= ni) continue;
                if (visited[at(rr, cc)] || intensity(rr, cc) <= level) continue;
                visited[at(rr, cc)] = 1;
                stack.emplace_back(rr, cc);
            }
        }
    }
    mx /= w;
    my /= w;
    const double cxx = sxx / w - mx * mx;
    const double cyy = syy / w - my * my;
    const double cxy = sxy / w - mx * my;

    const double trace_half = 0.5 * (cxx + cyy);
    const double disc = std::sqrt(0.25 * (cxx - cyy) * (cxx - cyy) + cxy * cxy);
    const double major = trace_half + disc;
    const double minor = trace_half - disc;
    if (!(major > 0.0)) return std::nullopt;
    const double anisotropy = 1.0 - minor / major;
    if (anisotropy < min_anisotropy) return std::nullopt;

    double angle = 0.5 * std::atan2(2.0 * cxy, cxx - cyy);
    if (angle <= -kPi / 2) angle += kPi;
    return TiltEstimate{angle, anisotropy, cells};
}

std::vector<Peak> find_peaks(const TpsaGrid& tpsa, double min_fraction) {
    const RealMatrix intensity = tpsa.intensity();
    const double level = min_fraction * intensity.maxCoeff();
    const int ns = tpsa.grid.n_signal();
    const int ni = tpsa.grid.n_idler();
    std::vector<Peak> peaks;
    for (int c = 1; c + 1 < ni; ++c) {
        for (int r = 1; r + 1 < ns; ++r) {
            const double v = intensity(r, c);
            if (v <= level) continue;
            bool is_max = true;
            for (int dc = -1; dc <= 1 && is_max; ++dc) {
                for (int dr = -1; dr <= 1; ++dr) {
                    if (dr == 0 && dc == 0) continue;
                    const double u = intensity(r + dr, c + dc);
                    // Ties resolved toward the lower index so plateaus yield one peak.
                    const bool earlier = dc < 0 || (dc == 0 && dr < 0);
                    if (earlier ? u >= v : u > v) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (is_max) peaks.push_back({r, c, tpsa.grid.signal()[r], tpsa.grid.idler()[c], v});
        }
    }
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
        if (a.intensity != b.intensity) return a.intensity > b.intensity;
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    return peaks;
}

}  // namespace spdc
