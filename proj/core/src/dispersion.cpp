#include "spdc/dispersion.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "csv.hpp"
#include "spdc/errors.hpp"
#include "spdc/units.hpp"

#ifndef SPDC_DEFAULT_DATA_DIR
#define SPDC_DEFAULT_DATA_DIR "data"
#endif

namespace spdc {

double SellmeierTerms::index_squared(double lambda_um) const {
    const double l2 = lambda_um * lambda_um;
    double n2 = a + f * l2;
    if (b != 0.0) n2 += b / (l2 - c);
    if (d != 0.0) n2 += d * l2 / (l2 - e);
    return n2;
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string range_text(const SellmeierData& data) {
    std::ostringstream os;
    os << "[" << data.lambda_min_um << ", " << data.lambda_max_um << "] um";
    return os.str();
}

double principal_index(const SellmeierTerms& terms, const SellmeierData& data, double lambda_um) {
    const double n2 = terms.index_squared(lambda_um);
    if (!(n2 > 1.0) || !std::isfinite(n2)) {
        std::ostringstream os;
        os << data.material << ": Sellmeier formula gives n^2 = " << n2 << " at " << lambda_um << " um";
        throw DataError(os.str());
    }
    return std::sqrt(n2);
}

}  // namespace

SellmeierData load_sellmeier(const std::filesystem::path& file) {
    const auto table = detail::read_csv(file);
    const char* required[] = {"material", "polarization", "A", "B", "C", "D", "E", "F",
                              "lambda_min_um", "lambda_max_um", "source"};
    for (const char* name : required)
        if (table.column(name) < 0) throw DataError(file.string() + ": missing column '" + name + "'");

    SellmeierData data;
    bool have_o = false;
    bool have_e = false;
    for (const auto& row : table.rows) {
        auto num = [&](const char* col) {
            return detail::parse_double(row[table.column(col)], file.string() + " column " + col);
        };
        SellmeierTerms terms{num("A"), num("B"), num("C"), num("D"), num("E"), num("F")};
        const std::string pol = lower(row[table.column("polarization")]);
        const std::string material = row[table.column("material")];
        if (!data.material.empty() && data.material != material)
            throw DataError(file.string() + ": mixed materials '" + data.material + "' and '" + material + "'");
        data.material = material;
        const double lo = num("lambda_min_um");
        const double hi = num("lambda_max_um");
        if (!(lo > 0.0 && hi > lo)) throw DataError(file.string() + ": invalid wavelength range");
        // The usable window is the intersection of both rows' validity ranges.
        data.lambda_min_um = (have_o || have_e) ? std::max(data.lambda_min_um, lo) : lo;
        data.lambda_max_um = (have_o || have_e) ? std::min(data.lambda_max_um, hi) : hi;
        if (data.source.empty()) data.source = row[table.column("source")];
        if (pol == "ordinary" || pol == "o") {
            data.ordinary = terms;
            have_o = true;
        } else if (pol == "extraordinary" || pol == "e") {
            data.extraordinary = terms;
            have_e = true;
        } else {
            throw DataError(file.string() + ": unknown polarization '" + pol + "'");
        }
    }
    if (!have_o || !have_e)
        throw DataError(file.string() + ": both ordinary and extraordinary rows are required");
    return data;
}

std::filesystem::path data_directory() {
    if (const char* env = std::getenv("SPDC_DATA_DIR"); env != nullptr && *env != '\0')
        return std::filesystem::path(env);
    return std::filesystem::path(SPDC_DEFAULT_DATA_DIR);
}

SellmeierData load_material(const std::string& name_or_path) {
    const std::filesystem::path direct(name_or_path);
    if (std::filesystem::is_regular_file(direct)) return load_sellmeier(direct);
    const auto bundled = data_directory() / "materials" / (lower(name_or_path) + ".csv");
    if (!std::filesystem::is_regular_file(bundled))
        throw DataError("unknown material '" + name_or_path + "' (looked for " + bundled.string() + ")");
    return load_sellmeier(bundled);
}

Polarization CrystalSpec::polarization_of(Role role) const {
    switch (role) {
        case Role::Pump: return Polarization::Extraordinary;
        case Role::Signal: return polarization.signal;
        case Role::Idler: return polarization.idler;
    }
    return Polarization::Ordinary;
}

void CrystalSpec::validate() const {
    if (!(length_mm > 0.0)) throw ContractError("crystal length must be positive");
    if (!(cut_angle >= 0.0 && cut_angle <= kPi / 2)) throw ContractError("cut angle must lie in [0, pi/2]");
}

double refractive_index(const SellmeierData& data, double lambda_um, Polarization pol, double theta) {
    if (!data.in_range(lambda_um)) {
        std::ostringstream os;
        os << data.material << ": wavelength " << lambda_um << " um outside valid range " << range_text(data);
        throw DomainError(os.str());
    }
    const double no = principal_index(data.ordinary, data, lambda_um);
    if (pol == Polarization::Ordinary) return no;
    const double ne = principal_index(data.extraordinary, data, lambda_um);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return 1.0 / std::sqrt(c * c / (no * no) + s * s / (ne * ne));
}

double wavevector(const CrystalSpec& crystal, double omega, Role role) {
    const double lambda_um = units::nm_to_um(units::omega_to_nm(omega));
    const double n = refractive_index(crystal.sellmeier, lambda_um, crystal.polarization_of(role), crystal.cut_angle);
    return n * omega / kSpeedOfLight;
}

double inverse_group_velocity(const CrystalSpec& crystal, double omega, Role role, double step) {
    return (wavevector(crystal, omega + step, role) - wavevector(crystal, omega - step, role)) / (2.0 * step);
}

double group_velocity(const CrystalSpec& crystal, double omega, Role role, double step) {
    return 1.0 / inverse_group_velocity(crystal, omega, role, step);
}

double gvd(const CrystalSpec& crystal, double omega, Role role, double step) {
    const double kp = wavevector(crystal, omega + step, role);
    const double k0 = wavevector(crystal, omega, role);
    const double km = wavevector(crystal, omega - step, role);
    return (kp - 2.0 * k0 + km) / (step * step);
}

GroupProperties group_properties(const CrystalSpec& crystal, Role role) {
    const double wp = crystal.pump_center;
    const double omega = role == Role::Pump ? wp : 0.5 * wp;
    GroupProperties g;
    const double inv_u = inverse_group_velocity(crystal, omega, role);
    g.group_velocity = 1.0 / inv_u;
    g.gvd = gvd(crystal, omega, role);
    g.gamma = inverse_group_velocity(crystal, wp, Role::Pump) - inv_u;
    return g;
}

double delta_kz(const CrystalSpec& crystal, double omega_s, double omega_i) {
    return wavevector(crystal, omega_s + omega_i, Role::Pump) - wavevector(crystal, omega_s, Role::Signal) -
           wavevector(crystal, omega_i, Role::Idler);
}

double phase_matching_angle(const SellmeierData& data, double pump_omega, PolarizationAssignment pol) {
    CrystalSpec probe;
    probe.sellmeier = data;
    probe.polarization = pol;
    probe.pump_center = pump_omega;
    auto mismatch = [&](double theta) {
        probe.cut_angle = theta;
        return delta_kz(probe, 0.5 * pump_omega, 0.5 * pump_omega);
    };

    double lo = 0.0;
    double hi = kPi / 2;
    double f_lo = mismatch(lo);
    const double f_hi = mismatch(hi);
    if (std::abs(f_lo) < 1e-9) return lo;
    if (std::abs(f_hi) < 1e-9) return hi;
    if ((f_lo > 0.0) == (f_hi > 0.0)) {
        std::ostringstream os;
        os << data.material << ": no degenerate phase-matching angle in (0, 90) deg for pump at "
           << units::omega_to_nm(pump_omega) << " nm (dk = " << f_lo << " .. " << f_hi << " rad/mm)";
        throw InfeasiblePhaseMatching(os.str());
    }
    double mid = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        mid = 0.5 * (lo + hi);
        const double f_mid = mismatch(mid);
        if (std::abs(f_mid) < 1e-9) return mid;
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon()) break;
    }
    return mid;
}

double tpsa_tilt(const CrystalSpec& crystal) {
    const double gamma_s = group_properties(crystal, Role::Signal).gamma;
    const double gamma_i = group_properties(crystal, Role::Idler).gamma;
    double alpha = std::atan2(-gamma_s, gamma_i);
    if (alpha > kPi / 2) alpha -= kPi;
    if (alpha <= -kPi / 2) alpha += kPi;
    return alpha;
}

CrystalSpec make_phase_matched_crystal(SellmeierData data, double length_mm, double pump_omega,
                                       PolarizationAssignment pol) {
    CrystalSpec crystal;
    crystal.cut_angle = phase_matching_angle(data, pump_omega, pol);
    crystal.sellmeier = std::move(data);
    crystal.length_mm = length_mm;
    crystal.polarization = pol;
    crystal.pump_center = pump_omega;
    crystal.validate();
    return crystal;
}

// Fiber dispersion -----------------------------------------------------------

double dispersion_to_gvd(double d_ps_nm_km, double lambda_nm) {
    const double d = units::ps_per_nm_km_to_internal(d_ps_nm_km);  // fs/(nm mm)
    return -d * lambda_nm * lambda_nm / (2.0 * kPi * kSpeedOfLightNmPerFs);
}

double gvd_to_dispersion(double gvd_fs2_mm, double lambda_nm) {
    const double d = -2.0 * kPi * kSpeedOfLightNmPerFs * gvd_fs2_mm / (lambda_nm * lambda_nm);
    return units::internal_to_ps_per_nm_km(d);
}

FiberDispersion::FiberDispersion(std::vector<double> wavelength_nm, std::vector<double> d_ps_nm_km,
                                 std::string name)
    : wavelength_nm_(std::move(wavelength_nm)), d_ps_nm_km_(std::move(d_ps_nm_km)), name_(std::move(name)) {
    if (wavelength_nm_.size() != d_ps_nm_km_.size() || wavelength_nm_.empty())
        throw DataError("fiber table '" + name_ + "': wavelength and D columns must be non-empty and equal length");
    for (std::size_t i = 1; i < wavelength_nm_.size(); ++i)
        if (!(wavelength_nm_[i] > wavelength_nm_[i - 1]))
            throw DataError("fiber table '" + name_ + "': wavelengths must be strictly increasing");
}

FiberDispersion FiberDispersion::load(const std::filesystem::path& file) {
    const auto table = detail::read_csv(file);
    const int wl = table.column("wavelength_nm");
    const int dv = table.column("D_ps_nm_km");
    if (wl < 0 || dv < 0) throw DataError(file.string() + ": expected columns wavelength_nm, D_ps_nm_km");
    std::vector<double> lambda;
    std::vector<double> d;
    for (const auto& row : table.rows) {
        lambda.push_back(detail::parse_double(row[wl], file.string()));
        d.push_back(detail::parse_double(row[dv], file.string()));
    }
    return FiberDispersion(std::move(lambda), std::move(d), file.stem().string());
}

double FiberDispersion::dispersion(double lambda_nm) const {
    if (!(lambda_nm >= min_nm() && lambda_nm <= max_nm())) {
        std::ostringstream os;
        os << "fiber table '" << name_ << "': wavelength " << lambda_nm << " nm outside [" << min_nm() << ", "
           << max_nm() << "] nm";
        throw DomainError(os.str());
    }
    if (wavelength_nm_.size() == 1) return d_ps_nm_km_.front();
    auto it = std::upper_bound(wavelength_nm_.begin(), wavelength_nm_.end(), lambda_nm);
    std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - wavelength_nm_.begin()), wavelength_nm_.size() - 1);
    std::size_t lo = hi - 1;
    const double t = (lambda_nm - wavelength_nm_[lo]) / (wavelength_nm_[hi] - wavelength_nm_[lo]);
    return d_ps_nm_km_[lo] + t * (d_ps_nm_km_[hi] - d_ps_nm_km_[lo]);
}

double FiberDispersion::gvd(double lambda_nm) const {
    return dispersion_to_gvd(dispersion(lambda_nm), lambda_nm);
}

}  // namespace spdc
