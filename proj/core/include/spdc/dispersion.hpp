#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace spdc {

enum class Polarization { Ordinary, Extraordinary };
enum class Role { Pump, Signal, Idler };

/// Coefficients of n^2 = A + B/(l^2 - C) + D l^2/(l^2 - E) + F l^2 with l in um.
/// Terms whose numerator coefficient is zero are skipped, so E may be left at 0.
struct SellmeierTerms {
    double a = 1.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
    double e = 0.0;
    double f = 0.0;

    double index_squared(double lambda_um) const;
};

/// Uniaxial crystal dispersion.
struct SellmeierData {
    std::string material;
    SellmeierTerms ordinary;
    SellmeierTerms extraordinary;
    double lambda_min_um = 0.0;
    double lambda_max_um = 0.0;
    std::string source;

    bool in_range(double lambda_um) const {
        return lambda_um >= lambda_min_um && lambda_um <= lambda_max_um;
    }
};

/// Reads a material CSV (columns: material, polarization, A..F, lambda_min_um,
/// lambda_max_um, source). Lines starting with '#' are comments. Both an
/// "ordinary" and an "extraordinary" row are required.
SellmeierData load_sellmeier(const std::filesystem::path& file);

/// Directory holding the bundled material and fiber tables. Honors SPDC_DATA_DIR.
std::filesystem::path data_directory();

/// Resolves `name_or_path`: an existing file is loaded directly, otherwise the
/// lower-cased name is looked up as <data>/materials/<name>.csv.
SellmeierData load_material(const std::string& name_or_path);

/// Which polarization each down-converted photon carries. The pump is always
/// extraordinary (negative uniaxial type-II).
struct PolarizationAssignment {
    Polarization signal = Polarization::Ordinary;
    Polarization idler = Polarization::Extraordinary;
};

struct CrystalSpec {
    SellmeierData sellmeier;
    double length_mm = 1.0;
    double cut_angle = 0.0;  // radians between optic axis and propagation
    PolarizationAssignment polarization;
    double pump_center = 0.0;  // rad/fs

    Polarization polarization_of(Role role) const;
    void validate() const;
};

/// Central finite-difference step (rad/fs) for group velocity and GVD.
inline constexpr double kDerivativeStep = 1e-4;

double refractive_index(const SellmeierData& data, double lambda_um, Polarization pol, double theta);

/// Wavevector k = n(w) w / c in rad/mm.
double wavevector(const CrystalSpec& crystal, double omega, Role role);

/// dk/dw in fs/mm (inverse group velocity).
double inverse_group_velocity(const CrystalSpec& crystal, double omega, Role role,
                              double step = kDerivativeStep);

/// Group velocity in mm/fs.
double group_velocity(const CrystalSpec& crystal, double omega, Role role,
                      double step = kDerivativeStep);

/// d^2k/dw^2 in fs^2/mm.
double gvd(const CrystalSpec& crystal, double omega, Role role, double step = kDerivativeStep);

/// Group-velocity properties of one photon relative to the pump.
struct GroupProperties {
    double group_velocity = 0.0;  // mm/fs
    double gvd = 0.0;             // fs^2/mm
    double gamma = 0.0;           // 1/u_pump - 1/u, fs/mm
};

/// Properties of `role` at its degenerate frequency pump_center/2 (or at the
/// pump center for Role::Pump, where gamma is zero).
GroupProperties group_properties(const CrystalSpec& crystal, Role role);

/// Collinear longitudinal mismatch k_p(ws+wi) - k_s(ws) - k_i(wi), rad/mm.
double delta_kz(const CrystalSpec& crystal, double omega_s, double omega_i);

/// Cut angle phase-matching degenerate down-conversion of `pump_omega`, found by
/// bisection to |dk| < 1e-9 rad/mm.
double phase_matching_angle(const SellmeierData& data, double pump_omega,
                            PolarizationAssignment pol = {});

/// Ridge orientation alpha with tan(alpha) = -gamma_s / gamma_i, in (-pi/2, pi/2].
double tpsa_tilt(const CrystalSpec& crystal);

/// Builds a crystal cut for degenerate phase matching at `pump_omega`.
CrystalSpec make_phase_matched_crystal(SellmeierData data, double length_mm, double pump_omega,
                                       PolarizationAssignment pol = {});

// Fiber dispersion -----------------------------------------------------------

/// Tabulated dispersion parameter D(lambda), linearly interpolated.
class FiberDispersion {
public:
    FiberDispersion() = default;
    FiberDispersion(std::vector<double> wavelength_nm, std::vector<double> d_ps_nm_km,
                    std::string name = {});

    static FiberDispersion load(const std::filesystem::path& file);

    /// D in ps/(nm km).
    double dispersion(double lambda_nm) const;

    /// k'' in fs^2/mm at `lambda_nm`.
    double gvd(double lambda_nm) const;

    double min_nm() const { return wavelength_nm_.front(); }
    double max_nm() const { return wavelength_nm_.back(); }
    const std::string& name() const { return name_; }
    const std::vector<double>& wavelengths() const { return wavelength_nm_; }
    const std::vector<double>& values() const { return d_ps_nm_km_; }

private:
    std::vector<double> wavelength_nm_;
    std::vector<double> d_ps_nm_km_;
    std::string name_;
};

/// D [ps/(nm km)] -> k'' [fs^2/mm] at `lambda_nm`.
double dispersion_to_gvd(double d_ps_nm_km, double lambda_nm);

/// k'' [fs^2/mm] -> D [ps/(nm km)] at `lambda_nm`.
double gvd_to_dispersion(double gvd_fs2_mm, double lambda_nm);

}  // namespace spdc
