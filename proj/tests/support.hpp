#pragma once

#include <doctest.h>

#include <cmath>

#include "spdc/dispersion.hpp"
#include "spdc/units.hpp"

namespace spdc::test {

inline const SellmeierData& kdp() {
    static const SellmeierData data = load_material("kdp");
    return data;
}

inline const SellmeierData& bbo() {
    static const SellmeierData data = load_material("bbo");
    return data;
}

inline CrystalSpec kdp_at(double pump_nm, double length_mm = 15.0) {
    return make_phase_matched_crystal(kdp(), length_mm, units::nm_to_omega(pump_nm));
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace spdc::test
