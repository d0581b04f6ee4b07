#include <random>

#include "spdc/errors.hpp"
#include "spdc/gaussian_model.hpp"
#include "spdc/tpsa.hpp"
#include "support.hpp"

using namespace spdc;
using spdc::test::kdp_at;

namespace {

GaussianPulse pulse_fs(double center_nm, double fwhm_fs) {
    return GaussianPulse::from_intensity_fwhm(units::nm_to_omega(center_nm), units::transform_limited_bandwidth(fwhm_fs));
}

TpsaGrid random_grid(int ns, int ni, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    TpsaGrid t;
    t.grid = FrequencyGrid::centered(2.0, 0.1, ns, 2.1, 0.05, ni);
    t.amplitude.resize(ns, ni);
    for (int c = 0; c < ni; ++c)
        for (int r = 0; r < ns; ++r) t.amplitude(r, c) = Complex(n(rng), n(rng));
    return t;
}

}  // namespace

TEST_CASE("grid construction contracts") {
    CHECK_THROWS_AS(FrequencyGrid({1.0}, {1.0, 2.0}), ContractError);
    CHECK_THROWS_AS(FrequencyGrid({1.0, 1.0}, {1.0, 2.0}), ContractError);
    const FrequencyGrid g = FrequencyGrid::centered(2.0, 0.5, 11, 3.0, 1.0, 5);
    CHECK(g.signal().front() == doctest::Approx(1.5));
    CHECK(g.signal().back() == doctest::Approx(2.5));
    CHECK(g.idler_step() == doctest::Approx(0.5));
}

TEST_CASE("sinc") {
    CHECK(sinc(0.0) == 1.0);
    CHECK(sinc(1e-5) == doctest::Approx(std::sin(1e-5) / 1e-5).epsilon(1e-15));
    CHECK(sinc(kPi) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(sinc(-2.0) == sinc(2.0));
}

TEST_CASE("cells are the product of phase, pump and sinc") {
    const CrystalSpec c = kdp_at(532.0, 20.0);
    const ShapedPump pump{pulse_fs(532.0, 25.0), FabryPerot{50.0, 0.64, 0.0}};
    const FrequencyGrid g = default_grid(c, pump.pulse.sigma, 64);
    const TpsaGrid t = build_tpsa(c, pump, g);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> pick(0, 63);
    for (int k = 0; k < 50; ++k) {
        const int r = pick(rng);
        const int q = pick(rng);
        const double ws = g.signal()[r];
        const double wi = g.idler()[q];
        const double x = delta_kz(c, ws, wi) * c.length_mm / 2.0;
        const Complex expected = std::polar(1.0, x) * shaped_pump(pump.pulse, pump.fp, ws + wi) * sinc(x);
        CHECK(t.amplitude(r, q) == expected);
        // The phase factor never changes the modulus.
        CHECK(std::abs(std::abs(t.amplitude(r, q)) - std::abs(shaped_pump(pump.pulse, pump.fp, ws + wi) * sinc(x))) <
              1e-15);
    }
}

TEST_CASE("phase matched cell carries the pump amplitude") {
    const CrystalSpec c = kdp_at(415.0, 15.0);
    const GaussianPulse p = pulse_fs(415.0, 160.0);
    const double w = 0.5 * c.pump_center;
    const TpsaGrid t = build_tpsa(c, p, FrequencyGrid({w, w + 1e-3}, {w, w + 1e-3}));
    CHECK(std::abs(std::abs(t.amplitude(0, 0)) - 1.0) < 1e-9);
}

TEST_CASE("narrow pump concentrates on the antidiagonal") {
    const CrystalSpec c = kdp_at(415.0, 15.0);
    GaussianPulse p{c.pump_center, 1e-5};
    const double w = 0.5 * c.pump_center;
    const TpsaGrid t = normalize(build_tpsa(c, p, FrequencyGrid::centered(w, 0.01, 101, w, 0.01, 101)));
    double on = 0.0;
    double total = 0.0;
    const RealMatrix I = t.intensity();
    for (int q = 0; q < 101; ++q)
        for (int r = 0; r < 101; ++r) {
            total += I(r, q);
            if (r + q == 100) on += I(r, q);
        }
    CHECK(on / total > 0.999);
}

TEST_CASE("out of range cell is identified") {
    const CrystalSpec c = kdp_at(415.0, 15.0);
    const GaussianPulse p = pulse_fs(415.0, 160.0);
    try {
        build_tpsa(c, p, FrequencyGrid::centered(0.5 * c.pump_center, 2.0, 8, 0.5 * c.pump_center, 0.01, 8));
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("index 0") != std::string::npos);
    }
}

TEST_CASE("532 nm comb forms separated spots along the diagonal") {
    const CrystalSpec c = kdp_at(532.0, 20.0);
    const ShapedPump pump{pulse_fs(532.0, 25.0), FabryPerot{50.0, 0.64, 0.0}};
    const TpsaGrid t = normalize(build_tpsa(c, pump, default_grid(c, pump.pulse.sigma, 256)));
    const auto peaks = find_peaks(t, 0.2);
    REQUIRE(peaks.size() >= 3);
    // Spot centers line up along the phase-matching ridge, which tilts up to the right.
    for (std::size_t k = 1; k < peaks.size(); ++k) {
        const double ds = peaks[k].omega_s - peaks[0].omega_s;
        const double di = peaks[k].omega_i - peaks[0].omega_i;
        CHECK(ds * di > 0.0);
        CHECK(std::atan(di / ds) == doctest::Approx(tpsa_tilt(c)).epsilon(0.05));
    }
}

TEST_CASE("normalize") {
    const TpsaGrid t = random_grid(17, 23, 5);
    const TpsaGrid a = normalize(t);
    CHECK(a.power() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(a.normalized);
    CHECK((normalize(a).amplitude - a.amplitude).cwiseAbs().maxCoeff() < 1e-14);
    TpsaGrid scaled = t;
    scaled.amplitude *= 7.0;
    CHECK((normalize(scaled).amplitude - a.amplitude).cwiseAbs().maxCoeff() < 1e-14);
    TpsaGrid zero = t;
    zero.amplitude.setZero();
    CHECK_THROWS_AS(normalize(zero), DegenerateInput);
    TpsaGrid bad = t;
    bad.amplitude(2, 2) = Complex(NAN, 0.0);
    CHECK_THROWS_AS(normalize(bad), DataError);
}

TEST_CASE("isolate_peak") {
    const TpsaGrid t = normalize(random_grid(20, 30, 9));
    const auto& g = t.grid;
    const std::pair<double, double> center{2.0, 2.1};
    const std::pair<double, double> whole{g.signal().back() - g.signal().front(), g.idler().back() - g.idler().front()};
    const TpsaGrid same = isolate_peak(t, center, whole, 0.0);
    CHECK((same.amplitude - t.amplitude).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_THROWS_AS(isolate_peak(t, center, whole, 1.0), DegenerateInput);

    // A window of three samples per axis keeps exactly 9 cells.
    const TpsaGrid small = isolate_peak(t, {g.signal()[10], g.idler()[15]}, {2.5 * g.signal_step(), 2.5 * g.idler_step()}, 0.0);
    int kept = 0;
    for (int c = 0; c < 30; ++c)
        for (int r = 0; r < 20; ++r)
            if (small.amplitude(r, c) != Complex(0.0, 0.0)) {
                ++kept;
                CHECK(std::abs(r - 10) <= 1);
                CHECK(std::abs(c - 15) <= 1);
            }
    CHECK(kept == 9);
    CHECK(small.power() == doctest::Approx(1.0).epsilon(1e-12));

    // Cut drops cells at or below the fraction of the window maximum.
    const RealMatrix I = t.intensity();
    const TpsaGrid cut = isolate_peak(t, center, whole, 0.5);
    const double top = I.maxCoeff();
    for (int c = 0; c < 30; ++c)
        for (int r = 0; r < 20; ++r) CHECK((cut.amplitude(r, c) != Complex(0.0, 0.0)) == (I(r, c) > 0.5 * top));
}

TEST_CASE("marginals") {
    const FrequencyGrid g = FrequencyGrid::centered(0.0, 5.0, 41, 1.0, 3.0, 31);
    TpsaGrid t;
    t.grid = g;
    t.amplitude.resize(41, 31);
    auto f = [](double x) { return std::exp(-x * x / 2.0); };
    auto h = [](double y) { return std::exp(-(y - 1.0) * (y - 1.0)); };
    for (int c = 0; c < 31; ++c)
        for (int r = 0; r < 41; ++r) t.amplitude(r, c) = f(g.signal()[r]) * h(g.idler()[c]);
    t = normalize(t);
    const Marginals m = marginals(t);
    double sum_s = 0.0, sum_i = 0.0, norm_f = 0.0, norm_h = 0.0;
    for (double v : m.signal) sum_s += v * g.signal_step();
    for (double v : m.idler) sum_i += v * g.idler_step();
    CHECK(sum_s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sum_i == doctest::Approx(1.0).epsilon(1e-12));
    for (int r = 0; r < 41; ++r) norm_f += f(g.signal()[r]) * f(g.signal()[r]) * g.signal_step();
    for (int c = 0; c < 31; ++c) norm_h += h(g.idler()[c]) * h(g.idler()[c]) * g.idler_step();
    for (int r = 0; r < 41; ++r) CHECK(m.signal[r] == doctest::Approx(f(g.signal()[r]) * f(g.signal()[r]) / norm_f).epsilon(1e-10));
    for (int c = 0; c < 31; ++c) CHECK(m.idler[c] == doctest::Approx(h(g.idler()[c]) * h(g.idler()[c]) / norm_h).epsilon(1e-10));
}

TEST_CASE("tilt estimate of a synthetic ridge") {
    const FrequencyGrid g = FrequencyGrid::centered(0.0, 10.0, 301, 0.0, 10.0, 301);
    for (double deg : {30.0, -20.0, 60.0}) {
        const DoubleGaussianPeak peak{units::deg_to_rad(deg), 0.5, 1e3};
        const auto est = tilt_estimate(normalize(rasterize(peak, g)));
        REQUIRE(est.has_value());
        CHECK(std::abs(units::rad_to_deg(est->angle) - deg) < 0.5);
        CHECK(est->anisotropy > 0.9);
    }
}

TEST_CASE("round spot has no defined tilt") {
    const FrequencyGrid g = FrequencyGrid::centered(0.0, 6.0, 121, 0.0, 6.0, 121);
    MultiPeakModel round{{{Complex(1.0, 0.0), 0.0, 0.0}}, 1.0};
    CHECK_FALSE(tilt_estimate(normalize(rasterize(round, g))).has_value());
}

TEST_CASE("KDP at 450 nm tilts positive, at 370 nm negative") {
    for (double nm : {370.0, 450.0}) {
        const CrystalSpec c = kdp_at(nm, 15.0);
        const ShapedPump pump{pulse_fs(nm, 160.0), FabryPerot{100.0, 0.8, 0.0}};
        const TpsaGrid t = normalize(build_tpsa(c, pump, default_grid(c, pump.pulse.sigma, 256)));
        const auto est = tilt_estimate(t);
        REQUIRE(est.has_value());
        CHECK((est->angle > 0.0) == (nm > 415.0));
    }
}

TEST_CASE("find_peaks orders by brightness and skips plateaus") {
    MultiPeakModel m{{{Complex(1.0, 0.0), -2.0, -2.0}, {Complex(2.0, 0.0), 2.0, 2.0}, {Complex(0.1, 0.0), 2.0, -2.0}}, 0.5};
    const TpsaGrid t = rasterize(m, FrequencyGrid::centered(0.0, 4.0, 81, 0.0, 4.0, 81));
    auto peaks = find_peaks(t);
    REQUIRE(peaks.size() == 2u);
    CHECK(peaks[0].omega_s == doctest::Approx(2.0));
    CHECK(peaks[1].omega_s == doctest::Approx(-2.0));
    CHECK(find_peaks(t, 0.0).size() == 3u);

    TpsaGrid flat = t;
    flat.amplitude.setConstant(Complex(1.0, 0.0));
    CHECK(find_peaks(flat).size() <= 1u);
}
