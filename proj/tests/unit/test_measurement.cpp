#include <numeric>

#include "spdc/errors.hpp"
#include "spdc/gaussian_model.hpp"
#include "spdc/measurement.hpp"
#include "support.hpp"

using namespace spdc;

namespace {

const FiberDispersion& table() {
    static const FiberDispersion t = FiberDispersion::load(data_directory() / "fibers" / "nufern_780hp.csv");
    return t;
}

FiberPair fibers(double km = 1.0) { return {{km, table()}, {km, table()}}; }

// Tilted double-Gaussian spot around (signal_nm, idler_nm), sampled on n x n cells.
TpsaGrid spot(double signal_nm, double idler_nm, int n, double half_span = 0.006) {
    const double ws = units::nm_to_omega(signal_nm);
    const double wi = units::nm_to_omega(idler_nm);
    const DoubleGaussianPeak p{units::deg_to_rad(30.0), 0.0008, 0.002};
    TpsaGrid t;
    t.grid = FrequencyGrid::centered(ws, half_span, n, wi, half_span, n);
    t.amplitude.resize(n, n);
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < n; ++r) t.amplitude(r, c) = peak_amplitude(p, t.grid.signal()[r] - ws, t.grid.idler()[c] - wi);
    return normalize(t);
}

DetectorChain chain(double jitter, double bin, std::uint64_t pairs, double trigger = 0.0) {
    DetectorChain c;
    c.jitter_ps = jitter;
    c.trigger_jitter_ps = trigger;
    c.bin_width_ps = bin;
    c.total_pairs = pairs;
    return c;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / b.size();
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sab += (a[k] - ma) * (b[k] - mb);
        saa += (a[k] - ma) * (a[k] - ma);
        sbb += (b[k] - mb) * (b[k] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

std::vector<double> as_double(const std::vector<std::uint64_t>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("time map anchors") {
    const FiberSpec f{1.0, table()};
    CHECK(time_map(f, 0.0, 800.0) == 0.0);
    CHECK(std::abs(time_map(f, units::nm_interval_to_omega(1.0, 800.0), 800.0)) == doctest::Approx(120.0).epsilon(1e-12));
    // Exact frequency difference of 799.5 and 800.5 nm.
    const double dw = units::nm_to_omega(799.5) - units::nm_to_omega(800.5);
    CHECK(time_map(f, dw, 800.0) == doctest::Approx(120.0000469).epsilon(1e-9));
    // Shorter wavelengths arrive later in this normal-dispersion fiber.
    CHECK(time_map(f, dw, 800.0) > 0.0);
    CHECK(time_map(FiberSpec{2.0, table()}, dw, 800.0) == doctest::Approx(2.0 * time_map(f, dw, 800.0)).epsilon(1e-15));
}

TEST_CASE("time map and inverse round trip") {
    const FiberSpec f{1.0, table()};
    for (double center : {780.0, 860.0})
        for (double nm : {center - 3.0, center - 0.2, center + 1.7}) {
            const double t = time_map(f, units::nm_to_omega(nm) - units::nm_to_omega(center), center);
            CHECK(std::abs(time_to_wavelength(f, t, center) - nm) < 1e-9);
            CHECK(detuning_from_time(f, t, center) == doctest::Approx(units::nm_to_omega(nm) - units::nm_to_omega(center)).epsilon(1e-12));
        }
    CHECK_THROWS_AS(time_map(f, 0.01, 1200.0), DomainError);
}

TEST_CASE("chain validation and timing") {
    CHECK_THROWS_AS(chain(-1.0, 10.0, 1).validate(), ContractError);
    CHECK_THROWS_AS(chain(1.0, 0.0, 1).validate(), ContractError);
    CHECK_THROWS_AS((FiberSpec{0.0, table()}.validate()), ContractError);
    CHECK(chain(30.0, 10.0, 1, 40.0).timing_sigma_ps() == doctest::Approx(50.0).epsilon(1e-15));
    const TimeAxis axis{-10.0, 10.0, 4};
    CHECK(axis.locate(-10.0) == 0);
    CHECK(axis.locate(-5.0) == 1);
    CHECK(axis.locate(9.999) == 3);
    CHECK(axis.locate(10.0) == -1);
    CHECK(axis.locate(-10.5) == -1);
    CHECK(axis.center(0) == doctest::Approx(-7.5));
}

TEST_CASE("fixed seed histogram is bit-identical and independent of sharding") {
    const TpsaGrid t = spot(860.0, 860.0, 96);
    const DetectorChain c = chain(50.0, 10.0, 200000, 57.7);
    const auto a = simulate_histogram(t, fibers(), c, 2024);
    const auto b = simulate_histogram(t, fibers(), c, 2024);
    const auto s4 = simulate_histogram(t, fibers(), c, 2024, std::nullopt, std::nullopt, 4);
    const auto s7 = simulate_histogram(t, fibers(), c, 2024, std::nullopt, std::nullopt, 7);
    CHECK(a.counts == b.counts);
    CHECK(a.counts == s4.counts);
    CHECK(a.counts == s7.counts);
    CHECK(a.overflow == s7.overflow);
    CHECK(a.total() + a.overflow == c.total_pairs);
    CHECK(a.seed == 2024u);
    const auto other = simulate_histogram(t, fibers(), c, 2025);
    CHECK(other.counts != a.counts);
    CHECK(other.total() + other.overflow == c.total_pairs);
}

TEST_CASE("overflow accounts for pairs outside narrow axes") {
    const TpsaGrid t = spot(860.0, 860.0, 48);
    const DetectorChain c = chain(50.0, 10.0, 20000);
    const HistogramAxes narrow{{-100.0, 100.0, 20}, {-100.0, 100.0, 20}};
    const auto h = simulate_histogram(t, fibers(), c, 1, std::nullopt, narrow);
    CHECK(h.overflow > 0u);
    CHECK(h.total() + h.overflow == 20000u);
}

TEST_CASE("zero power is rejected") {
    TpsaGrid t = spot(860.0, 860.0, 16);
    t.amplitude.setZero();
    CHECK_THROWS_AS(simulate_histogram(t, fibers(), chain(0.0, 10.0, 10), 1), DegenerateInput);
}

TEST_CASE("zero jitter histogram follows the time-rescaled intensity") {
    const TpsaGrid t = spot(860.0, 860.0, 256);
    const DetectorChain c = chain(0.0, 20.0, 1000000);
    const BandCenters centers = BandCenters::of(t.grid);
    const HistogramAxes axes = default_axes(t.grid, fibers(), c, centers);
    const auto h = simulate_histogram(t, fibers(), c, 7, centers, axes, 4);
    CHECK(h.overflow == 0u);

    // Bin |F|^2 with each cell spread over an 8 x 8 lattice of sub-points.
    std::vector<double> binned(h.counts.size(), 0.0);
    const RealMatrix I = t.intensity();
    const FiberSpec f{1.0, table()};
    const double ws_c = units::nm_to_omega(centers.signal_nm);
    const double wi_c = units::nm_to_omega(centers.idler_nm);
    const int sub = 8;
    for (int q = 0; q < I.cols(); ++q)
        for (int r = 0; r < I.rows(); ++r)
            for (int a = 0; a < sub; ++a)
                for (int b = 0; b < sub; ++b) {
                    const double os = ((a + 0.5) / sub - 0.5) * t.grid.signal_step();
                    const double oi = ((b + 0.5) / sub - 0.5) * t.grid.idler_step();
                    const int bs = axes.signal.locate(time_map(f, t.grid.signal()[r] + os - ws_c, centers.signal_nm));
                    const int bi = axes.idler.locate(time_map(f, t.grid.idler()[q] + oi - wi_c, centers.idler_nm));
                    binned[static_cast<std::size_t>(bs) * axes.idler.bins + bi] += I(r, q);
                }
    CHECK(correlation(as_double(h.counts), binned) > 0.999);
}

TEST_CASE("expected histogram matches a large sample") {
    const TpsaGrid t = spot(860.0, 860.0, 96);
    const DetectorChain c = chain(50.0, 25.0, 1000000, 57.7);
    const BandCenters centers = BandCenters::of(t.grid);
    const HistogramAxes axes = default_axes(t.grid, fibers(), c, centers);
    const auto p = expected_histogram(t, fibers(), c, centers, axes);
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    CHECK(total <= 1.0 + 1e-12);
    CHECK(total > 0.9999);
    const auto h = simulate_histogram(t, fibers(), c, 3, centers, axes, 4);
    CHECK(correlation(as_double(h.counts), p) > 0.999);
}

TEST_CASE("sampling error falls as one over root N") {
    const TpsaGrid t = spot(860.0, 860.0, 64);
    std::vector<double> lx, ly;
    for (std::uint64_t n : {1000ull, 10000ull, 100000ull, 1000000ull}) {
        const DetectorChain c = chain(50.0, 100.0, n);
        const BandCenters centers = BandCenters::of(t.grid);
        const HistogramAxes axes = default_axes(t.grid, fibers(), c, centers);
        const auto p = expected_histogram(t, fibers(), c, centers, axes);
        // Average over a few seeds to steady the estimate.
        double l1 = 0.0;
        for (std::uint64_t seed = 1; seed <= 4; ++seed) {
            const auto h = simulate_histogram(t, fibers(), c, seed, centers, axes);
            for (std::size_t k = 0; k < p.size(); ++k) l1 += std::abs(static_cast<double>(h.counts[k]) / n - p[k]);
        }
        lx.push_back(std::log10(static_cast<double>(n)));
        ly.push_back(std::log10(l1 / 4.0));
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sxy += (lx[k] - mx) * (ly[k] - my);
        sxx += (lx[k] - mx) * (lx[k] - mx);
    }
    const double slope = sxy / sxx;
    CAPTURE(slope);
    CHECK(std::abs(slope + 0.5) <= 0.1);
}

TEST_CASE("50 ps jitter broadens a narrow line by 50/120 nm") {
    // A single very narrow cell at 800 nm on both arms.
    const double w = units::nm_to_omega(800.0);
    TpsaGrid t;
    t.grid = FrequencyGrid::centered(w, 1e-7, 3, w, 1e-7, 3);
    t.amplitude = ComplexMatrix::Zero(3, 3);
    t.amplitude(1, 1) = 1.0;
    t = normalize(t);
    const DetectorChain c = chain(50.0, 1.0, 400000);
    const auto h = simulate_histogram(t, fibers(), c, 5);
    const auto wl = time_to_wavelength(h, fibers(), h.centers);
    const int ns = static_cast<int>(wl.signal_edges_nm.size()) - 1;
    const int ni = static_cast<int>(wl.idler_edges_nm.size()) - 1;
    double n = 0, m1 = 0, m2 = 0;
    for (int s = 0; s < ns; ++s) {
        double row = 0;
        for (int i = 0; i < ni; ++i) row += static_cast<double>(wl.counts[static_cast<std::size_t>(s) * ni + i]);
        const double x = 0.5 * (wl.signal_edges_nm[s] + wl.signal_edges_nm[s + 1]);
        n += row;
        m1 += row * x;
        m2 += row * x * x;
    }
    const double sd = std::sqrt(m2 / n - (m1 / n) * (m1 / n));
    CHECK(m1 / n == doctest::Approx(800.0).epsilon(1e-5));
    CHECK(sd == doctest::Approx(50.0 / 120.0).epsilon(0.01));
}

TEST_CASE("wavelength relabelling") {
    const TpsaGrid t = spot(860.0, 855.0, 64);
    const DetectorChain c = chain(50.0, 10.0, 50000);
    const auto h = simulate_histogram(t, fibers(), c, 9);
    const auto wl = time_to_wavelength(h, fibers(), h.centers);
    CHECK(std::is_sorted(wl.signal_edges_nm.begin(), wl.signal_edges_nm.end()));
    CHECK(std::is_sorted(wl.idler_edges_nm.begin(), wl.idler_edges_nm.end()));
    CHECK(std::accumulate(wl.counts.begin(), wl.counts.end(), std::uint64_t{0}) == h.total());
    // Longest wavelength bin holds the earliest arrival bin.
    const int ni = h.axes.idler.bins;
    const int ns = h.axes.signal.bins;
    CHECK(wl.counts[static_cast<std::size_t>(ns - 1) * ni + (ni - 1)] == h.at(0, 0));

    // Bin centers map back onto themselves.
    const FiberSpec f{1.0, table()};
    for (int k = 0; k < ns; k += 17) {
        const double tc = h.axes.signal.center(k);
        const double nm = time_to_wavelength(f, tc, h.centers.signal_nm);
        CHECK(time_map(f, units::nm_to_omega(nm) - units::nm_to_omega(h.centers.signal_nm), h.centers.signal_nm) ==
              doctest::Approx(tc).epsilon(1e-9).scale(1.0));
    }

    BandCenters moved = h.centers;
    moved.idler_nm += 1.0;
    CHECK_THROWS_AS(time_to_wavelength(h, fibers(), moved), ContractError);
    CHECK_THROWS_AS(time_to_wavelength(h, fibers(2.0), h.centers), ContractError);
}

TEST_CASE("effective resolution of the reference chain") {
    const FiberSpec f{1.0, table()};
    const DetectorChain c = chain(50.0, 10.0, 0, 57.7);
    CHECK(effective_resolution_nm(f, c, 800.0) == doctest::Approx(1.5).epsilon(0.01));
    const double sigma = std::sqrt(50.0 * 50.0 + 57.7 * 57.7 + 100.0 / 12.0);
    CHECK(effective_resolution_nm(f, c, 800.0) == doctest::Approx(kFwhmPerSigma * sigma / 120.0).epsilon(1e-12));
}

TEST_CASE("blur to resolution") {
    const TpsaGrid t = spot(860.0, 860.0, 64, 0.02);
    const RealMatrix I = t.intensity();
    CHECK((blur_to_resolution(I, t.grid, 0.0) - I).cwiseAbs().maxCoeff() == 0.0);
    const RealMatrix b = blur_to_resolution(I, t.grid, 1.5);
    CHECK(b.sum() == doctest::Approx(I.sum()).epsilon(1e-10));
    CHECK(b.maxCoeff() < I.maxCoeff());
    CHECK_THROWS_AS(blur_to_resolution(I, t.grid, -1.0), ContractError);
    CHECK_THROWS_AS(blur_to_resolution(I.topRows(10), t.grid, 1.0), ContractError);
}

TEST_CASE("spots closer than the resolution merge") {
    auto maxima_after_blur = [](double separation_nm, double resolution_nm) {
        const double w0 = units::nm_to_omega(860.0);
        const double dw = units::nm_interval_to_omega(separation_nm, 860.0);
        MultiPeakModel m{{{Complex(1.0, 0.0), w0 - 0.5 * dw, w0 - 0.5 * dw}, {Complex(1.0, 0.0), w0 + 0.5 * dw, w0 + 0.5 * dw}},
                         units::nm_interval_to_omega(0.1, 860.0)};
        const TpsaGrid t = rasterize(m, FrequencyGrid::centered(w0, 4 * dw, 161, w0, 4 * dw, 161));
        TpsaGrid blurred = t;
        blurred.amplitude = blur_to_resolution(t.intensity(), t.grid, resolution_nm).cast<Complex>();
        return find_peaks(blurred, 0.01).size();
    };
    CHECK(maxima_after_blur(0.7, 0.3) == 2u);
    CHECK(maxima_after_blur(0.7, 1.5) == 1u);
    CHECK(maxima_after_blur(1.0, 2.0) == 1u);
}
