#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "spdc/app/config.hpp"
#include "spdc/app/output.hpp"
#include "spdc/app/pipeline.hpp"
#include "spdc/app/search.hpp"
#include "spdc/errors.hpp"
#include "support.hpp"

using namespace spdc;
using namespace spdc::app;
namespace fs = std::filesystem;

namespace {

fs::path config_file(const std::string& name) { return fs::path(SPDC_CONFIG_DIR) / name; }

Json base_doc(const std::string& name) { return read_json(config_file(name)); }

std::string rejected_path(const Json& doc) {
    try {
        parse_config(doc);
    } catch (const ValidationError& e) {
        return e.path();
    }
    return "<accepted>";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("spdc_test_app_" + name);
    fs::remove_all(dir);
    return dir;
}

const RunResult& fig1c() {
    static const RunResult r = run_pipeline(load_config(config_file("fig1c.cfg")));
    return r;
}

// Overlap of two normalized distributions, sum of min(p, q).
double shared_mass(std::vector<double> p, std::vector<double> q) {
    const double sp = std::accumulate(p.begin(), p.end(), 0.0);
    const double sq = std::accumulate(q.begin(), q.end(), 0.0);
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) s += std::min(p[k] / sp, q[k] / sq);
    return s;
}

}  // namespace

TEST_CASE("bundled configs parse") {
    for (const char* name : {"fig1c.cfg", "fig2_pump.cfg", "fig3.cfg", "fig3_tilted.cfg", "fig5.cfg", "supp_440_tilted.cfg",
                             "supp_440_untilted.cfg", "supp_532_comb.cfg"}) {
        CAPTURE(name);
        CHECK_NOTHROW(load_config(config_file(name)));
    }
    const RunConfig c = load_config(config_file("fig1c.cfg"));
    CHECK(c.crystal.length_mm == 20.0);
    CHECK(c.pump.shape == PumpShape::FabryPerot);
    CHECK(c.analysis.window == WindowMode::Neighbors);
    CHECK(c.analysis.refinement_check);
    CHECK_FALSE(c.measurement.has_value());
}

TEST_CASE("validation errors name the offending field") {
    const Json doc = base_doc("fig1c.cfg");
    Json bad = doc;
    bad["analysis"]["bogus"] = 1;
    CHECK(rejected_path(bad) == "analysis.bogus");
    bad = doc;
    bad["crystal"]["length_mm"] = "long";
    CHECK(rejected_path(bad) == "crystal.length_mm");
    bad = doc;
    bad["crystal"]["length_mm"] = -3;
    CHECK(rejected_path(bad) == "crystal.length_mm");
    bad = doc;
    bad["pump"]["fabry_perot"]["reflectance"] = 1.0;
    CHECK(rejected_path(bad) == "pump.fabry_perot.reflectance");
    bad = doc;
    bad["grid"]["points"] = 2.5;
    CHECK(rejected_path(bad) == "grid.points");
    bad = doc;
    bad["pump"].erase("center_nm");
    CHECK(rejected_path(bad) == "pump.center_nm");
    // Neighbors needs spot structure that a bare Gaussian pump does not have.
    bad = doc;
    bad["pump"]["model"] = "gaussian";
    bad["pump"].erase("fabry_perot");
    CHECK(rejected_path(bad) == "analysis.window");
    CHECK_THROWS_AS(load_config(config_file("no_such.cfg")), ValidationError);
}

TEST_CASE("parameter paths") {
    CHECK(parameter_pointer("crystal.length_mm").to_string() == "/crystal/length_mm");
    CHECK_THROWS_AS(parameter_pointer(""), ValidationError);
    CHECK_THROWS_AS(parameter_pointer("crystal..length_mm"), ValidationError);
    const Json doc = base_doc("fig1c.cfg");
    const Json moved = with_parameter(doc, "pump.fabry_perot.reflectance", 0.5);
    CHECK(parse_config(moved).pump.fp.reflectance == 0.5);
    CHECK(doc["pump"]["fabry_perot"]["reflectance"] == 0.64);
    CHECK_THROWS_AS(with_parameter(doc, "nothing.here", 1), ValidationError);
}

TEST_CASE("fig1c spots are separable") {
    const RunResult& r = fig1c();
    REQUIRE(r.peak.decomposition.size() >= 1);
    CHECK(r.peak.schmidt_number >= 1.0);
    CHECK(r.peak.schmidt_number < 1.5);

    // Neighbouring spot: the brightest other peak whose comb line differs.
    const auto peaks = find_peaks(r.full, 0.05);
    const double sum0 = r.peak.brightest.omega_s + r.peak.brightest.omega_i;
    const auto other = std::find_if(peaks.begin(), peaks.end(), [&](const Peak& p) {
        return std::abs(p.omega_s + p.omega_i - sum0) > 0.5 * *r.model.comb_spacing;
    });
    REQUIRE(other != peaks.end());
    const RunConfig cfg = load_config(config_file("fig1c.cfg"));
    const PeakAnalysis second = analyze_peak(cfg, r.model, *other);

    // Both spots sampled on the full grid to share one axis.
    const TpsaGrid a = isolate_peak(r.full, r.peak.window.center, r.peak.window.full_width, cfg.analysis.intensity_cut);
    const TpsaGrid b = isolate_peak(r.full, second.window.center, second.window.full_width, cfg.analysis.intensity_cut);
    CHECK(shared_mass(marginals(a).signal, marginals(b).signal) < 0.05);
    CHECK(shared_mass(marginals(a).idler, marginals(b).idler) < 0.05);

}

TEST_CASE("fig1c refinement changes K by less than half a percent") {
    const RunResult& r = fig1c();
    REQUIRE(r.peak.refined_schmidt_number.has_value());
    CHECK(test::rel(*r.peak.refined_schmidt_number, r.peak.schmidt_number) < 5e-3);
    CHECK(r.peak.edge_intensity < 0.5);
}

TEST_CASE("full window spans the whole grid") {
    Json doc = base_doc("fig3.cfg");
    doc["grid"]["points"] = 128;
    doc["analysis"]["window"] = "full";
    const RunResult r = run_pipeline(parse_config(doc));
    const auto& s = r.full.grid.signal();
    CHECK(r.peak.window.full_width.first >= 0.99 * (s.back() - s.front()));
    CHECK(r.peak.isolated.amplitude.rows() == parse_config(doc).analysis.local_points);
    CHECK(r.peak.schmidt_number >= 1.0);
}

TEST_CASE("sha256 and number formatting") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(format_number(0.1) == "0.1");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("output set publishes a manifest and refuses foreign directories") {
    const fs::path dir = scratch("manifest");
    OutputSet out(dir);
    out.add("a.txt", std::string("hello\n"));
    out.add("sub/b.bin", std::vector<std::uint8_t>{0, 1, 2, 255});
    out.commit(Json{{"name", "t"}});
    const Json manifest = Json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["name"] == "t");
    REQUIRE(manifest["files"].size() == 2);
    for (const auto& f : manifest["files"]) {
        const std::string bytes = slurp(dir / f["path"].get<std::string>());
        CHECK(f["sha256"] == sha256_hex(bytes));
        CHECK(f["bytes"] == bytes.size());
    }
    CHECK_FALSE(fs::exists(dir.parent_path() / ("." + dir.filename().string() + ".staging")));

    // Rerun replaces its own output.
    OutputSet again(dir);
    again.add("c.txt", std::string("x"));
    again.commit(Json::object());
    CHECK(fs::exists(dir / "c.txt"));
    CHECK_FALSE(fs::exists(dir / "a.txt"));

    const fs::path foreign = scratch("foreign");
    fs::create_directories(foreign);
    { std::ofstream(foreign / "keep.txt") << "mine"; }
    OutputSet clash(foreign);
    clash.add("c.txt", std::string("x"));
    CHECK_THROWS_AS(clash.commit(Json::object()), Error);
    CHECK(slurp(foreign / "keep.txt") == "mine");
    fs::remove_all(dir);
    fs::remove_all(foreign);
}

TEST_CASE("output root from the environment") {
    ::setenv(kOutputRootVariable, "/tmp/spdc_root", 1);
    CHECK(resolve_output_dir("runs/a") == fs::path("/tmp/spdc_root/runs/a"));
    CHECK(resolve_output_dir("/abs/b") == fs::path("/abs/b"));
    ::unsetenv(kOutputRootVariable);
    CHECK(resolve_output_dir("c") == fs::current_path() / "c");
}

TEST_CASE("reruns are byte-identical") {
    Json doc = base_doc("supp_440_tilted.cfg");
    doc["grid"]["points"] = 128;
    doc["analysis"]["local_points"] = 96;
    const RunConfig cfg = parse_config(doc);
    std::vector<fs::path> dirs;
    for (int k = 0; k < 2; ++k) {
        dirs.push_back(scratch("rerun" + std::to_string(k)));
        OutputSet out(dirs.back());
        add_run_files(out, cfg, run_pipeline(cfg));
        out.commit(Json::object());
    }
    int compared = 0;
    for (const auto& e : fs::recursive_directory_iterator(dirs[0])) {
        if (!e.is_regular_file()) continue;
        const fs::path rel = fs::relative(e.path(), dirs[0]);
        CAPTURE(rel.string());
        CHECK(slurp(e.path()) == slurp(dirs[1] / rel));
        ++compared;
    }
    CHECK(compared >= 3);
    for (const auto& d : dirs) fs::remove_all(d);
}

TEST_CASE("grid csv layout") {
    const FrequencyGrid g = FrequencyGrid::centered(3.5, 0.01, 3, 3.6, 0.01, 2);
    const std::string csv = grid_csv(g, RealMatrix::Constant(3, 2, 0.5));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("design space parsing") {
    const DesignSpace s = DesignSpace::parse(base_doc("search_532_length.json"));
    REQUIRE(s.variables.size() == 1);
    CHECK(s.variables[0].param == "crystal.length_mm");
    CHECK(*s.variables[0].start == 20.0);
    CHECK_THROWS_AS(DesignSpace::parse(Json{{"variables", Json::array()}}), ValidationError);
    CHECK_THROWS_AS(DesignSpace::parse(Json{{"variables", {{{"param", "a"}, {"min", 2}, {"max", 1}}}}}), ValidationError);
    CHECK_THROWS_AS(DesignSpace::parse(Json{{"variables", {{{"param", "a"}, {"min", 0}, {"max", 1}}}}, {"extra", 1}}),
                    ValidationError);
    Json six = Json{{"variables", Json::array()}};
    for (int k = 0; k < 6; ++k) six["variables"].push_back({{"param", "p" + std::to_string(k)}, {"min", 0}, {"max", 1}});
    CHECK_THROWS_AS(DesignSpace::parse(six), ValidationError);
}

namespace {

DesignSpace box2() {
    DesignSpace s;
    s.variables = {{"x", -2.0, 3.0, 2.5}, {"y", -1.0, 4.0, std::nullopt}};
    s.tolerance = 1e-4;
    s.max_cycles = 8;
    return s;
}

Evaluation bowl(const std::vector<double>& x) {
    Evaluation e;
    e.x = x;
    e.objective = 1.0 + std::pow(x[0] - 0.7, 2) + 2.0 * std::pow(x[1] - 1.3, 2) + 0.5 * (x[0] - 0.7) * (x[1] - 1.3);
    e.feasible = true;
    return e;
}

}  // namespace

TEST_CASE("coordinate descent on a quadratic bowl") {
    int calls = 0;
    const Objective f = [&](const std::vector<double>& x) {
        ++calls;
        return bowl(x);
    };
    const SearchResult r = coordinate_descent(box2(), f, 200, {2.5, 1.5});
    CHECK(calls == static_cast<int>(r.log.size()));
    CHECK(calls <= 200);
    CHECK(r.best.x[0] == doctest::Approx(0.7).epsilon(1e-2));
    CHECK(r.best.x[1] == doctest::Approx(1.3).epsilon(1e-2));
    for (const auto& e : r.log) CHECK(r.best.objective <= e.objective);
    for (const auto& e : r.log) {
        CHECK(e.x[0] >= -2.0);
        CHECK(e.x[0] <= 3.0);
    }
}

TEST_CASE("budget of one returns the start point") {
    const SearchResult r = coordinate_descent(box2(), bowl, 1, {2.5, 1.5});
    REQUIRE(r.log.size() == 1u);
    CHECK(r.best.x == std::vector<double>{2.5, 1.5});
}

TEST_CASE("infeasible points never win") {
    // Constraint x + y >= 3 cuts off the unconstrained minimum.
    const Objective f = [](const std::vector<double>& x) {
        Evaluation e = bowl(x);
        e.feasible = x[0] + x[1] >= 3.0;
        if (!e.feasible) e.note = "constraint";
        return e;
    };
    const SearchResult r = coordinate_descent(box2(), f, 60, {2.5, 1.5});
    CHECK(r.best.feasible);
    CHECK(r.best.x[0] + r.best.x[1] >= 3.0);
    for (const auto& e : r.log)
        if (e.feasible) CHECK(r.best.objective <= e.objective);

    const Objective never = [](const std::vector<double>& x) {
        Evaluation e = bowl(x);
        e.feasible = false;
        return e;
    };
    CHECK_THROWS_AS(coordinate_descent(box2(), never, 10, {2.5, 1.5}), NotApplicable);
}

TEST_CASE("start point and design evaluation") {
    Json base = base_doc("supp_440_tilted.cfg");
    base["grid"]["points"] = 128;
    base["analysis"]["local_points"] = 96;
    DesignSpace s;
    s.variables = {{"crystal.length_mm", 5.0, 30.0, std::nullopt}, {"pump.fabry_perot.reflectance", 0.1, 0.9, 0.3}};
    const auto x0 = start_point(base, s);
    CHECK(x0[0] == base["crystal"]["length_mm"].get<double>());
    CHECK(x0[1] == 0.3);

    const Evaluation e = evaluate_design(base, s, x0);
    CHECK(e.feasible);
    CHECK(e.objective >= 1.0);

    const SearchResult one = design_search(base, s, 1);
    CHECK(one.best.x == x0);
    CHECK(one.best.objective == e.objective);

    // A margin nobody can reach leaves nothing feasible.
    s.min_margin = 1e6;
    CHECK_FALSE(evaluate_design(base, s, x0).feasible);
    CHECK_THROWS_AS(design_search(base, s, 2), NotApplicable);
}
