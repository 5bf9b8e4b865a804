#include "pnmzi/harness.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pnmzi;

namespace {

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

bool has_violation(const ConfigError& e, const std::string& key) {
    return std::any_of(e.violations.begin(), e.violations.end(),
                       [&](const std::string& v) { return v.rfind(key, 0) == 0; });
}

const Residual* find(const RunRecord& rec, const std::string& name) {
    for (const auto& r : rec.residuals)
        if (r.scenario == name) return &r;
    return nullptr;
}

}  // namespace

TEST_CASE("config round trip") {
    for (const auto& name : preset_names()) {
        const ScenarioConfig cfg = preset(name);
        const Json j = to_json(cfg);
        CHECK(to_json(parse_config(j)) == j);
        CHECK(to_json(parse_config(Json::parse(j.dump()))) == j);
    }
}

TEST_CASE("config errors list every violation") {
    Json j = to_json(preset("qeyssat"));
    j["geometry"]["q"] = -1.0;
    j["wavelength"] = 0.0;
    j["body"]["gm"] = "heavy";
    j["bogus"] = 1;
    j["output"]["format"] = "xml";
    try {
        parse_config(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(has_violation(e, "geometry.q"));
        CHECK(has_violation(e, "wavelength"));
        CHECK(has_violation(e, "body.gm"));
        CHECK(has_violation(e, "bogus"));
        CHECK(has_violation(e, "output.format"));
    }
}

TEST_CASE("empty sweep range is rejected") {
    ScenarioConfig cfg = preset("qeyssat");
    cfg.sweep = SweepSpec{"theta", 0.0, 1.0, 0, true};
    CHECK_FALSE(validate_config(cfg).empty());
    CHECK_THROWS_AS(parse_config(to_json(cfg)), ConfigError);
    CHECK_THROWS_AS(preset("nope"), ConfigError);
}

TEST_CASE("preset runs") {
    const RunRecord q = run_scenario(preset("qeyssat"));
    CHECK(q.outputs["delta_psi"].get<double>() == doctest::Approx(2.0).epsilon(0.1));
    const RunRecord g = run_scenario(preset("ground"));
    const double dpsi = g.outputs["delta_psi"].get<double>();
    CHECK(dpsi > 1e-4);
    CHECK(dpsi < 1e-3);
    CHECK(q.passed());
}

TEST_CASE("sweep: one row per point, reproducible, thread-independent") {
    ScenarioConfig cfg = preset("qeyssat");
    cfg.kind = ScenarioKind::PhaseCoordinates;
    cfg.horizontal = false;
    cfg.geometry.zeta = cfg.geometry.theta + kPi / 2.0;
    cfg.sweep = SweepSpec{"zeta", 0.0, 2.0 * kPi, 100, false};
    cfg.threads = 4;
    const RunRecord a = run_sweep(cfg);
    const std::string csv = to_csv_text(a);
    CHECK(a.sweep_rows.size() == 100);
    CHECK(line_count(csv) == 101);
    CHECK(to_csv_text(run_sweep(cfg)) == csv);
    CHECK(to_json_text(run_sweep(cfg)) == to_json_text(a));
    cfg.threads = 1;
    CHECK(to_csv_text(run_sweep(cfg)) == csv);
}

TEST_CASE("emit writes the record and its attachments") {
    const auto dir = std::filesystem::temp_directory_path() / "pnmzi-test-emit";
    std::filesystem::remove_all(dir);
    const RunRecord rec = run_scenario(preset("qeyssat"));
    const std::string path = emit(rec, "json", dir.string(), "q");
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == to_json_text(rec));
    CHECK(Json::parse(ss.str())["outputs"]["delta_psi"].get<double>() == rec.outputs["delta_psi"].get<double>());
    for (const auto& [suffix, text] : rec.attachments) CHECK(std::filesystem::exists(dir / ("q-" + suffix + ".csv")));
    CHECK_THROWS_AS(emit(rec, "xml", dir.string(), "q"), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 1.0}) CHECK(std::stod(format_double(v)) == v);
    CHECK(format_double(2.0) == "2.0");
}

TEST_CASE("validate suite") {
    SUBCASE("flat space gives zero residuals") {
        const RunRecord rec = validate_suite(preset("flat"));
        CHECK(rec.passed());
        for (const auto& r : rec.residuals) CHECK(r.value < 1e-15);
    }
    SUBCASE("Earth passes") {
        const RunRecord rec = validate_suite(preset("validate"));
        CHECK(rec.passed());
        CHECK(rec.outputs["failed"].get<std::size_t>() == 0);
    }
    SUBCASE("a tolerance below the achievable accuracy fails the named check") {
        ScenarioConfig cfg = preset("validate");
        cfg.tolerances.shapiro = 1e-13;
        const RunRecord rec = validate_suite(cfg);
        CHECK_FALSE(rec.passed());
        const Residual* r = find(rec, "shapiro/AC");
        REQUIRE(r != nullptr);
        CHECK_FALSE(r->passed);
        CHECK(find(rec, "closed-loop")->passed);
    }
    SUBCASE("an oracle that cannot meet its constraints is reported per check") {
        ScenarioConfig cfg = preset("validate");
        cfg.tolerances.constraint = 1e-30;
        const RunRecord rec = validate_suite(cfg);
        CHECK_FALSE(rec.passed());
        const Residual* r = find(rec, "shapiro/AB");
        REQUIRE(r != nullptr);
        CHECK(std::isinf(r->value));
        CHECK_FALSE(r->note.empty());
    }
}
