#include "pnmzi/harness.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace pnmzi {

namespace {

const std::map<std::string, ScenarioKind>& kind_names() {
    static const std::map<std::string, ScenarioKind> m = {
        {"phase-coordinates", ScenarioKind::PhaseCoordinates},
        {"phase-lengths", ScenarioKind::PhaseLengths},
        {"polarization", ScenarioKind::Polarization},
        {"budget", ScenarioKind::Budget},
        {"sagnac", ScenarioKind::Sagnac},
        {"validate", ScenarioKind::Validate},
    };
    return m;
}

const std::set<std::string>& sweep_parameters() {
    static const std::set<std::string> s = {"zeta", "theta", "h", "q", "b", "alpha", "gamma", "wavelength"};
    return s;
}

// Reads fields of one JSON object, recording every problem instead of stopping at the first.
class Reader {
public:
    Reader(const Json& obj, std::string path, std::vector<std::string>& errs)
        : obj_(obj), path_(std::move(path)), errs_(errs) {
        if (!obj_.is_object()) errs_.push_back(path_ + ": expected an object");
    }

    ~Reader() {
        if (!obj_.is_object()) return;
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key())) errs_.push_back(where(it.key()) + ": unknown parameter");
    }

    const Json* find(const std::string& key) {
        seen_.insert(key);
        if (!obj_.is_object()) return nullptr;
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const Json* v = find(key)) {
            if (v->is_number()) out = v->get<double>();
            else errs_.push_back(where(key) + ": expected a number");
        }
    }

    void count(const std::string& key, std::size_t& out) {
        if (const Json* v = find(key)) {
            if (v->is_number_unsigned()) out = v->get<std::size_t>();
            else if (v->is_number_integer()) errs_.push_back(where(key) + ": must be >= 0");
            else errs_.push_back(where(key) + ": expected an integer");
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (const Json* v = find(key)) {
            if (v->is_boolean()) out = v->get<bool>();
            else errs_.push_back(where(key) + ": expected true or false");
        }
    }

    void string(const std::string& key, std::string& out) {
        if (const Json* v = find(key)) {
            if (v->is_string()) out = v->get<std::string>();
            else errs_.push_back(where(key) + ": expected a string");
        }
    }

    void vec3(const std::string& key, Vec3& out) {
        if (const Json* v = find(key)) {
            if (v->is_array() && v->size() == 3 && (*v)[0].is_number() && (*v)[1].is_number() && (*v)[2].is_number())
                out = Vec3((*v)[0].get<double>(), (*v)[1].get<double>(), (*v)[2].get<double>());
            else errs_.push_back(where(key) + ": expected [x, y, z]");
        }
    }

    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const Json& obj_;
    std::string path_;
    std::vector<std::string>& errs_;
    std::set<std::string> seen_;
};

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

void parse_station(const Json& j, const std::string& path, StationState& st, std::vector<std::string>& errs) {
    Reader r(j, path, errs);
    r.vec3("x", st.x);
    r.vec3("v", st.v);
}

}  // namespace

const char* to_string(ScenarioKind kind) {
    for (const auto& [name, k] : kind_names())
        if (k == kind) return name.c_str();
    return "unknown";
}

std::vector<double> SweepSpec::values() const {
    std::vector<double> out;
    if (steps == 0) return out;
    if (steps == 1) return {start};
    const double div = endpoint ? static_cast<double>(steps - 1) : static_cast<double>(steps);
    for (std::size_t i = 0; i < steps; ++i) out.push_back(start + (stop - start) * static_cast<double>(i) / div);
    return out;
}

MziGeometry ScenarioConfig::effective_geometry() const {
    MziGeometry g = geometry;
    if (horizontal) g.zeta = g.theta + kPi / 2.0;
    return g;
}

ConfigError::ConfigError(std::vector<std::string> v)
    : std::runtime_error([&] {
          std::ostringstream os;
          os << "invalid configuration (" << v.size() << " problem" << (v.size() == 1 ? "" : "s") << ")";
          for (const auto& s : v) os << "\n  " << s;
          return os.str();
      }()),
      violations(std::move(v)) {}

ScenarioConfig parse_config(const Json& j) {
    ScenarioConfig cfg;
    std::vector<std::string> errs;
    {
        Reader r(j, "", errs);
        r.string("name", cfg.name);
        std::string kind = to_string(cfg.kind);
        r.string("scenario", kind);
        if (auto it = kind_names().find(kind); it != kind_names().end()) cfg.kind = it->second;
        else errs.push_back("scenario: unknown kind '" + kind + "'");

        if (const Json* b = r.find("body")) {
            Reader rb(*b, "body", errs);
            rb.number("gm", cfg.body.gm);
            rb.number("j", cfg.body.j);
            rb.number("gamma", cfg.body.gamma_ppn);
            rb.number("alpha", cfg.body.alpha_eep);
            rb.number("omega_rot", cfg.body.omega_rot);
            rb.number("radius", cfg.body.radius);
            rb.number("c", cfg.body.constants.c);
            rb.number("G", cfg.body.constants.G);
            rb.number("hbar", cfg.body.constants.hbar);
        }
        if (const Json* g = r.find("geometry")) {
            Reader rg(*g, "geometry", errs);
            rg.number("b", cfg.geometry.b);
            rg.number("theta", cfg.geometry.theta);
            rg.number("zeta", cfg.geometry.zeta);
            rg.number("q", cfg.geometry.q);
            rg.number("h", cfg.geometry.h);
            rg.boolean("horizontal", cfg.horizontal);
        }
        r.number("wavelength", cfg.wavelength);
        if (const Json* b = r.find("budget")) {
            Reader rb(*b, "budget", errs);
            if (const Json* s = rb.find("ground")) parse_station(*s, "budget.ground", cfg.ground, errs);
            if (const Json* s = rb.find("satellite")) parse_station(*s, "budget.satellite", cfg.satellite, errs);
        }
        if (const Json* s = r.find("sagnac")) {
            Reader rs(*s, "sagnac", errs);
            rs.number("area", cfg.sagnac_area);
            rs.number("zeta", cfg.sagnac_zeta);
            rs.number("c_lt", cfg.c_lt);
            rs.number("c_g", cfg.c_g);
        }
        if (const Json* p = r.find("polarization")) {
            Reader rp(*p, "polarization", errs);
            rp.count("theta_samples", cfg.theta_samples);
        }
        if (const Json* s = r.find("sweep"); s && !s->is_null()) {
            SweepSpec sw;
            Reader rs(*s, "sweep", errs);
            rs.string("parameter", sw.parameter);
            rs.number("start", sw.start);
            rs.number("stop", sw.stop);
            rs.count("steps", sw.steps);
            rs.boolean("endpoint", sw.endpoint);
            cfg.sweep = sw;
        }
        if (const Json* t = r.find("tolerances")) {
            Reader rt(*t, "tolerances", errs);
            Tolerances& tol = cfg.tolerances;
            rt.number("oracle_rel", tol.oracle_rel);
            rt.number("ppn_rel", tol.ppn_rel);
            rt.number("shapiro", tol.shapiro);
            rt.number("constraint", tol.constraint);
            rt.number("gauge_angle", tol.gauge_angle);
            rt.number("closed_loop", tol.closed_loop);
            rt.number("order3", tol.order3);
            rt.number("identity", tol.identity);
            rt.number("involution", tol.involution);
            rt.number("finite_difference", tol.finite_difference);
            rt.number("quadrature", tol.quadrature);
        }
        if (const Json* o = r.find("output")) {
            Reader ro(*o, "output", errs);
            ro.string("dir", cfg.output_dir);
            ro.string("format", cfg.format);
            ro.boolean("timing", cfg.timing);
        }
        r.count("threads", cfg.threads);
    }
    for (auto& e : validate_config(cfg)) errs.push_back(std::move(e));
    if (!errs.empty()) throw ConfigError(std::move(errs));
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({path + ": cannot open config file"});
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError({path + ": " + e.what()});
    }
    return parse_config(j);
}

Json to_json(const ScenarioConfig& cfg) {
    Json j;
    j["name"] = cfg.name;
    j["scenario"] = to_string(cfg.kind);
    j["body"] = {
        {"gm", cfg.body.gm},
        {"j", cfg.body.j},
        {"gamma", cfg.body.gamma_ppn},
        {"alpha", cfg.body.alpha_eep},
        {"omega_rot", cfg.body.omega_rot},
        {"radius", cfg.body.radius},
        {"c", cfg.body.constants.c},
        {"G", cfg.body.constants.G},
        {"hbar", cfg.body.constants.hbar},
    };
    j["geometry"] = {
        {"b", cfg.geometry.b},
        {"theta", cfg.geometry.theta},
        {"zeta", cfg.geometry.zeta},
        {"q", cfg.geometry.q},
        {"h", cfg.geometry.h},
        {"horizontal", cfg.horizontal},
    };
    j["wavelength"] = cfg.wavelength;
    j["budget"] = {
        {"ground", {{"x", vec_json(cfg.ground.x)}, {"v", vec_json(cfg.ground.v)}}},
        {"satellite", {{"x", vec_json(cfg.satellite.x)}, {"v", vec_json(cfg.satellite.v)}}},
    };
    j["sagnac"] = {{"area", cfg.sagnac_area}, {"zeta", cfg.sagnac_zeta}, {"c_lt", cfg.c_lt}, {"c_g", cfg.c_g}};
    j["polarization"] = {{"theta_samples", cfg.theta_samples}};
    if (cfg.sweep)
        j["sweep"] = {{"parameter", cfg.sweep->parameter},
                      {"start", cfg.sweep->start},
                      {"stop", cfg.sweep->stop},
                      {"steps", cfg.sweep->steps},
                      {"endpoint", cfg.sweep->endpoint}};
    else
        j["sweep"] = nullptr;
    const Tolerances& t = cfg.tolerances;
    j["tolerances"] = {
        {"oracle_rel", t.oracle_rel},
        {"ppn_rel", t.ppn_rel},
        {"shapiro", t.shapiro},
        {"constraint", t.constraint},
        {"gauge_angle", t.gauge_angle},
        {"closed_loop", t.closed_loop},
        {"order3", t.order3},
        {"identity", t.identity},
        {"involution", t.involution},
        {"finite_difference", t.finite_difference},
        {"quadrature", t.quadrature},
    };
    j["output"] = {{"dir", cfg.output_dir}, {"format", cfg.format}, {"timing", cfg.timing}};
    j["threads"] = cfg.threads;
    return j;
}

std::vector<std::string> validate_config(const ScenarioConfig& cfg) {
    std::vector<std::string> errs;
    auto finite = [&](const char* name, double v) {
        if (!std::isfinite(v)) errs.push_back(std::string(name) + ": must be finite");
    };
    const PpnBody& b = cfg.body;
    finite("body.gm", b.gm);
    finite("body.j", b.j);
    finite("body.gamma", b.gamma_ppn);
    finite("body.alpha", b.alpha_eep);
    finite("body.omega_rot", b.omega_rot);
    if (!(b.gm >= 0.0)) errs.push_back("body.gm: must be >= 0");
    if (!(b.radius > 0.0)) errs.push_back("body.radius: must be > 0");
    if (!(b.constants.c > 0.0)) errs.push_back("body.c: must be > 0");
    if (!(b.constants.G > 0.0)) errs.push_back("body.G: must be > 0");
    if (!(b.constants.hbar > 0.0)) errs.push_back("body.hbar: must be > 0");

    const MziGeometry& g = cfg.geometry;
    finite("geometry.theta", g.theta);
    finite("geometry.zeta", g.zeta);
    if (!(g.q > 0.0)) errs.push_back("geometry.q: must be > 0");
    if (!(g.h > 0.0)) errs.push_back("geometry.h: must be > 0");
    if (!(g.b > 10.0 * std::max(g.q, g.h))) errs.push_back("geometry.b: must exceed 10 max(h, q)");
    if (!(cfg.wavelength > 0.0) || !std::isfinite(cfg.wavelength)) errs.push_back("wavelength: must be > 0");
    if (!(cfg.sagnac_area >= 0.0)) errs.push_back("sagnac.area: must be >= 0");
    if (cfg.kind == ScenarioKind::Polarization && cfg.theta_samples == 0)
        errs.push_back("polarization.theta_samples: must be > 0");
    if (cfg.kind == ScenarioKind::PhaseLengths && !cfg.horizontal &&
        std::abs(std::remainder(g.zeta - g.theta - kPi / 2.0, 2.0 * kPi)) > 1e-12)
        errs.push_back("geometry: phase-lengths needs zeta = theta + pi/2 (set horizontal)");
    if (cfg.kind == ScenarioKind::Budget) {
        const double rmin = b.radius * (1.0 - 1e-9);
        if (!(cfg.ground.x.norm() >= rmin)) errs.push_back("budget.ground.x: inside the body");
        if (!(cfg.satellite.x.norm() >= rmin)) errs.push_back("budget.satellite.x: inside the body");
    }

    if (cfg.sweep) {
        const SweepSpec& s = *cfg.sweep;
        if (!sweep_parameters().count(s.parameter)) errs.push_back("sweep.parameter: unknown parameter '" + s.parameter + "'");
        if (s.steps == 0) errs.push_back("sweep.steps: sweep range is empty");
        if (!std::isfinite(s.start) || !std::isfinite(s.stop)) errs.push_back("sweep: start and stop must be finite");
        if (s.steps > 1 && s.start == s.stop) errs.push_back("sweep: start equals stop");
        if (s.parameter == "zeta" && (cfg.horizontal || cfg.kind == ScenarioKind::PhaseLengths))
            errs.push_back("sweep.parameter: zeta is fixed by theta for this scenario");
        if (cfg.kind == ScenarioKind::Validate) errs.push_back("sweep: not supported for validate");
    }

    const Tolerances& t = cfg.tolerances;
    const std::pair<const char*, double> tols[] = {
        {"oracle_rel", t.oracle_rel}, {"ppn_rel", t.ppn_rel}, {"shapiro", t.shapiro},
        {"constraint", t.constraint}, {"gauge_angle", t.gauge_angle}, {"closed_loop", t.closed_loop},
        {"order3", t.order3}, {"identity", t.identity}, {"involution", t.involution},
        {"finite_difference", t.finite_difference}, {"quadrature", t.quadrature},
    };
    for (const auto& [name, v] : tols)
        if (!(v > 0.0) || !std::isfinite(v)) errs.push_back(std::string("tolerances.") + name + ": must be > 0");

    if (cfg.format != "json" && cfg.format != "csv") errs.push_back("output.format: expected json or csv");
    return errs;
}

std::vector<std::string> preset_names() {
    return {"qeyssat", "ground", "polarization-lt", "sagnac", "leo", "validate", "flat"};
}

ScenarioConfig preset(const std::string& name) {
    ScenarioConfig cfg;
    cfg.name = name;
    cfg.body = PpnBody::earth();
    cfg.wavelength = 800e-9;
    cfg.horizontal = true;
    cfg.geometry = MziGeometry::horizontal(cfg.body.radius, 0.7, 6e3, 4e5);
    if (name == "qeyssat") {
        cfg.kind = ScenarioKind::PhaseLengths;
    } else if (name == "ground") {
        cfg.kind = ScenarioKind::PhaseLengths;
        cfg.geometry.h = 100.0;
    } else if (name == "polarization-lt") {
        cfg.kind = ScenarioKind::Polarization;
        cfg.geometry.q = 1e5;
        cfg.geometry.h = 1e4;
    } else if (name == "sagnac") {
        cfg.kind = ScenarioKind::Sagnac;
        cfg.sagnac_area = 6e3 * 4e5;
        cfg.sagnac_zeta = 0.0;
    } else if (name == "leo") {
        cfg.kind = ScenarioKind::Budget;
        const double r = cfg.body.radius + 4e5;
        const double a = kPi / 180.0;
        const double v = std::sqrt(cfg.body.gm / r);
        cfg.ground = {Vec3(cfg.body.radius, 0.0, 0.0), Vec3::Zero()};
        cfg.satellite = {Vec3(r * std::cos(a), r * std::sin(a), 0.0), Vec3(-v * std::sin(a), v * std::cos(a), 0.0)};
    } else if (name == "validate") {
        cfg.kind = ScenarioKind::Validate;
    } else if (name == "flat") {
        cfg.kind = ScenarioKind::Validate;
        cfg.body.gm = 0.0;
        cfg.body.j = 0.0;
        cfg.body.omega_rot = 0.0;
    } else {
        std::string known;
        for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
        throw ConfigError({"unknown preset '" + name + "' (known: " + known + ")"});
    }
    cfg.geometry = cfg.effective_geometry();
    return cfg;
}

}  // namespace pnmzi
