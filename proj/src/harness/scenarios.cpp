#include "pnmzi/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#ifndef PNMZI_VERSION
#define PNMZI_VERSION "0.0.0"
#endif

namespace pnmzi {

namespace {

constexpr double kOverlapReference = 2e-17;
constexpr double kPicoArcsecPerRad = 180.0 / kPi * 3600.0 * 1e12;

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json phase_json(const PhaseResult& r, const MziGeometry& g, const PpnBody& body) {
    Json out;
    out["convention"] = to_string(r.convention);
    out["inputs"] = {{"b", g.b}, {"theta", g.theta}, {"zeta", g.zeta}, {"q", g.q}, {"h", g.h},
                     {"gamma", body.gamma_ppn}, {"omega_inf", r.omega_inf}};
    out["delta_t"] = r.delta_t;
    out["delta_psi"] = r.delta_psi;
    Json br = Json::object();
    for (const auto& t : r.breakdown) br[t.name] = t.delta_t;
    out["breakdown"] = br;
    out["leading_delta_t"] = r.leading_delta_t;
    out["leading_delta_psi"] = r.leading_delta_psi;
    out["site_gravity"] = r.site_gravity;
    return out;
}

std::string ray_csv(const PpnBody& body, const MziGeometry& geom, double omega_inf) {
    const IsotropicSchwarzschildMetric metric(body);
    const Corners p = geom.corners();
    const std::pair<const char*, std::pair<Vec3, Vec3>> arms[] = {
        {"AB", {p.a, p.b}}, {"BD", {p.b, p.d}}, {"AC", {p.a, p.c}}, {"CD", {p.c, p.d}}};
    OracleOptions opt;
    opt.record_samples = true;
    opt.c = body.constants.c;
    std::ostringstream os;
    os << "arm,t,x,y,z,delay\n";
    for (const auto& [name, seg] : arms) {
        const NullRay ray = NullRay::between(seg.first, seg.second, omega_inf);
        const OracleResult res = oracle_null_geodesic(metric, ray, PlaneTermination{seg.second, ray.n_hat}, opt);
        auto row = [&](double t, const Vec3& x, double delay) {
            os << name << ',' << format_double(t) << ',' << format_double(x.x()) << ',' << format_double(x.y())
               << ',' << format_double(x.z()) << ',' << format_double(delay) << '\n';
        };
        for (const auto& s : res.samples) row(s.t, s.x, s.delay / opt.c);
        row(res.t_arrival, res.x_end, res.delay(opt.c));
    }
    return os.str();
}

void run_phase(const ScenarioConfig& cfg, RunRecord& rec, bool with_rays) {
    const MziGeometry g = cfg.effective_geometry();
    const double w = cfg.omega_inf();
    const double c = cfg.body.constants.c;
    if (cfg.kind == ScenarioKind::PhaseCoordinates) {
        const PhaseResult r = phase_equal_coordinates(cfg.body, g, w);
        rec.outputs = phase_json(r, g, cfg.body);
        rec.outputs["relative_to_leading"] =
            r.leading_delta_t != 0.0 ? r.delta_t / r.leading_delta_t - 1.0 : std::nan("");
        rec.outputs["warnings"] = r.warnings;
    } else {
        const PhaseResult r = phase_equal_lengths(cfg.body, g, w);
        rec.outputs = phase_json(r, g, cfg.body);
        rec.outputs["relative_to_leading"] = r.delta_t / r.leading_delta_t - 1.0;
        rec.outputs["cd_extension"] = r.cd_extension;
        rec.outputs["neglected_delta_t"] = r.neglected_delta_t;
        rec.outputs["cow_optical_site_g"] = cow_optical_estimate(cfg.wavelength, r.site_gravity, g.h, g.q, c);
        rec.outputs["cow_optical_standard_g"] = cow_optical_estimate(cfg.wavelength, 9.81, g.h, g.q, c);
        const ProperTimePhase pt = proper_time_phase(cfg.body, g.corners().d, r.delta_t, w);
        rec.outputs["proper_time"] = {{"delta_tau", pt.delta_tau},
                                      {"omega_local", pt.omega_local},
                                      {"delta_psi_local", pt.delta_psi_local}};
        rec.outputs["warnings"] = r.warnings;
    }
    if (with_rays && cfg.body.gm > 0.0) rec.attachments.emplace_back("rays", ray_csv(cfg.body, g, w));
}

void run_polarization(const ScenarioConfig& cfg, RunRecord& rec, bool with_trace) {
    const PpnBody& body = cfg.body;
    const MziGeometry g = cfg.effective_geometry();
    TransportOptions opt;
    opt.rel_tol = cfg.tolerances.ppn_rel;
    opt.record_trace = with_trace;
    const ArmTransport abd = transport_arm(body, g, Arm::ABD, initial_polarization(g, Arm::ABD), opt);
    const ArmTransport acd = transport_arm(body, g, Arm::ACD, initial_polarization(g, Arm::ACD), opt);
    const double w = ppn_w_factor(body, abd.at_d.position);
    const double overlap = polarization_overlap(abd.at_d, acd.at_d, w);

    Json arms = Json::object();
    for (const auto* a : {&abd, &acd}) {
        const bool is_abd = a == &abd;
        const PolarizationFrame& f = a->at_d;
        arms[is_abd ? "ABD" : "ACD"] = {
            {"k_hat", vec_json(f.k_hat)},
            {"f0", vec_json(f.f0)},
            {"f2", vec_json(f.f2)},
            {"f3", vec_json(f.f3)},
            {"f3_closed_form", vec_json(is_abd ? closed_form_f3_abd(body, g) : closed_form_f3_acd(body, g))},
        };
    }
    rec.outputs["inputs"] = {{"b", g.b}, {"theta", g.theta}, {"zeta", g.zeta}, {"q", g.q}, {"h", g.h},
                             {"j", body.j}, {"gamma", body.gamma_ppn}};
    rec.outputs["arms"] = arms;
    rec.outputs["overlap"] = overlap;
    rec.outputs["overlap_closed_form"] = closed_form_overlap(body, g);
    rec.outputs["rotation_picoarcsec"] = std::abs(overlap) * kPicoArcsecPerRad;

    if (!cfg.sweep) {
        double best = 0.0, best_theta = 0.0;
        for (std::size_t i = 0; i < cfg.theta_samples; ++i) {
            MziGeometry gi = g;
            gi.theta = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(cfg.theta_samples);
            gi.zeta = gi.theta + kPi / 2.0;
            const PolarizationFrame a = transport_polarization_order3(body, gi, Arm::ABD, initial_polarization(gi, Arm::ABD));
            const PolarizationFrame c = transport_polarization_order3(body, gi, Arm::ACD, initial_polarization(gi, Arm::ACD));
            const double ov = std::abs(polarization_overlap(a, c, ppn_w_factor(body, a.position)));
            if (ov > best) {
                best = ov;
                best_theta = gi.theta;
            }
        }
        rec.outputs["theta_scan"] = {{"samples", cfg.theta_samples},
                                     {"max_abs_overlap", best},
                                     {"theta_at_max", best_theta},
                                     {"reference", kOverlapReference},
                                     {"ratio_to_reference", best / kOverlapReference},
                                     {"max_rotation_picoarcsec", best * kPicoArcsecPerRad}};
    }
    if (with_trace) rec.attachments.emplace_back("trace", polarization_trace_csv(abd, acd, body.constants.c));
}

void run_budget(const ScenarioConfig& cfg, RunRecord& rec) {
    const FrequencyBudget fb = frequency_shift_budget(cfg.body, cfg.ground, cfg.satellite);
    rec.outputs["redshift"] = fb.redshift_term;
    rec.outputs["time_dilation"] = fb.time_dilation_term;
    rec.outputs["doppler"] = fb.doppler_term;
    rec.outputs["total"] = fb.total();
    rec.outputs["doppler_over_redshift"] = std::abs(fb.doppler_term) / std::abs(fb.redshift_term);
    rec.outputs["time_dilation_over_redshift"] = std::abs(fb.time_dilation_term) / std::abs(fb.redshift_term);
    if (cfg.body.omega_rot != 0.0) rec.outputs["comoving_potential_over_rotation"] = comoving_redshift_ratio(cfg.body, cfg.ground.x);
}

void run_sagnac(const ScenarioConfig& cfg, RunRecord& rec) {
    const PpnBody& body = cfg.body;
    const SagnacSplit s = sagnac_phase_ppn(body, cfg.sagnac_area, cfg.sagnac_zeta, cfg.wavelength, cfg.c_lt, cfg.c_g);
    const Vec3 area = cfg.sagnac_area * Vec3(std::sin(cfg.sagnac_zeta), 0.0, std::cos(cfg.sagnac_zeta));
    rec.outputs["classical"] = s.classical;
    rec.outputs["post_newtonian"] = s.post_newtonian;
    rec.outputs["total"] = s.total();
    rec.outputs["omega_lt"] = s.omega_lt;
    rec.outputs["omega_g"] = s.omega_g;
    rec.outputs["suppression"] = body.omega_rot != 0.0 ? (s.omega_lt + s.omega_g) / body.omega_rot : 0.0;
    rec.outputs["vector_form"] = sagnac_phase(Vec3(0.0, 0.0, body.omega_rot), area, cfg.wavelength, body.constants.c);
    rec.outputs["polarization_vs_sagnac"] = polarization_vs_sagnac_ratio(cfg.effective_geometry(), cfg.wavelength);
}

void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, double>>& out) {
    if (j.is_number()) {
        out.emplace_back(prefix, j.get<double>());
    } else if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), out);
    }
}

void apply(ScenarioConfig& cfg, const std::string& p, double v) {
    if (p == "zeta") cfg.geometry.zeta = v;
    else if (p == "theta") cfg.geometry.theta = v;
    else if (p == "h") cfg.geometry.h = v;
    else if (p == "q") cfg.geometry.q = v;
    else if (p == "b") cfg.geometry.b = v;
    else if (p == "alpha") cfg.body.alpha_eep = v;
    else if (p == "gamma") cfg.body.gamma_ppn = v;
    else if (p == "wavelength") cfg.wavelength = v;
    else throw ConfigError({"sweep.parameter: unknown parameter '" + p + "'"});
}

RunRecord dispatch(const ScenarioConfig& cfg, bool attachments) {
    RunRecord rec;
    rec.version = PNMZI_VERSION;
    rec.config = to_json(cfg);
    rec.outputs = Json::object();
    rec.outputs["scenario"] = to_string(cfg.kind);
    try {
        switch (cfg.kind) {
            case ScenarioKind::PhaseCoordinates:
            case ScenarioKind::PhaseLengths: {
                Json head = rec.outputs;
                run_phase(cfg, rec, attachments);
                head.update(rec.outputs);
                rec.outputs = head;
                break;
            }
            case ScenarioKind::Polarization: run_polarization(cfg, rec, attachments); break;
            case ScenarioKind::Budget: run_budget(cfg, rec); break;
            case ScenarioKind::Sagnac: run_sagnac(cfg, rec); break;
            case ScenarioKind::Validate: {
                RunRecord v = validate_suite(cfg);
                v.config = rec.config;
                return v;
            }
        }
    } catch (const DomainError& e) {
        throw DomainError(std::string("scenario '") + cfg.name + "' (" + to_string(cfg.kind) + "): " + e.what());
    }
    return rec;
}

}  // namespace

bool RunRecord::passed() const {
    for (const auto& r : residuals)
        if (!r.passed) return false;
    return true;
}

std::vector<std::pair<std::string, double>> scalar_outputs(const Json& outputs) {
    std::vector<std::pair<std::string, double>> out;
    flatten(outputs, "", out);
    return out;
}

RunRecord run_scenario(const ScenarioConfig& cfg) {
    if (auto errs = validate_config(cfg); !errs.empty()) throw ConfigError(std::move(errs));
    const auto t0 = std::chrono::steady_clock::now();
    RunRecord rec = dispatch(cfg, true);
    rec.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

RunRecord run_sweep(const ScenarioConfig& cfg) {
    if (auto errs = validate_config(cfg); !errs.empty()) throw ConfigError(std::move(errs));
    if (!cfg.sweep) throw ConfigError({"sweep: missing sweep specification"});
    const auto t0 = std::chrono::steady_clock::now();
    const SweepSpec& sw = *cfg.sweep;
    const std::vector<double> values = sw.values();

    std::vector<RunRecord> results(values.size());
    std::vector<std::exception_ptr> errors(values.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            try {
                ScenarioConfig point = cfg;
                point.sweep.reset();
                apply(point, sw.parameter, values[i]);
                if (auto errs = validate_config(point); !errs.empty()) throw ConfigError(std::move(errs));
                results[i] = dispatch(point, false);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::size_t n_threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min(n_threads, values.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const DomainError& e) {
            std::ostringstream os;
            os << "sweep point " << i << " (" << sw.parameter << "=" << format_double(values[i]) << "): " << e.what();
            throw DomainError(os.str());
        }
    }

    RunRecord rec;
    rec.version = PNMZI_VERSION;
    rec.config = to_json(cfg);
    rec.sweep_columns.push_back(sw.parameter);
    for (const auto& [k, v] : scalar_outputs(results.front().outputs)) rec.sweep_columns.push_back(k);
    Json rows = Json::array();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto flat = scalar_outputs(results[i].outputs);
        if (flat.size() + 1 != rec.sweep_columns.size())
            throw DomainError("sweep point " + std::to_string(i) + " produced a different set of outputs");
        std::vector<double> row{values[i]};
        for (const auto& kv : flat) row.push_back(kv.second);
        rec.sweep_rows.push_back(row);
        Json point = Json::object();
        point[sw.parameter] = values[i];
        point["outputs"] = results[i].outputs;
        rows.push_back(point);
    }
    rec.outputs = Json::object();
    rec.outputs["scenario"] = to_string(cfg.kind);
    rec.outputs["sweep"] = sw.parameter;
    rec.outputs["points"] = rows;
    rec.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

}  // namespace pnmzi
