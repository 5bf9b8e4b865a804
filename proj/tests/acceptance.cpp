#include "pnmzi/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace pnmzi;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
    std::vector<std::string> notes;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
    char buf[200];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

const PpnBody kEarth = PpnBody::earth();
const double kLambda = 800e-9;

MziGeometry qeyssat_geometry() { return preset("qeyssat").effective_geometry(); }

Outcome qeyssat_phase() {
    const double v = cow_optical_estimate(kLambda, 9.81, 4e5, 6e3);
    return {v >= 1.9 && v <= 2.2, fmt("dpsi = %.6g rad, range [1.9, 2.2]", v), {}};
}

Outcome ground_phase() {
    const double v = cow_optical_estimate(kLambda, 9.81, 100.0, 6e3);
    return {v >= 3e-4 && v <= 7e-4, fmt("dpsi = %.6g rad, range [3e-4, 7e-4]", v), {}};
}

Outcome factor_one_plus_gamma() {
    const MziGeometry g = qeyssat_geometry();
    const double w = preset("qeyssat").omega_inf();
    Outcome out{true, {}, {}};
    double worst = 0.0;
    for (double gamma : {1.0, 0.0, 0.5, 1.5}) {
        PpnBody b = kEarth;
        b.gamma_ppn = gamma;
        const double ratio = phase_equal_coordinates(b, g, w).delta_t / phase_equal_lengths(b, g, w).delta_t;
        const double err = std::abs(ratio - (1.0 + gamma));
        worst = std::max(worst, err);
        out.passed = out.passed && err <= 0.01;
        out.notes.push_back(fmt("gamma = %.1f: ratio %.8f (target %.1f)", gamma, ratio, 1.0 + gamma));
    }
    out.detail = fmt("max |ratio - (1+gamma)| = %.3g, tol 0.01", worst);
    return out;
}

Outcome gamma_independence() {
    const MziGeometry g = qeyssat_geometry();
    const double w = preset("qeyssat").omega_inf();
    const double ref = phase_equal_lengths(kEarth, g, w).delta_t;
    double worst = 0.0;
    for (int i = 0; i <= 40; ++i) {
        PpnBody b = kEarth;
        b.gamma_ppn = 2.0 * i / 40.0;
        worst = std::max(worst, std::abs(phase_equal_lengths(b, g, w).delta_t / ref - 1.0));
    }
    return {worst < 1e-6, fmt("max relative variation over gamma in [0, 2] = %.3g, tol 1e-6", worst), {}};
}

Outcome shapiro_oracle() {
    const MziGeometry g = qeyssat_geometry();
    const Corners p = g.corners();
    const IsotropicSchwarzschildMetric metric(kEarth);
    const double c = kEarth.constants.c;
    OracleOptions opt;
    opt.rel_tol = 1e-12;
    const std::pair<const char*, std::pair<Vec3, Vec3>> legs[] = {
        {"AB", {p.a, p.b}}, {"BD", {p.b, p.d}}, {"AC", {p.a, p.c}}, {"CD", {p.c, p.d}}};
    Outcome out{true, {}, {}};
    double worst = 0.0;
    for (const auto& [name, seg] : legs) {
        const NullRay ray = NullRay::between(seg.first, seg.second, 1.0);
        const OracleResult r = oracle_null_geodesic(metric, ray, PlaneTermination{seg.second, ray.n_hat}, opt);
        const double closed = (1.0 + kEarth.gamma_ppn) * kEarth.gm / (c * c) * shapiro_log(seg.first, seg.second);
        const double err = std::abs(r.delay_length - closed) / std::abs(closed);
        worst = std::max(worst, err);
        out.notes.push_back(std::string(name) + fmt(": delay %.10g s, relative error %.3g", closed / c, err));
    }
    out.passed = worst < 1e-6;
    out.detail = fmt("max relative error = %.3g, tol 1e-6", worst);
    return out;
}

double transported_overlap(const MziGeometry& g) {
    const PolarizationFrame a = transport_arm(kEarth, g, Arm::ABD, initial_polarization(g, Arm::ABD)).at_d;
    const PolarizationFrame c = transport_arm(kEarth, g, Arm::ACD, initial_polarization(g, Arm::ACD)).at_d;
    return polarization_overlap(a, c, ppn_w_factor(kEarth, g.corners().d));
}

Outcome polarization_overlap_magnitude() {
    double best = 0.0, best_theta = 0.0;
    for (int i = 0; i < 360; ++i) {
        const double theta = 2.0 * kPi * i / 360.0;
        const double v = std::abs(transported_overlap(MziGeometry::horizontal(kEarth.radius, theta, 1e5, 1e4)));
        if (v > best) best = v, best_theta = theta;
    }
    const bool magnitude = best >= 1e-17 && best <= 4e-17;

    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double theta = 2.0 * kPi * (i + 0.5) / 20.0;
        const MziGeometry g = MziGeometry::horizontal(kEarth.radius, theta, 1e5, 1e4);
        const double t = transported_overlap(g);
        const double b = closed_form_overlap(kEarth, g);
        worst = std::max(worst, std::abs(t - b) / std::abs(t));
    }
    const bool bracket = worst < 1e-3;

    Outcome out;
    out.passed = magnitude && bracket;
    out.detail = fmt("max |overlap| = %.4g at theta = %.3f; bracket rel. error = %.3g", best, best_theta, worst);
    out.notes.push_back(std::string(magnitude ? "pass" : "FAIL") +
                        fmt(": max |overlap| %.4g within factor 2 of 2e-17 (ratio %.3f)", best, best / 2e-17));
    out.notes.push_back(std::string(bracket ? "pass" : "FAIL") +
                        fmt(": closed-form bracket vs transport, max rel. error %.3g over 20 theta, tol 1e-3", worst));
    return out;
}

Outcome newton_gauge_rotation() {
    const MziGeometry g = qeyssat_geometry();
    const Corners p = g.corners();
    PpnBody body = kEarth;
    body.j = 0.0;
    const IsotropicSchwarzschildMetric metric(body);
    const std::pair<Vec3, Vec3> legs[] = {{p.a, p.b}, {p.b, p.d}, {p.a, p.c}, {p.c, p.d}};
    double worst = 0.0;
    for (const auto& [from, to] : legs) {
        const Vec3 n = (to - from).normalized();
        const PolarizationBasis b0 = newton_gauge_triad(body, from, n, wigner_basis(n));
        const OracleResult r = oracle_parallel_transport(metric, NullRay{from, n, 1.0, 0.0}, PlaneTermination{to, n},
                                                         (b0.b_x + b0.b_y).normalized());
        const PolarizationBasis b1 = newton_gauge_triad(body, r.x_end, r.k_hat_end(), wigner_basis(r.k_hat_end()));
        const Vec3 f = *r.f_spatial;
        worst = std::max(worst, std::abs(std::atan2(f.dot(b1.b_y), f.dot(b1.b_x)) - kPi / 4.0));
    }
    return {worst < 1e-10, fmt("max gauge-relative angle over 4 arms = %.3g rad, tol 1e-10", worst), {}};
}

Outcome closed_loop() {
    const MziGeometry g = qeyssat_geometry();
    PpnBody body = kEarth;
    body.j = 0.0;
    const Vec3 f0 = (Vec3::UnitY() + g.n_ac()).normalized();
    const OracleArm loop = oracle_closed_loop(IsotropicSchwarzschildMetric(body), g, f0);
    const double err = (loop.f_end.normalized() - f0).norm();
    return {err < 1e-9, fmt("|f_final - f_initial| = %.3g, tol 1e-9", err), {}};
}

Outcome budget_ratios() {
    const ScenarioConfig cfg = preset("leo");
    const FrequencyBudget f = frequency_shift_budget(cfg.body, cfg.ground, cfg.satellite);
    const double dop = std::abs(f.doppler_term / f.redshift_term);
    const double td = std::abs(f.time_dilation_term / f.redshift_term);
    const double com = comoving_redshift_ratio(cfg.body, cfg.ground.x);
    Outcome out;
    out.passed = dop >= 1e4 && dop <= 1e6 && td >= 10.0 && td <= 30.0 && com >= 200.0 && com <= 400.0;
    out.detail = fmt("doppler/redshift %.4g, time-dilation/redshift %.4g, comoving %.4g", dop, td, com);
    return out;
}

Outcome sagnac_suppression() {
    const SagnacSplit s = sagnac_phase_ppn(kEarth, 2.4e9, 0.0, kLambda);
    const double supp = (s.omega_lt + s.omega_g) / kEarth.omega_rot;
    const double ratio = polarization_vs_sagnac_ratio(MziGeometry::horizontal(kEarth.radius, 0.7, 6e3, 4e5), kLambda);
    return {supp <= 1e-8 && ratio < 1e-9, fmt("(omega_LT + omega_G)/omega = %.3g (tol 1e-8), lambda/l = %.3g (tol 1e-9)", supp, ratio), {}};
}

Outcome star_product_identity() {
    std::mt19937_64 rng(20240611);
    std::normal_distribution<double> nd;
    auto unit = [&] { return Vec3(nd(rng), nd(rng), nd(rng)).normalized(); };
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Vec3 k1 = unit(), k2 = unit();
        Vec3 f1 = unit(), f2 = unit();
        f1 = (f1 - f1.dot(k1) * k1).normalized();
        f2 = (f2 - f2.dot(k2) * k2).normalized();
        const StarProduct sp = polarization_star_product(f1, k1, f2, k2);
        const Vec3 z = k1.cross(k2).normalized();
        worst = std::max(worst, std::abs(sp.star - f1.dot(Eigen::AngleAxisd(-sp.phi, z) * f2)));
    }
    return {worst <= 1e-12, fmt("max |f1*f2 - f1.Rz^-1(phi) f2| over 1000 pairs = %.3g, tol 1e-12", worst), {}};
}

Outcome property_suites() {
    const RunRecord rec = validate_suite(preset("validate"));
    Outcome out;
    out.passed = rec.passed();
    std::size_t failed = 0;
    for (const auto& r : rec.residuals) {
        if (!r.passed) {
            ++failed;
            out.notes.push_back("FAIL " + r.scenario + fmt(": %.3g > %.3g", r.value, r.tolerance));
        }
    }
    out.detail = std::to_string(rec.residuals.size()) + " checks, " + std::to_string(failed) + " failed";
    return out;
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"optical COW phase, space-based arms", qeyssat_phase},
        {"optical COW phase, ground-based arms", ground_phase},
        {"coordinate vs proper-length phase ratio is 1+gamma", factor_one_plus_gamma},
        {"proper-length phase is independent of gamma", gamma_independence},
        {"Shapiro delay: oracle vs closed form", shapiro_oracle},
        {"polarization overlap magnitude and closed-form bracket", polarization_overlap_magnitude},
        {"Newton-gauge null rotation in static Schwarzschild", newton_gauge_rotation},
        {"closed-loop polarization identity", closed_loop},
        {"frequency budget ratios (LEO)", budget_ratios},
        {"Sagnac suppression", sagnac_suppression},
        {"star-product identity", star_product_identity},
        {"property suites via validate", property_suites},
    };
    int failures = 0;
    int index = 0;
    for (const auto& [name, run] : criteria) {
        ++index;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what(), {}};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += o.passed ? 0 : 1;
        std::printf("[%s] %2d %s (%s) [%.2f s]\n", o.passed ? "PASS" : "FAIL", index, name, o.detail.c_str(), secs);
        for (const auto& n : o.notes) std::printf("         %s\n", n.c_str());
    }
    std::printf("%d/%d criteria passed\n", index - failures, index);
    return failures == 0 ? 0 : 1;
}
