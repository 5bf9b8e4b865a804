#include "pnmzi/interferometry.hpp"

#include <cmath>
#include <sstream>

namespace pnmzi {

Vec3 MziGeometry::n_ab() const { return {std::sin(zeta), 0.0, std::cos(zeta)}; }
Vec3 MziGeometry::n_ac() const { return {-std::cos(zeta), 0.0, std::sin(zeta)}; }

Corners MziGeometry::corners() const {
    Corners k;
    k.a = Vec3(b * std::sin(theta), 0.0, b * std::cos(theta));
    k.b = k.a + q * n_ab();
    k.c = k.a + h * n_ac();
    k.d = k.b + h * n_ac();
    return k;
}

std::vector<std::string> MziGeometry::validate() const {
    for (double v : {b, theta, zeta, q, h})
        if (!std::isfinite(v)) throw DomainError("geometry parameters must be finite");
    if (!(q > 0.0) || !(h > 0.0)) throw DomainError("arm lengths q and h must be > 0");
    const double arm = std::max(q, h);
    if (!(b > 10.0 * arm)) {
        std::ostringstream os;
        os << "geometry requires b > 10 max(h, q): b=" << b << " max(h,q)=" << arm;
        throw DomainError(os.str());
    }
    std::vector<std::string> warnings;
    if (b < 100.0 * arm) {
        std::ostringstream os;
        os << "b/max(h,q) = " << b / arm << " < 100: 1/b expansion error is O(" << arm / b << ")";
        warnings.push_back(os.str());
    }
    return warnings;
}

MziGeometry MziGeometry::horizontal(double b, double theta, double q, double h) {
    return MziGeometry{b, theta, theta + kPi / 2.0, q, h};
}

const char* to_string(PhaseConvention c) {
    return c == PhaseConvention::EqualCoordinates ? "equal-coordinates" : "equal-proper-lengths";
}

double cow_neutron_phase_mass_form(double mass, double lambda_db, double area, double delta, double g, double hbar) {
    if (!(lambda_db > 0.0) || !(mass > 0.0)) throw DomainError("cow_neutron_phase: mass and lambda must be > 0");
    return mass * mass * g * area * lambda_db * std::sin(delta) / (2.0 * kPi * hbar * hbar);
}

double cow_neutron_phase(double mass, double lambda_db, double v, double area, double delta, double g) {
    if (!(v > 0.0) || !(lambda_db > 0.0)) throw DomainError("cow_neutron_phase: v and lambda must be > 0");
    if (!(mass > 0.0) || !(area >= 0.0) || !(g >= 0.0)) throw DomainError("cow_neutron_phase: mass > 0, area >= 0, g >= 0");
    return (2.0 * kPi / lambda_db) * g * area * std::sin(delta) / (v * v);
}

double cow_optical_estimate(double lambda_opt, double g, double h, double q, double c) {
    if (!(lambda_opt > 0.0) || !(g >= 0.0) || !(h > 0.0) || !(q > 0.0))
        throw DomainError("cow_optical_estimate: lambda, h, q must be > 0 and g >= 0");
    return (2.0 * kPi / lambda_opt) * g * h * q / (c * c);
}

PhaseResult phase_equal_coordinates(const PpnBody& body, const MziGeometry& geom, double omega_inf) {
    body.validate();
    PhaseResult res;
    res.warnings = geom.validate();
    res.convention = PhaseConvention::EqualCoordinates;
    res.omega_inf = omega_inf;
    const double c = body.constants.c;
    const double k = (1.0 + body.gamma_ppn) * body.gm / (c * c * c);
    const Corners p = geom.corners();

    // Euclidean parts cancel exactly: |AB| = |CD| = q, |AC| = |BD| = h.
    res.breakdown = {
        {"shapiro_AB", k * shapiro_log(p.a, p.b)},
        {"shapiro_BD", k * shapiro_log(p.b, p.d)},
        {"shapiro_AC", -k * shapiro_log(p.a, p.c)},
        {"shapiro_CD", -k * shapiro_log(p.c, p.d)},
    };
    for (const auto& t : res.breakdown) res.delta_t += t.delta_t;
    res.delta_psi = omega_inf * res.delta_t;

    res.site_gravity = body.gm / (geom.b * geom.b);
    const double phase = geom.zeta - geom.theta;
    res.leading_delta_t = (1.0 + body.gamma_ppn) * res.site_gravity / (c * c * c) * geom.h * geom.q *
                          (std::sin(phase) - std::cos(phase));
    res.leading_delta_psi = omega_inf * res.leading_delta_t;
    return res;
}

PhaseResult phase_equal_lengths(const PpnBody& body, const MziGeometry& geom, double omega_inf) {
    body.validate();
    const double off = std::remainder(geom.zeta - geom.theta - kPi / 2.0, 2.0 * kPi);
    if (std::abs(off) > 1e-12)
        throw UnsupportedOrientation("phase_equal_lengths requires zeta = theta + pi/2");
    PhaseResult res;
    res.warnings = geom.validate();
    res.convention = PhaseConvention::EqualProperLengths;
    res.omega_inf = omega_inf;
    const double c = body.constants.c;
    const double k0 = body.gm / (c * c);
    const double kg = body.gamma_ppn * k0;
    const double kt = (1.0 + body.gamma_ppn) * k0;
    const Corners p = geom.corners();
    const Vec3 nab = geom.n_ab();

    // L_CD(q + delta) = L_AB:  delta + gamma (GM/c^2) (S_CD(q + delta) - S_AB) = 0
    const double s_ab = shapiro_log(p.a, p.b);
    double delta = 0.0;
    for (int it = 0; it < 100; ++it) {
        const double next = -kg * (shapiro_log(p.c, p.c + (geom.q + delta) * nab) - s_ab);
        const double change = std::abs(next - delta);
        delta = next;
        if (change <= 1e-12 * 1e-9 || change <= 1e-15 * std::abs(delta)) break;
    }
    const Vec3 d2 = p.c + (geom.q + delta) * nab;
    const double s_cd = shapiro_log(p.c, d2);

    res.cd_extension = delta;
    res.breakdown = {
        {"shapiro_AB", kt * s_ab / c},
        {"shapiro_CD", -kt * s_cd / c},
        {"cd_extension", -delta / c},
    };
    for (const auto& t : res.breakdown) res.delta_t += t.delta_t;
    res.delta_psi = omega_inf * res.delta_t;

    // vertical arms, |BD'| - h = delta^2 / (|BD'| + h)
    const double bd = (d2 - p.b).norm();
    const double vertical = delta * delta / (bd + geom.h) + kt * (shapiro_log(p.b, d2) - shapiro_log(p.a, p.c));
    res.neglected_delta_t = vertical / c;

    res.site_gravity = body.gm / (geom.b * geom.b);
    res.leading_delta_t = res.site_gravity * geom.h * geom.q / (c * c * c);
    res.leading_delta_psi = omega_inf * res.leading_delta_t;
    if (std::abs(res.neglected_delta_t) > 1e-2 * std::abs(res.delta_t)) {
        std::ostringstream os;
        os << "neglected vertical-arm term is " << res.neglected_delta_t / res.delta_t << " of the result";
        res.warnings.push_back(os.str());
    }
    return res;
}

ProperTimePhase proper_time_phase(const PpnBody& body, const Vec3& x_observer, double delta_t, double omega_inf) {
    const double r = x_observer.norm();
    if (!(r > 0.0)) throw DomainError("observer at the origin");
    const IsotropicFactors f = isotropic_factors(body, r);
    ProperTimePhase out;
    out.delta_tau = f.V * delta_t;
    out.omega_local = omega_inf / f.V;
    out.delta_psi_local = out.omega_local * out.delta_tau;
    return out;
}

FrequencyBudget frequency_shift_budget(const PpnBody& body, const StationState& ground, const StationState& satellite) {
    body.validate();
    const double rg = ground.x.norm();
    const double rs = satellite.x.norm();
    if (!(rg >= body.radius * (1.0 - 1e-9)) || !(rs >= body.radius * (1.0 - 1e-9)))
        throw DomainError("frequency_shift_budget: stations must be outside the body");
    const double c = body.constants.c;
    FrequencyBudget out;
    const double du = body.gm / rg - body.gm / rs;
    out.redshift_term = -(1.0 + body.alpha_eep) * du / (c * c);
    out.time_dilation_term = -(ground.v.squaredNorm() - satellite.v.squaredNorm()) / (c * c);
    const Vec3 los = satellite.x - ground.x;
    if (los.norm() > 0.0) out.doppler_term = -(satellite.v - ground.v).dot(los.normalized()) / c;
    return out;
}

double sagnac_phase(const Vec3& omega_rot, const Vec3& area, double lambda_opt, double c) {
    if (!(lambda_opt > 0.0)) throw DomainError("sagnac_phase: lambda must be > 0");
    return 8.0 * kPi * omega_rot.dot(area) / (lambda_opt * c);
}

SagnacSplit sagnac_phase_ppn(const PpnBody& body, double area, double zeta, double lambda_opt, double c_lt, double c_g) {
    if (!(lambda_opt > 0.0)) throw DomainError("sagnac_phase: lambda must be > 0");
    const double c = body.constants.c;
    const double omega = 2.0 * kPi * c / lambda_opt;
    const double pref = 4.0 * omega * area / (c * c);
    SagnacSplit s;
    const double scale = body.omega_rot * body.gravitational_radius() / body.radius;
    s.omega_lt = c_lt * scale;
    s.omega_g = c_g * scale;
    s.classical = pref * body.omega_rot * std::cos(zeta);
    s.post_newtonian = pref * (s.omega_lt + s.omega_g);
    return s;
}

double polarization_vs_sagnac_ratio(const MziGeometry& geom, double lambda_opt) {
    const double lmin = std::min(geom.q, geom.h);
    if (!(lmin > 0.0)) throw DomainError("polarization_vs_sagnac_ratio: arm lengths must be > 0");
    return lambda_opt / lmin;
}

}  // namespace pnmzi
