#include "pnmzi/polarization.hpp"

#include <array>
#include <cmath>

namespace pnmzi {

namespace {

struct Segment {
    Vec3 start;
    Vec3 n;
    double length;
    Vec3 end;
};

struct ArmPath {
    Segment first;
    MirrorSpec mirror;
    Segment second;
};

ArmPath arm_path(const PpnBody& body, const MziGeometry& geom, Arm arm) {
    const Corners p = geom.corners();
    if (arm == Arm::ABD)
        return {{p.a, geom.n_ab(), geom.q, p.b}, mirror_b(body, geom), {p.b, geom.n_ac(), geom.h, p.d}};
    return {{p.a, geom.n_ac(), geom.h, p.c}, mirror_c(body, geom), {p.c, geom.n_ab(), geom.q, p.d}};
}

void check_segment(const Segment& s) {
    const double along = std::clamp(-s.start.dot(s.n), 0.0, s.length);
    if ((s.start + s.n * along).norm() <= 1e-9 * s.start.norm())
        throw DomainError("polarization transport segment passes through the origin");
}

Vec3 christoffel_apply(const Christoffel3& lam, const Vec3& a, const Vec3& b) {
    Vec3 out;
    for (int m = 0; m < 3; ++m) out[m] = a.dot(lam[m] * b);
    return out;
}

}  // namespace

const char* to_string(Arm arm) { return arm == Arm::ABD ? "ABD" : "ACD"; }

Mat3 wigner_standard_rotation(const Vec3& k_hat) {
    if (std::abs(k_hat.norm() - 1.0) > 1e-9) throw DomainError("wigner_standard_rotation: k_hat must be a unit vector");
    const double theta = std::atan2(std::hypot(k_hat.x(), k_hat.y()), k_hat.z());
    const double phi = std::atan2(k_hat.y(), k_hat.x());
    const Mat3 rz = Eigen::AngleAxisd(phi, Vec3::UnitZ()).toRotationMatrix();
    const Mat3 ry = Eigen::AngleAxisd(theta, Vec3::UnitY()).toRotationMatrix();
    return rz * ry;
}

PolarizationBasis wigner_basis(const Vec3& k_hat) {
    const Mat3 r = wigner_standard_rotation(k_hat);
    return {r.col(2), r.col(0), r.col(1)};
}

PolarizationBasis newton_gauge_triad(const PpnBody& body, const Vec3& x, const Vec3& k_hat) {
    if (std::abs(k_hat.norm() - 1.0) > 1e-9) throw DomainError("newton_gauge_triad: k_hat must be a unit vector");
    const Vec3 eg = gravity_fields(body, x, 0.0).e_g;
    if (!(eg.norm() > 0.0)) throw DegenerateGauge("newton gauge undefined: no free-fall direction");
    const Vec3 cross = eg.normalized().cross(k_hat);
    if (cross.norm() < 1e-12) throw DegenerateGauge("newton gauge degenerate: k parallel to free fall");
    PolarizationBasis basis;
    basis.k_hat = k_hat;
    basis.b_y = cross.normalized();
    basis.b_x = basis.b_y.cross(k_hat);
    return basis;
}

PolarizationBasis newton_gauge_triad(const PpnBody& body, const Vec3& x, const Vec3& k_hat,
                                     const PolarizationBasis& fallback) {
    try {
        return newton_gauge_triad(body, x, k_hat);
    } catch (const DegenerateGauge&) {
        return fallback;
    }
}

MirrorSpec mirror_b(const PpnBody& body, const MziGeometry& geom) {
    const Corners p = geom.corners();
    const double s = geom.zeta + kPi / 4.0;
    const double corr = body.gamma_ppn * body.gravitational_radius() / (std::sqrt(2.0) * p.b.norm());
    return {p.b, Vec3(std::sin(s), 0.0, std::cos(s)), Vec3(-corr, 0.0, 0.0)};
}

MirrorSpec mirror_c(const PpnBody& body, const MziGeometry& geom) {
    const Corners p = geom.corners();
    const double s = geom.zeta + kPi / 4.0;
    const double corr = body.gamma_ppn * body.gravitational_radius() / (std::sqrt(2.0) * p.b.norm());
    return {p.c, Vec3(-std::sin(s), 0.0, -std::cos(s)), Vec3(corr, 0.0, 0.0)};
}

Vec3 reflect(const Vec3& f, const Vec3& normal) {
    // extended-precision accumulation keeps reflect(reflect(f)) within a few ulp of f
    long double nn = 0.0L, fl = 0.0L;
    for (int i = 0; i < 3; ++i) {
        nn += static_cast<long double>(normal[i]) * normal[i];
        fl += static_cast<long double>(f[i]) * normal[i];
    }
    if (!(nn > 0.0L)) throw DomainError("reflect: zero mirror normal");
    const long double t = 2.0L * fl / nn;
    Vec3 out;
    for (int i = 0; i < 3; ++i) out[i] = static_cast<double>(t * normal[i] - f[i]);
    return out;
}

Vec3 reflect(const Vec3& f, const MirrorSpec& mirror) { return reflect(f, mirror.normal0); }

Vec3 xi_vector(const Vec3& x, const Vec3& n_hat) {
    const double r2 = x.squaredNorm();
    const Vec3 v(3.0 * x.x() * x.z(), 3.0 * x.y() * x.z(), 3.0 * x.z() * x.z() - r2);
    return 2.0 * (2.0 * v - v.dot(n_hat) * n_hat);
}

Vec3 xi_vector_ab_display(const Vec3& x, double zeta) {
    const double r2 = x.squaredNorm();
    const double xz = x.x() * x.z();
    const double zz = x.z() * x.z();
    const double s2 = std::sin(2.0 * zeta);
    const double c2 = std::cos(2.0 * zeta);
    return {(r2 - 3.0 * zz) * s2 + 3.0 * xz * c2 + 9.0 * xz, 0.0,
            c2 * (r2 - 3.0 * zz) - 3.0 * (r2 + xz * s2 - 3.0 * zz)};
}

Vec3 xi_vector_ac_display(const Vec3& x, double zeta) {
    const double r2 = x.squaredNorm();
    const double xz = x.x() * x.z();
    const double zz = x.z() * x.z();
    const double s2 = std::sin(2.0 * zeta);
    const double c2 = std::cos(2.0 * zeta);
    return -Vec3(s2 * (r2 - 3.0 * zz) - 3.0 * xz * c2 + 9.0 * xz, 0.0,
                 c2 * (r2 - 3.0 * zz) - 3.0 * r2 + 6.0 * xz * std::sin(zeta) * std::cos(zeta) + 9.0 * zz);
}

Vec3 initial_polarization(const MziGeometry& geom, Arm arm) {
    return arm == Arm::ABD ? Vec3::UnitY() : Vec3(-geom.n_ab());
}

double ppn_w_factor(const PpnBody& body, const Vec3& x) {
    const double c = body.constants.c;
    return 1.0 + body.gamma_ppn * newtonian_potential(body, x) / (c * c);
}

ArmTransport transport_arm(const PpnBody& body, const MziGeometry& geom, Arm arm, const Vec3& f_initial,
                           const TransportOptions& opt) {
    body.validate();
    geom.validate();
    const ArmPath path = arm_path(body, geom, arm);
    if (std::abs(f_initial.norm() - 1.0) > 1e-9) throw DomainError("initial polarization must be a unit vector");
    if (std::abs(f_initial.dot(path.first.n)) > 1e-9) throw DomainError("initial polarization must be transverse");
    check_segment(path.first);
    check_segment(path.second);

    ArmTransport out;
    Vec3 f0 = f_initial;
    Vec3 f2 = Vec3::Zero();
    Vec3 f3 = Vec3::Zero();
    double s_offset = 0.0;

    auto run = [&](const Segment& seg) {
        auto sys = [&](const ode::State<6>& y, ode::State<6>& dy, double s) {
            (void)y;
            const Vec3 x = seg.start + seg.n * s;
            const GravityFields fields = gravity_fields(body, x, 1.0);
            const Vec3 w = fields.omega_gm_order3;
            const Vec3 rate3 = (2.0 * w - w.dot(seg.n) * seg.n).cross(f0);
            const Vec3 rate2 = -fields.e_g.cross(seg.n).cross(f0) -
                               christoffel_apply(christoffel_spatial_order2(body, x), seg.n, f0);
            for (int i = 0; i < 3; ++i) {
                dy[i] = rate2[i];
                dy[i + 3] = rate3[i];
            }
        };
        ode::State<6> y{};
        for (int i = 0; i < 3; ++i) {
            y[i] = f2[i];
            y[i + 3] = f3[i];
        }
        ode::Options o;
        o.rel_tol = opt.rel_tol;
        o.max_step = seg.length / static_cast<double>(std::max<std::size_t>(opt.min_samples, 1));
        o.initial_step = o.max_step;
        o.min_step_rel = 1e-15;
        auto observe = [&](double s, const ode::State<6>& st) {
            if (!opt.record_trace) return;
            out.trace.push_back({s_offset + s, seg.start + seg.n * s, f0, Vec3(st[0], st[1], st[2]),
                                 Vec3(st[3], st[4], st[5])});
        };
        const auto res = ode::integrate<6>(sys, y, 0.0, seg.length, o, ode::NoEvent{}, observe);
        f2 = Vec3(res.y[0], res.y[1], res.y[2]);
        f3 = Vec3(res.y[3], res.y[4], res.y[5]);
        s_offset += seg.length;
    };

    run(path.first);
    f0 = reflect(f0, path.mirror);
    f2 = reflect(f2, path.mirror);
    f3 = reflect(f3, path.mirror);
    run(path.second);

    PolarizationFrame& fr = out.at_d;
    fr.position = path.second.end;
    fr.k_hat = path.second.n;
    const PolarizationBasis basis = newton_gauge_triad(body, fr.position, fr.k_hat, wigner_basis(fr.k_hat));
    fr.b_x = basis.b_x;
    fr.b_y = basis.b_y;
    fr.f0 = f0;
    fr.f2 = f2;
    fr.f3 = f3;
    return out;
}

PolarizationFrame transport_polarization_order3(const PpnBody& body, const MziGeometry& geom, Arm arm,
                                                const Vec3& f_initial) {
    return transport_arm(body, geom, arm, f_initial).at_d;
}

double polarization_overlap(const PolarizationFrame& a, const PolarizationFrame& b, double w_factor) {
    return w_factor * w_factor * (a.f0.dot(b.f0) + a.f0.dot(b.f3) + a.f3.dot(b.f0));
}

StarProduct polarization_star_product(const Vec3& f1, const Vec3& k1, const Vec3& f2, const Vec3& k2) {
    StarProduct out;
    const Vec3 cross = k1.cross(k2);
    const double sin_phi = cross.norm();
    out.phi = std::atan2(sin_phi, k1.dot(k2));
    if (sin_phi < 1e-12) {
        out.collinear = true;
        out.star = out.plain = f1.dot(f2);
        return out;
    }
    const Vec3 z = cross / sin_phi;
    const Vec3 by1 = z.cross(k1);
    const Vec3 by2 = z.cross(k2);
    const double f1x = -f1.dot(z);
    const double f2x = -f2.dot(z);
    const double f1y = f1.dot(by1);
    const double f2y = f2.dot(by2);
    out.star = f1x * f2x + f1y * f2y;
    out.plain = f1x * f2x + f1y * f2y * std::cos(out.phi);
    return out;
}

namespace {
double order3_scale(const PpnBody& body, double b) {
    const double c = body.constants.c;
    return body.constants.G * body.j * (1.0 + body.gamma_ppn) / (b * b * b * c * c * c);
}
double eta(double t) {
    return 6.0 * (std::cos(2.0 * t) + std::sin(2.0 * t)) + 5.0 * (std::cos(4.0 * t) + std::sin(4.0 * t)) + 5.0;
}
}  // namespace

Vec3 closed_form_f3_abd(const PpnBody& body, const MziGeometry& g) {
    const double k = order3_scale(body, g.b) / 8.0;
    return k * Vec3(8.0 * g.h * std::cos(2.0 * g.theta) + g.q * eta(g.theta), 0.0,
                    -8.0 * g.h * std::sin(2.0 * g.theta) + g.q * eta(-g.theta));
}

Vec3 closed_form_f3_acd(const PpnBody& body, const MziGeometry& g) {
    return order3_scale(body, g.b) * Vec3(0.0, 2.0 * g.q * std::cos(g.theta) - g.h * std::sin(g.theta), 0.0);
}

double closed_form_overlap(const PpnBody& body, const MziGeometry& g) {
    const double t = g.theta;
    return -order3_scale(body, g.b) / 8.0 *
           ((8.0 * g.h + g.q) * std::sin(t) + (8.0 * g.h - 5.0 * g.q) * std::cos(t) +
            5.0 * g.q * (std::sin(3.0 * t) + std::cos(3.0 * t)));
}

OracleResult oracle_parallel_transport(const StationaryMetric& metric, const NullRay& ray,
                                       const Termination& termination, const Vec3& f_initial,
                                       const OracleOptions& opt) {
    OracleResult res = oracle_transport(metric, ray, termination, f_initial, opt);
    const double scale = 1.0 / std::sqrt(res.f_norm_initial);
    *res.f_end *= scale;
    *res.f_spatial *= scale;
    res.f_norm_initial = 1.0;
    return res;
}

OracleArm oracle_arm_polarization(const StationaryMetric& metric, const PpnBody& body, const MziGeometry& geom,
                                  Arm arm, const Vec3& f_initial, const OracleOptions& opt) {
    const ArmPath path = arm_path(body, geom, arm);
    OracleArm out;
    Vec3 base = f_initial;
    Vec3 dev = Vec3::Zero();
    auto run = [&](const Vec3& start, const Vec3& n, const Segment& seg) {
        const OracleResult r = oracle_transport(metric, NullRay{start, n, 1.0, 0.0},
                                                PlaneTermination{seg.end, seg.n}, base, opt, dev);
        out.max_transversality = std::max(out.max_transversality, r.max_transversality);
        out.max_norm_drift = std::max(out.max_norm_drift, r.max_norm_drift);
        out.max_killing_drift = std::max(out.max_killing_drift, r.max_killing_drift);
        out.max_null_violation = std::max(out.max_null_violation, r.max_null_violation);
        dev = *r.f_dev_spatial;
        return r;
    };
    const OracleResult first = run(path.first.start, path.first.n, path.first);
    // fixed mirror: the actual ray is reflected specularly and continues from where it arrived
    const Vec3 k_out = -reflect(first.k_hat_end(), path.mirror);
    base = reflect(base, path.mirror);
    dev = reflect(dev, path.mirror);
    run(first.x_end, k_out.normalized(), path.second);
    out.f_base = base;
    out.f_dev = dev;
    out.f_end = base + dev;
    return out;
}


OracleArm oracle_closed_loop(const StationaryMetric& metric, const MziGeometry& geom, const Vec3& f_initial,
                             const OracleOptions& opt) {
    const Corners p = geom.corners();
    const Vec3 nab = geom.n_ab();
    const Vec3 nac = geom.n_ac();
    const std::array<std::pair<Vec3, Vec3>, 4> legs = {{{p.b, nab}, {p.d, nac}, {p.c, -nab}, {p.a, -nac}}};
    OracleArm out;
    Vec3 base = f_initial;
    Vec3 dev = Vec3::Zero();
    Vec3 x = p.a;
    Vec3 k = nab;
    for (std::size_t i = 0; i < legs.size(); ++i) {
        const auto& [end, n] = legs[i];
        const OracleResult r =
            oracle_transport(metric, NullRay{x, k, 1.0, 0.0}, PlaneTermination{end, n}, base, opt, dev);
        out.max_transversality = std::max(out.max_transversality, r.max_transversality);
        out.max_norm_drift = std::max(out.max_norm_drift, r.max_norm_drift);
        out.max_killing_drift = std::max(out.max_killing_drift, r.max_killing_drift);
        out.max_null_violation = std::max(out.max_null_violation, r.max_null_violation);
        const Vec3 next = legs[(i + 1) % legs.size()].second;
        const Vec3 normal = (n - next).normalized();
        base = reflect(base, normal);
        dev = reflect(*r.f_dev_spatial, normal);
        k = (-reflect(r.k_hat_end(), normal)).normalized();
        x = r.x_end;
    }
    out.f_base = base;
    out.f_dev = dev;
    out.f_end = base + dev;
    return out;
}

}  // namespace pnmzi
