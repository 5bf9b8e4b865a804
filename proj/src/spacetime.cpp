#include "pnmzi/spacetime.hpp"

#include <cmath>

namespace pnmzi {

namespace {

double checked_radius(const Vec3& x) {
    const double r = x.norm();
    if (!(r > 0.0)) throw DomainError("metric evaluated at the origin");
    return r;
}

Metric3Plus1 assemble(double h_dev, double w_dev, const Vec3& r_vec) {
    Metric3Plus1 m;
    m.h_dev = h_dev;
    const double h = 1.0 + h_dev;
    m.g_vec = r_vec / (2.0 * h);
    m.gamma_dev = w_dev * Mat3::Identity() + h * m.g_vec * m.g_vec.transpose();
    return m;
}

Vec3 v_pattern(const Vec3& x) {
    const double r2 = x.squaredNorm();
    return {3.0 * x.x() * x.z(), 3.0 * x.y() * x.z(), 3.0 * x.z() * x.z() - r2};
}

double frame_dragging_coefficient(const PpnBody& body) {
    const double c = body.constants.c;
    return -2.0 * (1.0 + body.gamma_ppn) * body.constants.G * body.j / (c * c * c);
}

}  // namespace

void PpnBody::validate() const {
    if (!(gm >= 0.0) || !std::isfinite(gm)) throw DomainError("body.gm must be finite and >= 0");
    if (!(j >= 0.0) || !std::isfinite(j)) throw DomainError("body.j must be finite and >= 0");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("body.radius must be > 0");
    if (!std::isfinite(gamma_ppn)) throw DomainError("body.gamma must be finite");
    if (!std::isfinite(alpha_eep)) throw DomainError("body.alpha must be finite");
    if (!std::isfinite(omega_rot)) throw DomainError("body.omega_rot must be finite");
    if (!(constants.c > 0.0) || !(constants.G > 0.0)) throw DomainError("constants must be > 0");
}

PpnBody PpnBody::earth() {
    PpnBody b;
    b.gm = 3.986004418e14;
    b.j = 7.07e33;
    b.gamma_ppn = 1.0;
    b.alpha_eep = 0.0;
    b.omega_rot = 7.292e-5;
    b.radius = 6.371e6;
    return b;
}

double newtonian_potential(const PpnBody& body, const Vec3& x) {
    return body.gm / checked_radius(x);
}

Vec3 potential_gradient(const PpnBody& body, const Vec3& x) {
    const double r = checked_radius(x);
    return -body.gm * x / (r * r * r);
}

Vec3 frame_dragging_vector(const PpnBody& body, const Vec3& x) {
    const double r = checked_radius(x);
    const Vec3 zxx(-x.y(), x.x(), 0.0);
    return frame_dragging_coefficient(body) * zxx / (r * r * r);
}

Metric3Plus1 metric_ppn(const PpnBody& body, const Vec3& x) {
    const double c2 = body.constants.c * body.constants.c;
    const double u = newtonian_potential(body, x) / c2;
    return assemble(-2.0 * u, 2.0 * body.gamma_ppn * u, frame_dragging_vector(body, x));
}

IsotropicFactors isotropic_factors(const PpnBody& body, double r) {
    const double rg = body.gravitational_radius();
    if (!(r > rg / 4.0)) throw DomainError("radius inside the isotropic horizon r_g/4");
    const double u = rg / (4.0 * r);
    IsotropicFactors f;
    f.V = (1.0 - u) / (1.0 + u);
    f.one_minus_V = 2.0 * u / (1.0 + u);
    f.W = (1.0 + u) * (1.0 + u);
    f.W_minus_one = u * (2.0 + u);
    return f;
}

Metric3Plus1 metric_schwarzschild_isotropic(const PpnBody& body, const Vec3& x) {
    return to_3plus1(IsotropicSchwarzschildMetric(body).sample(x));
}

Metric3Plus1 metric_comoving(const PpnBody& body, const Vec3& x) {
    const double c = body.constants.c;
    const double u = newtonian_potential(body, x) / (c * c);
    const double w = body.omega_rot;
    const double rho2 = x.x() * x.x() + x.y() * x.y();
    const Vec3 omega(0.0, 0.0, w);
    const Vec3 r_vec = frame_dragging_vector(body, x) - 2.0 * x.cross(omega) / c;
    return assemble(-2.0 * u + w * w * rho2 / (c * c), 2.0 * body.gamma_ppn * u, r_vec);
}

GravityFields gravity_fields(const PpnBody& body, const Vec3& x, double k0) {
    const double r = checked_radius(x);
    const double c2 = body.constants.c * body.constants.c;
    const double r3 = r * r * r;
    const double h = 1.0 - 2.0 * body.gm / (c2 * r);
    const Vec3 grad_h = 2.0 * body.gm * x / (c2 * r3);

    const Vec3 r_vec = frame_dragging_vector(body, x);
    const Vec3 curl_r = frame_dragging_coefficient(body) * v_pattern(x) / (r3 * r * r);
    const Vec3 curl_g = curl_r / (2.0 * h) - grad_h.cross(r_vec) / (2.0 * h * h);

    GravityFields f;
    f.e_g = -grad_h / (2.0 * h);
    f.omega_gm = -0.5 * k0 * curl_g;
    f.omega_gm_order3 = -0.25 * k0 * curl_r;
    return f;
}

Christoffel3 christoffel_spatial_order2(const PpnBody& body, const Vec3& x) {
    const double c2 = body.constants.c * body.constants.c;
    const Vec3 du = potential_gradient(body, x) * (body.gamma_ppn / c2);
    Christoffel3 lam;
    for (int m = 0; m < 3; ++m) {
        lam[m].setZero();
        for (int n = 0; n < 3; ++n)
            for (int l = 0; l < 3; ++l)
                lam[m](n, l) = (m == n ? du[l] : 0.0) + (m == l ? du[n] : 0.0) - (n == l ? du[m] : 0.0);
    }
    return lam;
}

double comoving_redshift_ratio(const PpnBody& body, const Vec3& x) {
    const double r = checked_radius(x);
    const double rho = std::hypot(x.x(), x.y());
    const double rot = body.omega_rot * body.omega_rot * rho;
    if (!(rot > 0.0)) throw DomainError("rotation term vanishes on the axis or for omega_rot = 0");
    return (body.gm / (r * r)) / rot;
}

MetricSample IsotropicSchwarzschildMetric::sample(const Vec3& x) const {
    const double r = checked_radius(x);
    const double rg = body_.gravitational_radius();
    if (!(r > rg / 4.0)) throw DomainError("radius inside the isotropic horizon r_g/4");
    const double u = rg / (4.0 * r);
    const Vec3 grad_u = -u * x / (r * r);
    const double up = 1.0 + u;

    MetricSample s;
    s.h_dev = -4.0 * u / (up * up);
    s.grad_h_dev = (-4.0 * (1.0 - u) / (up * up * up)) * grad_u;
    s.w_dev = u * (4.0 + u * (6.0 + u * (4.0 + u)));
    s.grad_w_dev = (4.0 * up * up * up) * grad_u;
    return s;
}

MetricSample PpnMetric::sample(const Vec3& x) const {
    const double r = checked_radius(x);
    const double c2 = body_.constants.c * body_.constants.c;
    const double r3 = r * r * r;
    const double u = body_.gm / (c2 * r);
    const Vec3 grad_u = -body_.gm * x / (c2 * r3);

    MetricSample s;
    s.h_dev = -2.0 * u;
    s.grad_h_dev = -2.0 * grad_u;
    s.w_dev = 2.0 * body_.gamma_ppn * u;
    s.grad_w_dev = 2.0 * body_.gamma_ppn * grad_u;

    const double kappa = frame_dragging_coefficient(body_);
    const Vec3 zxx(-x.y(), x.x(), 0.0);
    s.r_vec = kappa * zxx / r3;
    Mat3 dzxx;
    dzxx << 0.0, -1.0, 0.0,
            1.0, 0.0, 0.0,
            0.0, 0.0, 0.0;
    s.r_jacobian = kappa * (dzxx / r3 - 3.0 * zxx * x.transpose() / (r3 * r * r));
    return s;
}

Metric3Plus1 to_3plus1(const MetricSample& s) {
    return assemble(s.h_dev, s.w_dev, s.r_vec);
}

}  // namespace pnmzi
