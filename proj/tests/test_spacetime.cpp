#include "pnmzi/spacetime.hpp"

#include <doctest.h>

#include <cmath>

using namespace pnmzi;

namespace {

PpnBody flat_body() {
    PpnBody b = PpnBody::earth();
    b.gm = 0.0;
    b.j = 0.0;
    b.omega_rot = 0.0;
    return b;
}

double rel(const Vec3& a, const Vec3& b) { return (a - b).norm() / b.norm(); }

// Central differences of the metric evaluators.
struct Fd {
    Vec3 grad_h;
    Mat3 dg;  // (i, k) = d g_i / d x_k
    std::array<Mat3, 3> dgam;
};

Fd central(const PpnBody& body, const Vec3& x, double d) {
    Fd out;
    for (int k = 0; k < 3; ++k) {
        const Vec3 e = Vec3::Unit(k) * d;
        const Metric3Plus1 hi = metric_ppn(body, x + e);
        const Metric3Plus1 lo = metric_ppn(body, x - e);
        out.grad_h[k] = (hi.h_dev - lo.h_dev) / (2.0 * d);
        out.dg.col(k) = (hi.g_vec - lo.g_vec) / (2.0 * d);
        out.dgam[k] = (hi.gamma_dev - lo.gamma_dev) / (2.0 * d);
    }
    return out;
}

const Vec3 kGeneric = Vec3(2.1e6, -3.3e6, 4.7e6);

}  // namespace

TEST_CASE("flat limit gives Minkowski data") {
    const PpnBody b = flat_body();
    for (const Vec3& x : {Vec3(1e6, 2e6, 3e6), Vec3(0, 0, 7e6)}) {
        const Metric3Plus1 m = metric_ppn(b, x);
        CHECK(m.h_scalar() == 1.0);
        CHECK(m.g_vec.norm() == 0.0);
        CHECK(m.gamma_spatial() == Mat3::Identity());
        const GravityFields f = gravity_fields(b, x, 1.0);
        CHECK(f.e_g.norm() == 0.0);
        CHECK(f.omega_gm.norm() == 0.0);
        for (const Mat3& l : christoffel_spatial_order2(b, x)) CHECK(l.norm() == 0.0);
        const IsotropicFactors iso = isotropic_factors(b, x.norm());
        CHECK(iso.V == 1.0);
        CHECK(iso.W == 1.0);
    }
}

TEST_CASE("shift vanishes on the rotation axis") {
    const PpnBody e = PpnBody::earth();
    CHECK(metric_ppn(e, Vec3(0, 0, e.radius)).g_vec.norm() == 0.0);
    CHECK(metric_ppn(e, Vec3(0, 0, -2.0 * e.radius)).g_vec.norm() == 0.0);
    CHECK(metric_ppn(e, Vec3(e.radius, 0, 0)).g_vec.norm() > 0.0);
}

TEST_CASE("Earth surface potential and lapse") {
    const PpnBody e = PpnBody::earth();
    const double c = e.constants.c;
    const Vec3 x(0, e.radius, 0);
    // GM / (R c^2), independently evaluated
    CHECK(newtonian_potential(e, x) / (c * c) == doctest::Approx(6.961275e-10).epsilon(1e-6));
    CHECK(metric_ppn(e, x).h_dev == doctest::Approx(-2.0 * 6.961275e-10).epsilon(1e-6));
    CHECK(e.gravitational_radius() == doctest::Approx(8.870056e-3).epsilon(1e-6));
    const IsotropicFactors iso = isotropic_factors(e, e.radius);
    CHECK(iso.one_minus_V == doctest::Approx(6.961275e-10).epsilon(1e-6));
    CHECK(1.0 - iso.V == doctest::Approx(iso.one_minus_V).epsilon(1e-6));
}

TEST_CASE("order bookkeeping at the Earth surface") {
    const PpnBody e = PpnBody::earth();
    const Metric3Plus1 m = metric_ppn(e, Vec3(e.radius, 0, 0));
    CHECK(std::abs(m.h_dev) < 2e-9);
    CHECK(m.g_vec.norm() < 1e-15);
    CHECK(m.g_vec.norm() > 1e-17);
}

TEST_CASE("isotropic Schwarzschild limits") {
    PpnBody b = PpnBody::earth();
    const double rg = b.gravitational_radius();
    const IsotropicFactors near = isotropic_factors(b, rg / 4.0 * (1.0 + 1e-9));
    CHECK(near.V > 0.0);
    CHECK(near.V < 1e-8);
    CHECK_THROWS_AS(isotropic_factors(b, rg / 8.0), DomainError);
    CHECK_THROWS_AS(metric_ppn(b, Vec3::Zero()), DomainError);
}

TEST_CASE("PPN and isotropic Schwarzschild agree to second order") {
    PpnBody b = PpnBody::earth();
    b.j = 0.0;
    b.gm = 1e24;  // r_g ~ 22 m so the second-order gap is visible
    const double rg = b.gravitational_radius();
    for (double k : {10.0, 30.0, 100.0, 1e3, 1e5}) {
        const Vec3 x = k * rg * Vec3(0.6, 0.0, 0.8);
        const double v_ppn = std::sqrt(metric_ppn(b, x).h_scalar());
        const double v_iso = isotropic_factors(b, x.norm()).V;
        CHECK(std::abs(v_ppn - v_iso) < 10.0 * (1.0 / k) * (1.0 / k));
    }
}

TEST_CASE("gravito-electric field matches finite differences") {
    const PpnBody e = PpnBody::earth();
    for (const Vec3& x : {kGeneric, Vec3(e.radius, 0, 0), Vec3(0.0, 0.0, 1.5 * e.radius)}) {
        const Vec3 eg = gravity_fields(e, x, 1.0).e_g;
        for (double s : {1e-6, 1e-5, 1e-4}) {
            const Fd fd = central(e, x, s * x.norm());
            CHECK(rel(eg, -fd.grad_h / (2.0 * metric_ppn(e, x).h_scalar())) < 1e-6);
        }
    }
}

TEST_CASE("gravito-magnetic field matches finite-difference curl") {
    const PpnBody e = PpnBody::earth();
    for (const Vec3& x : {kGeneric, Vec3(e.radius, 0, 0), Vec3(1e6, 2e6, -6e6)}) {
        const GravityFields f = gravity_fields(e, x, 1.0);
        for (double s : {1e-6, 1e-5, 1e-4}) {
            const Mat3 dg = central(e, x, s * x.norm()).dg;
            const Vec3 curl(dg(2, 1) - dg(1, 2), dg(0, 2) - dg(2, 0), dg(1, 0) - dg(0, 1));
            CHECK(rel(f.omega_gm, -0.5 * curl) < 1e-6);
        }
        // the order-3 part is -k0/4 curl R = the leading part of -k0/2 curl g
        CHECK(rel(f.omega_gm_order3, f.omega_gm) < 1e-8);
    }
}

TEST_CASE("gravito-magnetic field scales with k0 and vanishes without spin") {
    PpnBody e = PpnBody::earth();
    const GravityFields f1 = gravity_fields(e, kGeneric, 1.0);
    const GravityFields f3 = gravity_fields(e, kGeneric, 3.0);
    CHECK(rel(f3.omega_gm, 3.0 * f1.omega_gm) < 1e-15);
    e.j = 0.0;
    CHECK(gravity_fields(e, kGeneric, 1.0).omega_gm.norm() == 0.0);
}

TEST_CASE("gravito-magnetic dipole pattern") {
    const PpnBody e = PpnBody::earth();
    const double r = 2.0 * e.radius;
    const Vec3 axis = gravity_fields(e, Vec3(0, 0, r), 1.0).omega_gm_order3;
    const Vec3 equator = gravity_fields(e, Vec3(r, 0, 0), 1.0).omega_gm_order3;
    CHECK(std::abs(axis.x()) < 1e-30);
    CHECK(std::abs(axis.y()) < 1e-30);
    // (3z^2 - r^2) is 2 r^2 on the axis and -r^2 on the equator
    CHECK(axis.z() / equator.z() == doctest::Approx(-2.0).epsilon(1e-14));
    // 1/r^3 falloff on the axis
    const Vec3 far = gravity_fields(e, Vec3(0, 0, 2.0 * r), 1.0).omega_gm_order3;
    CHECK(axis.z() / far.z() == doctest::Approx(8.0).epsilon(1e-14));
}

TEST_CASE("spatial Christoffels: symmetry and finite differences") {
    const PpnBody e = PpnBody::earth();
    for (const Vec3& x : {kGeneric, Vec3(0, e.radius, 0)}) {
        const Christoffel3 lam = christoffel_spatial_order2(e, x);
        double lmax = 0.0;
        for (const Mat3& l : lam) {
            CHECK((l - l.transpose()).norm() == 0.0);
            lmax = std::max(lmax, l.cwiseAbs().maxCoeff());
        }
        const Mat3 inv = metric_ppn(e, x).gamma_spatial().inverse();
        for (double s : {1e-6, 1e-5, 1e-4}) {
            const Fd fd = central(e, x, s * x.norm());
            double diff = 0.0;
            for (int m = 0; m < 3; ++m)
                for (int n = 0; n < 3; ++n)
                    for (int l = 0; l < 3; ++l) {
                        double v = 0.0;
                        for (int k = 0; k < 3; ++k)
                            v += 0.5 * inv(m, k) * (fd.dgam[n](k, l) + fd.dgam[l](k, n) - fd.dgam[k](n, l));
                        diff = std::max(diff, std::abs(v - lam[m](n, l)));
                    }
            CHECK(diff / lmax < 1e-6);
        }
    }
}

TEST_CASE("comoving metric") {
    PpnBody e = PpnBody::earth();
    const Vec3 x = kGeneric;
    SUBCASE("no rotation reproduces the PPN metric") {
        e.omega_rot = 0.0;
        const Metric3Plus1 a = metric_comoving(e, x);
        const Metric3Plus1 b = metric_ppn(e, x);
        CHECK(a.h_dev == b.h_dev);
        CHECK(a.g_vec == b.g_vec);
        CHECK(a.gamma_dev == b.gamma_dev);
    }
    SUBCASE("rotation terms vanish on the axis") {
        const Vec3 pole(0, 0, e.radius);
        CHECK(metric_comoving(e, pole).h_dev == metric_ppn(e, pole).h_dev);
        CHECK(metric_comoving(e, pole).g_vec == metric_ppn(e, pole).g_vec);
        CHECK_THROWS_AS(comoving_redshift_ratio(e, pole), DomainError);
    }
    SUBCASE("potential gradient dominates rotation at the equator") {
        const double ratio = comoving_redshift_ratio(e, Vec3(e.radius, 0, 0));
        CHECK(ratio == doctest::Approx(289.88).epsilon(1e-3));
        CHECK(ratio > 200.0);
        CHECK(ratio < 400.0);
    }
}

TEST_CASE("body validation") {
    PpnBody b = PpnBody::earth();
    CHECK_NOTHROW(b.validate());
    b.gm = -1.0;
    CHECK_THROWS_AS(b.validate(), DomainError);
    b = PpnBody::earth();
    b.radius = 0.0;
    CHECK_THROWS_AS(b.validate(), DomainError);
    b = PpnBody::earth();
    b.gamma_ppn = std::nan("");
    CHECK_THROWS_AS(b.validate(), DomainError);
}

TEST_CASE("exact metric samples agree with the 3+1 evaluators") {
    const PpnBody e = PpnBody::earth();
    const PpnMetric ppn(e);
    const Metric3Plus1 a = to_3plus1(ppn.sample(kGeneric));
    const Metric3Plus1 b = metric_ppn(e, kGeneric);
    CHECK(a.h_dev == doctest::Approx(b.h_dev).epsilon(1e-14));
    CHECK(rel(a.g_vec, b.g_vec) < 1e-12);
    const IsotropicSchwarzschildMetric iso(e);
    const Metric3Plus1 s = to_3plus1(iso.sample(kGeneric));
    const Metric3Plus1 t = metric_schwarzschild_isotropic(e, kGeneric);
    CHECK(s.h_dev == doctest::Approx(t.h_dev).epsilon(1e-14));
    CHECK(s.gamma_dev(0, 0) == doctest::Approx(t.gamma_dev(0, 0)).epsilon(1e-14));
    CHECK(FlatMetric().sample(kGeneric).h_dev == 0.0);
}
