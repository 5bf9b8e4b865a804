#include "pnmzi/rays.hpp"

#include <doctest.h>

#include <cmath>

using namespace pnmzi;

namespace {

const PpnBody kEarth = PpnBody::earth();
const double kC = PhysicalConstants{}.c;

double closed_delay_length(const PpnBody& b, const Vec3& from, const Vec3& to) {
    return (1.0 + b.gamma_ppn) * b.gm / (kC * kC) * shapiro_log(from, to);
}

}  // namespace

TEST_CASE("flat oracle flight time is L/c") {
    const FlatMetric flat;
    const Vec3 from(6.371e6, 0, 0);
    const Vec3 to(6.371e6, 6e3, 4e5);
    const NullRay ray = NullRay::between(from, to, 1.0);
    const OracleResult r = oracle_null_geodesic(flat, ray, PlaneTermination{to, ray.n_hat});
    CHECK((r.x_end - to).norm() < 1e-6);
    CHECK(r.t_arrival == doctest::Approx((to - from).norm() / kC).epsilon(1e-12));
    CHECK(std::abs(r.delay_length) < 1e-6);
}

TEST_CASE("Shapiro delay: oracle against the closed form") {
    const IsotropicSchwarzschildMetric metric(kEarth);
    const double r0 = kEarth.radius;
    struct Case {
        Vec3 from, to;
    };
    const Vec3 a = r0 * Vec3(std::sin(0.7), 0, std::cos(0.7));
    const Case cases[] = {
        {a, a + 6e3 * Vec3(std::cos(0.7), 0, -std::sin(0.7))},
        {a, a + 4e5 * a.normalized()},
        {Vec3(0, 0, r0), Vec3(0, 0, r0 + 4e5)},  // radial
        {Vec3(r0, -1e6, 0), Vec3(r0, 1e6, 0)},   // tangent at closest approach
    };
    for (const Case& cs : cases) {
        const NullRay ray = NullRay::between(cs.from, cs.to, 1.0);
        const OracleResult r = oracle_null_geodesic(metric, ray, PlaneTermination{cs.to, ray.n_hat});
        const double closed = closed_delay_length(kEarth, cs.from, cs.to);
        CHECK(closed > 0.0);
        CHECK(std::abs(r.delay_length - closed) / closed < 1e-6);
        CHECK(r.max_killing_drift < 1e-10);
        CHECK(r.max_null_violation < 1e-10);
    }
}

TEST_CASE("Shapiro logarithm: branches agree with the naive form") {
    const Vec3 b(6.371e6, 1e5, -2e5);
    for (const Vec3& to : {Vec3(6.4e6, 3e5, 1e6), Vec3(-6.4e6, 3e5, 1e6), Vec3(-1e7, 1e5, -2e5)}) {
        const Vec3 n = (to - b).normalized();
        const double naive = std::log((to.norm() + to.dot(n)) / (b.norm() + b.dot(n)));
        CHECK(shapiro_log(b, to) == doctest::Approx(naive).epsilon(1e-9));
    }
    CHECK(shapiro_log(b, b) == 0.0);
    CHECK_THROWS_AS(shapiro_log(Vec3(-1, 0, 0), Vec3(1, 0, 0)), DomainError);
}

TEST_CASE("Shapiro term scales with 1+gamma and with GM") {
    const Vec3 from(6.371e6, 0, 0), to(6.371e6, 6e3, 4e5);
    PpnBody b = kEarth;
    const double d1 = time_of_flight(b, from, to).shapiro_length;
    b.gamma_ppn = 0.5;
    CHECK(time_of_flight(b, from, to).shapiro_length == doctest::Approx(0.75 * d1).epsilon(1e-14));
    b = kEarth;
    b.gm *= 2.0;
    CHECK(time_of_flight(b, from, to).shapiro_length == doctest::Approx(2.0 * d1).epsilon(1e-14));
    b.gm = 0.0;
    CHECK(time_of_flight(b, from, to).shapiro_length == 0.0);
    CHECK(time_of_flight(b, from, to).coordinate_time() == doctest::Approx((to - from).norm() / kC));
}

TEST_CASE("PPN ray: longitudinal correction against the closed form") {
    const Vec3 a = kEarth.radius * Vec3(std::sin(0.7), 0, std::cos(0.7));
    const Vec3 ends[] = {a + 4e5 * a.normalized(), a + 6e3 * Vec3(std::cos(0.7), 0, -std::sin(0.7))};
    for (const Vec3& to : ends) {
        const NullRay ray = NullRay::between(a, to, 1.0);
        const double len = (to - a).norm();
        const RaySolution sol = integrate_ray_ppn(kEarth, ray, len / kC);
        CHECK(sol.samples.size() >= 64);
        const double xp = sol.samples.back().x_par2;
        CHECK(std::abs(xp - sol.x_par2_closed) / std::abs(sol.x_par2_closed) < 1e-8);
        // x_par2 is the negative Shapiro length
        CHECK(xp == doctest::Approx(-closed_delay_length(kEarth, a, to)).epsilon(1e-8));
    }
}

TEST_CASE("PPN ray: radial ray has no transverse bending") {
    const Vec3 from(0, 0, kEarth.radius);
    const NullRay ray = NullRay::between(from, Vec3(0, 0, kEarth.radius + 4e5), 1.0);
    const RaySolution sol = integrate_ray_ppn(kEarth, ray, 4e5 / kC);
    for (const RaySample& s : sol.samples) CHECK(s.x_perp2.norm() < 1e-12);
}

TEST_CASE("PPN ray: initial longitudinal slope is -(1+gamma) U / c") {
    const Vec3 from(0, 0, kEarth.radius);
    const NullRay ray{from, Vec3(1, 0, 0), 1.0, 0.0};
    const RaySolution sol = integrate_ray_ppn(kEarth, ray, 1e-6);
    const RaySample& s = sol.samples[1];
    const double slope = -(1.0 + kEarth.gamma_ppn) * newtonian_potential(kEarth, from) / kC;
    CHECK(s.x_par2 / s.t == doctest::Approx(slope).epsilon(1e-4));
}

TEST_CASE("PPN ray: corrections are linear in 1+gamma and vanish without mass") {
    const Vec3 from(6.371e6, 0, 0), to(6.371e6, 2e5, 4e5);
    const NullRay ray = NullRay::between(from, to, 1.0);
    const double t = (to - from).norm() / kC;
    PpnBody b = kEarth;
    const RaySolution s1 = integrate_ray_ppn(b, ray, t);
    b.gamma_ppn = 0.0;
    const RaySolution s0 = integrate_ray_ppn(b, ray, t);
    CHECK(s0.samples.back().x_par2 == doctest::Approx(0.5 * s1.samples.back().x_par2).epsilon(1e-9));
    CHECK((s0.samples.back().x_perp2 - 0.5 * s1.samples.back().x_perp2).norm() <
          1e-9 * s1.samples.back().x_perp2.norm());
    b.gm = 0.0;
    const RaySolution sf = integrate_ray_ppn(b, ray, t);
    CHECK(sf.samples.back().x_par2 == 0.0);
    CHECK(sf.samples.back().x_perp2.norm() == 0.0);
}

TEST_CASE("proper length of a chord") {
    const Vec3 from(6.371e6, 0, 0), to(6.371e6, 6e3, 4e5);
    const double len = (to - from).norm();
    const double excess = kEarth.gamma_ppn * kEarth.gm / (kC * kC) * shapiro_log(from, to);
    CHECK(proper_length(kEarth, from, to) - len == doctest::Approx(excess).epsilon(1e-6));
    PpnBody flat = kEarth;
    flat.gm = 0.0;
    CHECK(proper_length(flat, from, to) == len);
}

TEST_CASE("oracle failure modes") {
    const IsotropicSchwarzschildMetric metric(kEarth);
    const Vec3 from(6.371e6, 0, 0), to(6.371e6, 6e3, 4e5);
    const NullRay ray = NullRay::between(from, to, 1.0);
    SUBCASE("a plane never reached exhausts the length budget") {
        OracleOptions opt;
        opt.max_length = 1e3;
        CHECK_THROWS_AS(oracle_null_geodesic(metric, ray, PlaneTermination{to, ray.n_hat}, opt), IntegrationFailure);
    }
    SUBCASE("an unreachable constraint tolerance invalidates the run") {
        OracleOptions opt;
        opt.constraint_tol = 1e-40;
        CHECK_THROWS_AS(oracle_null_geodesic(metric, ray, PlaneTermination{to, ray.n_hat}, opt), OracleInvalid);
    }
    SUBCASE("invalid rays are rejected") {
        NullRay bad = ray;
        bad.n_hat = Vec3(1, 1, 0);
        CHECK_THROWS_AS(oracle_null_geodesic(metric, bad, PlaneTermination{to, ray.n_hat}), DomainError);
        CHECK_THROWS_AS(NullRay::between(from, from, 1.0), DomainError);
    }
}

TEST_CASE("radius termination") {
    const IsotropicSchwarzschildMetric metric(kEarth);
    const NullRay ray{Vec3(0, 0, kEarth.radius), Vec3(0, 0, 1), 1.0, 0.0};
    const OracleResult r = oracle_null_geodesic(metric, ray, RadiusTermination{kEarth.radius + 1e5});
    CHECK(r.x_end.norm() == doctest::Approx(kEarth.radius + 1e5).epsilon(1e-12));
}
