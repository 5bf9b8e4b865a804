#pragma once

#include "pnmzi/ode.hpp"
#include "pnmzi/spacetime.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace pnmzi {

// x(t) = b + n c (t - t0) + x2(t)
struct NullRay {
    Vec3 b_start = Vec3::Zero();
    Vec3 n_hat = Vec3::UnitX();
    double omega_inf = 1.0;  // rad/s
    double t0 = 0.0;         // s

    void validate() const;
    static NullRay between(const Vec3& from, const Vec3& to, double omega_inf, double t0 = 0.0);
};

// Coordinate flight time split into its Euclidean and Shapiro parts, both as lengths c*t.
struct FlightTime {
    double euclidean_length = 0.0;  // m
    double shapiro_length = 0.0;    // m
    double c = PhysicalConstants{}.c;

    double coordinate_time() const { return (euclidean_length + shapiro_length) / c; }
    double delay() const { return shapiro_length / c; }
};

// ln((r + x.n)/(|b| + b.n)) for the chord b -> x, evaluated without cancellation.
double shapiro_log(const Vec3& from, const Vec3& to);

FlightTime time_of_flight(const PpnBody& body, const Vec3& from, const Vec3& to);

struct RaySample {
    double t = 0.0;                   // s since t0
    Vec3 x_perp2 = Vec3::Zero();      // m
    double x_par2 = 0.0;              // m
};

struct RaySolution {
    Vec3 b_start = Vec3::Zero();
    Vec3 n_hat = Vec3::UnitX();
    double t0 = 0.0;
    double duration = 0.0;
    std::vector<RaySample> samples;
    double t_arrival = 0.0;      // s
    double path_length = 0.0;    // m
    double x_par2_closed = 0.0;  // quadrature of dx_par/dt = -(1+gamma) U / c at the endpoint

    Vec3 chord_end(double c) const { return b_start + n_hat * (c * duration); }
    Vec3 position(const RaySample& s, double c) const {
        return b_start + n_hat * (c * s.t) + s.x_perp2 + n_hat * s.x_par2;
    }
};

struct PpnRayOptions {
    double rel_tol = 1e-10;
    std::size_t min_samples = 64;
};

RaySolution integrate_ray_ppn(const PpnBody& body, const NullRay& ray, double duration,
                              const PpnRayOptions& opt = {});

// First-PPN proper length of the chord: |x - b| + gamma (GM/c^2) ln(...).
double proper_length(const PpnBody& body, const Vec3& from, const Vec3& to);
double proper_length(const PpnBody& body, const RaySolution& ray);

// ---- exact geodesic oracle ----

struct PlaneTermination {
    Vec3 point;
    Vec3 normal;  // crossing from the negative to the positive side ends the run
};
struct RadiusTermination {
    double radius;
};
using Termination = std::variant<PlaneTermination, RadiusTermination>;

struct OracleOptions {
    double rel_tol = 1e-12;
    double event_tol = 1e-9;        // m
    double constraint_tol = 1e-10;  // null, Killing, transversality, norm
    double max_length = 1e9;        // m of affine parameter before giving up
    bool record_samples = false;
    std::size_t max_steps = 200000;
    double c = PhysicalConstants{}.c;  // converts x^0 to seconds
};

struct OracleSample {
    double t = 0.0;  // coordinate time, s
    Vec3 x = Vec3::Zero();
    double delay = 0.0;  // c(t - t0) - |x - b|, m
};

struct OracleResult {
    double sigma = 0.0;                 // affine length, m
    Vec3 x_end = Vec3::Zero();
    Vec4 p_end = Vec4::Zero();          // dx^mu/dsigma, x^0 = ct
    double t_arrival = 0.0;             // s
    double delay_length = 0.0;          // c(t - t0) - |x_end - b|, m
    double euclidean_length = 0.0;      // |x_end - b|, m
    double max_null_violation = 0.0;
    double max_killing_drift = 0.0;
    double max_transversality = 0.0;
    double max_norm_drift = 0.0;
    std::size_t steps = 0;
    std::optional<Vec4> f_end;          // transported polarization (4-vector)
    std::optional<Vec3> f_spatial;      // gauge-fixed to f.u = 0, spatial part
    std::optional<Vec3> f_dev_spatial;  // f_spatial minus the base vector, kept at full precision
    double f_norm_initial = 0.0;        // g(f, f) at the start
    std::vector<OracleSample> samples;

    Vec3 k_hat_end() const { return p_end.tail<3>().normalized(); }
    double delay(double c) const { return delay_length / c; }
};

OracleResult oracle_null_geodesic(const StationaryMetric& metric, const NullRay& ray,
                                  const Termination& termination, const OracleOptions& opt = {});

// Geodesic plus parallel transport of f = f_spatial + f_dev (transverse to n).
// f_dev is a small offset integrated separately from the base vector. The time
// component is fixed so that f.k = 0; f is not renormalized.
OracleResult oracle_transport(const StationaryMetric& metric, const NullRay& ray,
                              const Termination& termination, const Vec3& f_spatial,
                              const OracleOptions& opt = {}, const Vec3& f_dev = Vec3::Zero());

}  // namespace pnmzi
