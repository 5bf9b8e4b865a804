#pragma once

#include "pnmzi/interferometry.hpp"

#include <vector>

namespace pnmzi {

struct PolarizationBasis {
    Vec3 k_hat = Vec3::UnitZ();
    Vec3 b_x = Vec3::UnitX();
    Vec3 b_y = Vec3::UnitY();
};

struct PolarizationFrame {
    Vec3 position = Vec3::Zero();
    Vec3 k_hat = Vec3::UnitZ();
    Vec3 b_x = Vec3::UnitX();
    Vec3 b_y = Vec3::UnitY();
    Vec3 f0 = Vec3::Zero();
    Vec3 f2 = Vec3::Zero();
    Vec3 f3 = Vec3::Zero();
};

enum class Arm { ABD, ACD };
const char* to_string(Arm arm);

struct MirrorSpec {
    Vec3 position = Vec3::Zero();
    Vec3 normal0 = Vec3::UnitX();
    Vec3 normal2 = Vec3::Zero();  // eps^2 correction, not used by the transport
};

// R(k) = R_z(phi) R_y(theta); phi = 0 when k is along -z.
Mat3 wigner_standard_rotation(const Vec3& k_hat);
PolarizationBasis wigner_basis(const Vec3& k_hat);

// z := free-fall direction w (along E_g), b_y = unit(w x k), b_x = b_y x k.
PolarizationBasis newton_gauge_triad(const PpnBody& body, const Vec3& x, const Vec3& k_hat);
PolarizationBasis newton_gauge_triad(const PpnBody& body, const Vec3& x, const Vec3& k_hat,
                                     const PolarizationBasis& fallback);

MirrorSpec mirror_b(const PpnBody& body, const MziGeometry& geom);
MirrorSpec mirror_c(const PpnBody& body, const MziGeometry& geom);

// f_r = 2 (f.l) l - f
Vec3 reflect(const Vec3& f, const Vec3& normal);
Vec3 reflect(const Vec3& f, const MirrorSpec& mirror);

// Xi = 2 (2 v - (v.n) n), v = (3xz, 3yz, 3z^2 - r^2)
Vec3 xi_vector(const Vec3& x, const Vec3& n_hat);
// The two displayed arm-specific forms.
Vec3 xi_vector_ab_display(const Vec3& x, double zeta);
Vec3 xi_vector_ac_display(const Vec3& x, double zeta);

// ABD: y-hat. ACD: -n_AB, in-plane and transverse to n_AC.
Vec3 initial_polarization(const MziGeometry& geom, Arm arm);

struct TransportSample {
    double s = 0.0;  // path length from A, m
    Vec3 x = Vec3::Zero();
    Vec3 f0 = Vec3::Zero();
    Vec3 f2 = Vec3::Zero();
    Vec3 f3 = Vec3::Zero();
};

struct TransportOptions {
    double rel_tol = 1e-10;
    bool record_trace = false;
    std::size_t min_samples = 32;  // per segment
};

struct ArmTransport {
    PolarizationFrame at_d;
    std::vector<TransportSample> trace;
};

ArmTransport transport_arm(const PpnBody& body, const MziGeometry& geom, Arm arm, const Vec3& f_initial,
                           const TransportOptions& opt = {});
PolarizationFrame transport_polarization_order3(const PpnBody& body, const MziGeometry& geom, Arm arm,
                                                const Vec3& f_initial);

// W = 1 + gamma U / c^2 at x.
double ppn_w_factor(const PpnBody& body, const Vec3& x);

// W^2 (f0.f0 + f0.f3 + f3.f0); order-2 parts are left out.
double polarization_overlap(const PolarizationFrame& a, const PolarizationFrame& b, double w_factor);

struct StarProduct {
    double star = 0.0;
    double plain = 0.0;
    double phi = 0.0;
    bool collinear = false;
};
StarProduct polarization_star_product(const Vec3& f1, const Vec3& k1, const Vec3& f2, const Vec3& k2);

// Displayed closed forms, zeta = theta + pi/2.
Vec3 closed_form_f3_abd(const PpnBody& body, const MziGeometry& geom);
Vec3 closed_form_f3_acd(const PpnBody& body, const MziGeometry& geom);
double closed_form_overlap(const PpnBody& body, const MziGeometry& geom);

// Four-dimensional parallel transport along the oracle geodesic; f is
// normalized to unit norm against the metric at the start.
OracleResult oracle_parallel_transport(const StationaryMetric& metric, const NullRay& ray,
                                       const Termination& termination, const Vec3& f_initial,
                                       const OracleOptions& opt = {});

// Oracle counterpart of transport_arm. The first segment starts at A along the
// nominal direction; the second continues from the actual arrival point with
// the specularly reflected direction. Mirrors use normal0; segments end on the
// plane through the nominal corner. Returns the gauge-fixed spatial
// polarization at D (not normalized).
struct OracleArm {
    Vec3 f_end = Vec3::Zero();
    Vec3 f_base = Vec3::Zero();  // f_initial carried through the mirrors
    Vec3 f_dev = Vec3::Zero();   // f_end - f_base at full precision
    double max_transversality = 0.0;
    double max_norm_drift = 0.0;
    double max_killing_drift = 0.0;
    double max_null_violation = 0.0;
};
OracleArm oracle_arm_polarization(const StationaryMetric& metric, const PpnBody& body, const MziGeometry& geom,
                                  Arm arm, const Vec3& f_initial, const OracleOptions& opt = {});

// A -> B -> D -> C -> A with a fourth mirror at A turning the ray back onto AB.
OracleArm oracle_closed_loop(const StationaryMetric& metric, const MziGeometry& geom, const Vec3& f_initial,
                             const OracleOptions& opt = {});

}  // namespace pnmzi
