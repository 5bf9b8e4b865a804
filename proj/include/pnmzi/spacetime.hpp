#pragma once

#include "pnmzi/core.hpp"

#include <array>
#include <memory>

namespace pnmzi {

// Gravitating body. J points along +z.
struct PpnBody {
    double gm = 0.0;         // m^3/s^2
    double j = 0.0;          // kg m^2/s
    double gamma_ppn = 1.0;
    double alpha_eep = 0.0;
    double omega_rot = 0.0;  // rad/s
    double radius = 1.0;     // m
    PhysicalConstants constants{};

    double gravitational_radius() const { return 2.0 * gm / (constants.c * constants.c); }
    void validate() const;

    static PpnBody earth();
};

// 3+1 data of a stationary metric with x^0 = ct:
//   ds^2 = -h (dx^0 - g_m dx^m)^2 + gamma_mn dx^m dx^n
// Deviations from flat space are stored directly so that tiny terms keep full precision.
struct Metric3Plus1 {
    double h_dev = 0.0;              // h - 1
    Vec3 g_vec = Vec3::Zero();
    Mat3 gamma_dev = Mat3::Zero();   // gamma_mn - delta_mn

    double h_scalar() const { return 1.0 + h_dev; }
    Mat3 gamma_spatial() const { return Mat3::Identity() + gamma_dev; }
};

struct GravityFields {
    Vec3 e_g = Vec3::Zero();             // -grad h / 2h, 1/m
    Vec3 omega_gm = Vec3::Zero();        // -k0/2 curl g, exact for the truncated metric
    Vec3 omega_gm_order3 = Vec3::Zero(); // pure eps^3 part, -k0/4 curl R
};

// lambda[m](n, l)
using Christoffel3 = std::array<Mat3, 3>;

struct IsotropicFactors {
    double V = 1.0;
    double W = 1.0;
    double one_minus_V = 0.0;
    double W_minus_one = 0.0;
};

double newtonian_potential(const PpnBody& body, const Vec3& x);
Vec3 potential_gradient(const PpnBody& body, const Vec3& x);
// R = -2(1+gamma)(G/c^3)(J x x)/r^3, the g0i = R_i/2 cross term.
Vec3 frame_dragging_vector(const PpnBody& body, const Vec3& x);

Metric3Plus1 metric_ppn(const PpnBody& body, const Vec3& x);
Metric3Plus1 metric_schwarzschild_isotropic(const PpnBody& body, const Vec3& x);
IsotropicFactors isotropic_factors(const PpnBody& body, double r);
Metric3Plus1 metric_comoving(const PpnBody& body, const Vec3& x);

GravityFields gravity_fields(const PpnBody& body, const Vec3& x, double k0);
Christoffel3 christoffel_spatial_order2(const PpnBody& body, const Vec3& x);

// Ratio of the radial gradients of the potential and centrifugal redshift terms
// in the comoving frame.
double comoving_redshift_ratio(const PpnBody& body, const Vec3& x);

// Exact stationary metric in the form used by the geodesic oracle:
//   g00 = -(1 + h_dev), g0i = R_i/2, gij = (1 + w_dev) delta_ij
struct MetricSample {
    double h_dev = 0.0;
    Vec3 grad_h_dev = Vec3::Zero();
    double w_dev = 0.0;
    Vec3 grad_w_dev = Vec3::Zero();
    Vec3 r_vec = Vec3::Zero();
    Mat3 r_jacobian = Mat3::Zero();  // (i, k) = d R_i / d x_k
};

class StationaryMetric {
public:
    virtual ~StationaryMetric() = default;
    virtual MetricSample sample(const Vec3& x) const = 0;
    virtual std::string name() const = 0;
};

class FlatMetric final : public StationaryMetric {
public:
    MetricSample sample(const Vec3&) const override { return {}; }
    std::string name() const override { return "flat"; }
};

// Non-truncated isotropic Schwarzschild: V = (1-u)/(1+u), W = (1+u)^2, u = r_g/4r.
class IsotropicSchwarzschildMetric final : public StationaryMetric {
public:
    explicit IsotropicSchwarzschildMetric(const PpnBody& body) : body_(body) {}
    MetricSample sample(const Vec3& x) const override;
    std::string name() const override { return "schwarzschild-isotropic"; }

private:
    PpnBody body_;
};

// The PPN far-field metric of a slowly rotating body, taken at face value.
class PpnMetric final : public StationaryMetric {
public:
    explicit PpnMetric(const PpnBody& body) : body_(body) {}
    MetricSample sample(const Vec3& x) const override;
    std::string name() const override { return "ppn"; }

private:
    PpnBody body_;
};

Metric3Plus1 to_3plus1(const MetricSample& s);

}  // namespace pnmzi
