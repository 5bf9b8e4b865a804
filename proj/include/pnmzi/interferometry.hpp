#pragma once

#include "pnmzi/rays.hpp"

#include <string>
#include <vector>

namespace pnmzi {

struct Corners {
    Vec3 a, b, c, d;
};

// Interferometer in the xz plane. A = b (sin theta, 0, cos theta),
// AB and CD along (sin zeta, 0, cos zeta) with length q, AC and BD along
// (-cos zeta, 0, sin zeta) with length h.
struct MziGeometry {
    double b = 6.371e6;
    double theta = 0.0;
    double zeta = kPi / 2.0;
    double q = 6e3;
    double h = 4e5;

    Vec3 n_ab() const;
    Vec3 n_ac() const;
    Corners corners() const;
    // Throws on hard violations; returns soft warnings.
    std::vector<std::string> validate() const;

    static MziGeometry horizontal(double b, double theta, double q, double h);
};

enum class PhaseConvention { EqualCoordinates, EqualProperLengths };
const char* to_string(PhaseConvention c);

struct PhaseTerm {
    std::string name;
    double delta_t = 0.0;  // s
};

struct PhaseResult {
    PhaseConvention convention = PhaseConvention::EqualCoordinates;
    double omega_inf = 0.0;
    double delta_t = 0.0;    // s, sum of breakdown
    double delta_psi = 0.0;  // omega_inf * delta_t
    std::vector<PhaseTerm> breakdown;
    double leading_delta_t = 0.0;  // closed form
    double leading_delta_psi = 0.0;
    double site_gravity = 0.0;     // GM/b^2
    double neglected_delta_t = 0.0;  // equal lengths: t_BD' - t_AC, not included
    double cd_extension = 0.0;       // equal lengths: q' - q, m
    std::vector<std::string> warnings;
};

double cow_neutron_phase(double mass, double lambda_db, double v, double area, double delta, double g);
// m^2 g A lambda sin(delta) / (2 pi hbar^2); equals cow_neutron_phase when lambda = 2 pi hbar / (m v)
double cow_neutron_phase_mass_form(double mass, double lambda_db, double area, double delta, double g,
                                   double hbar = PhysicalConstants{}.hbar);
double cow_optical_estimate(double lambda_opt, double g, double h, double q,
                            double c = PhysicalConstants{}.c);

PhaseResult phase_equal_coordinates(const PpnBody& body, const MziGeometry& geom, double omega_inf);
PhaseResult phase_equal_lengths(const PpnBody& body, const MziGeometry& geom, double omega_inf);

struct ProperTimePhase {
    double delta_tau = 0.0;
    double delta_psi_local = 0.0;
    double omega_local = 0.0;
};
ProperTimePhase proper_time_phase(const PpnBody& body, const Vec3& x_observer, double delta_t, double omega_inf);

struct StationState {
    Vec3 x = Vec3::Zero();
    Vec3 v = Vec3::Zero();
};

struct FrequencyBudget {
    double redshift_term = 0.0;
    double time_dilation_term = 0.0;
    double doppler_term = 0.0;
    double total() const { return redshift_term + time_dilation_term + doppler_term; }
};

// Fractional shift of a signal sent from the ground to the satellite.
FrequencyBudget frequency_shift_budget(const PpnBody& body, const StationState& ground, const StationState& satellite);

double sagnac_phase(const Vec3& omega_rot, const Vec3& area, double lambda_opt, double c = PhysicalConstants{}.c);

struct SagnacSplit {
    double classical = 0.0;        // psi_S
    double post_newtonian = 0.0;   // psi_PN
    double omega_lt = 0.0;
    double omega_g = 0.0;
    double total() const { return classical + post_newtonian; }
};
SagnacSplit sagnac_phase_ppn(const PpnBody& body, double area, double zeta, double lambda_opt,
                             double c_lt = 1.0, double c_g = 1.0);

double polarization_vs_sagnac_ratio(const MziGeometry& geom, double lambda_opt);

}  // namespace pnmzi
