#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace pnmzi {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kPi = 3.14159265358979323846;

// CODATA 2018 SI values.
struct PhysicalConstants {
    double c = 299792458.0;
    double G = 6.67430e-11;
    double hbar = 1.054571817e-34;
};

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class UnsupportedOrientation : public DomainError {
public:
    using DomainError::DomainError;
};

class DegenerateGauge : public DomainError {
public:
    using DomainError::DomainError;
};

class IntegrationFailure : public std::runtime_error {
public:
    IntegrationFailure(const std::string& what, double t, std::vector<double> state)
        : std::runtime_error(what), last_t(t), last_state(std::move(state)) {}
    double last_t;
    std::vector<double> last_state;
};

class OracleInvalid : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pnmzi
