#pragma once

#include "pnmzi/polarization.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pnmzi {

using Json = nlohmann::ordered_json;

enum class ScenarioKind { PhaseCoordinates, PhaseLengths, Polarization, Budget, Sagnac, Validate };
const char* to_string(ScenarioKind kind);

struct SweepSpec {
    std::string parameter;  // zeta theta h q b alpha gamma wavelength
    double start = 0.0;
    double stop = 0.0;
    std::size_t steps = 0;
    bool endpoint = true;

    std::vector<double> values() const;
};

struct Tolerances {
    double oracle_rel = 1e-12;   // oracle integrator
    double ppn_rel = 1e-10;      // PPN ODEs
    double shapiro = 1e-6;
    double constraint = 1e-10;   // null, Killing, transversality, norm
    double gauge_angle = 1e-10;  // rad
    double closed_loop = 1e-9;
    double order3 = 1e-3;
    double identity = 1e-12;     // star product, Wigner
    double involution = 1e-15;
    double finite_difference = 1e-6;
    double quadrature = 1e-8;
};

struct ScenarioConfig {
    std::string name = "custom";
    ScenarioKind kind = ScenarioKind::PhaseCoordinates;
    PpnBody body = PpnBody::earth();
    MziGeometry geometry{};
    bool horizontal = false;  // zeta follows theta + pi/2
    double wavelength = 800e-9;
    StationState ground{};
    StationState satellite{};
    double sagnac_area = 2.4e9;
    double sagnac_zeta = 0.0;
    double c_lt = 1.0;
    double c_g = 1.0;
    std::size_t theta_samples = 360;
    std::optional<SweepSpec> sweep;
    std::string output_dir;
    std::string format = "json";
    bool timing = false;
    std::size_t threads = 0;
    Tolerances tolerances{};

    double omega_inf() const { return 2.0 * kPi * body.constants.c / wavelength; }
    MziGeometry effective_geometry() const;
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> v);
    std::vector<std::string> violations;
};

ScenarioConfig parse_config(const Json& j);
ScenarioConfig load_config(const std::string& path);
Json to_json(const ScenarioConfig& cfg);
std::vector<std::string> validate_config(const ScenarioConfig& cfg);

std::vector<std::string> preset_names();
ScenarioConfig preset(const std::string& name);

struct Residual {
    std::string scenario;
    double value = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string note;
};

struct RunRecord {
    Json config;
    Json outputs;
    std::vector<Residual> residuals;
    std::vector<std::string> sweep_columns;
    std::vector<std::vector<double>> sweep_rows;
    std::vector<std::pair<std::string, std::string>> attachments;  // suffix, CSV text
    double wall_clock_s = 0.0;
    std::string version;

    bool passed() const;
};

RunRecord run_scenario(const ScenarioConfig& cfg);
RunRecord run_sweep(const ScenarioConfig& cfg);
RunRecord validate_suite(const ScenarioConfig& cfg);

// Scalar outputs of a single run, flattened in record order.
std::vector<std::pair<std::string, double>> scalar_outputs(const Json& outputs);

std::string format_double(double v);
std::string to_json_text(const RunRecord& rec, bool timing = false);
std::string to_csv_text(const RunRecord& rec);
std::string emit(const RunRecord& rec, const std::string& format, const std::string& dir, const std::string& stem,
                 bool timing = false);

std::string polarization_trace_csv(const ArmTransport& abd, const ArmTransport& acd, double c);

}  // namespace pnmzi
