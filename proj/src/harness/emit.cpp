#include "pnmzi/harness.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace pnmzi {

namespace {

void write_json(std::ostream& os, const Json& j, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            std::size_t i = 0;
            for (auto it = j.begin(); it != j.end(); ++it, ++i) {
                os << inner << Json(it.key()).dump() << ": ";
                write_json(os, it.value(), indent + 1);
                os << (i + 1 < j.size() ? ",\n" : "\n");
            }
            os << pad << "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            bool scalars = true;
            for (const auto& v : j) scalars = scalars && v.is_primitive();
            if (scalars && j.size() <= 4) {
                os << "[";
                for (std::size_t i = 0; i < j.size(); ++i) {
                    if (i) os << ", ";
                    write_json(os, j[i], indent + 1);
                }
                os << "]";
                return;
            }
            os << "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                os << inner;
                write_json(os, j[i], indent + 1);
                os << (i + 1 < j.size() ? ",\n" : "\n");
            }
            os << pad << "]";
            return;
        }
        case Json::value_t::number_float: {
            const double v = j.get<double>();
            if (std::isfinite(v)) os << format_double(v);
            else os << "null";
            return;
        }
        default: os << j.dump(); return;
    }
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return out + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    out.close();
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

std::string format_double(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    // keep a float marker so the value parses back as a double
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

std::string to_json_text(const RunRecord& rec, bool timing) {
    Json j;
    j["version"] = rec.version;
    j["config"] = rec.config;
    j["outputs"] = rec.outputs;
    if (!rec.residuals.empty()) {
        Json res = Json::array();
        for (const auto& r : rec.residuals)
            res.push_back({{"scenario", r.scenario}, {"value", r.value}, {"tolerance", r.tolerance},
                           {"passed", r.passed}, {"note", r.note}});
        j["residuals"] = res;
        j["passed"] = rec.passed();
    }
    if (timing) j["wall_clock_s"] = rec.wall_clock_s;
    std::ostringstream os;
    write_json(os, j, 0);
    os << '\n';
    return os.str();
}

std::string to_csv_text(const RunRecord& rec) {
    std::ostringstream os;
    if (!rec.sweep_columns.empty()) {
        for (std::size_t i = 0; i < rec.sweep_columns.size(); ++i)
            os << (i ? "," : "") << csv_field(rec.sweep_columns[i]);
        os << '\n';
        for (const auto& row : rec.sweep_rows) {
            for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
            os << '\n';
        }
        return os.str();
    }
    if (!rec.residuals.empty()) {
        os << "scenario,value,tolerance,passed,note\n";
        for (const auto& r : rec.residuals)
            os << csv_field(r.scenario) << ',' << format_double(r.value) << ',' << format_double(r.tolerance) << ','
               << (r.passed ? "true" : "false") << ',' << csv_field(r.note) << '\n';
        return os.str();
    }
    os << "quantity,value\n";
    for (const auto& [k, v] : scalar_outputs(rec.outputs)) os << csv_field(k) << ',' << format_double(v) << '\n';
    return os.str();
}

std::string emit(const RunRecord& rec, const std::string& format, const std::string& dir, const std::string& stem,
                 bool timing) {
    namespace fs = std::filesystem;
    if (format != "json" && format != "csv") throw ConfigError({"format: expected json or csv, got '" + format + "'"});
    const fs::path base(dir.empty() ? "." : dir);
    std::error_code ec;
    fs::create_directories(base, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + base.string() + ": " + ec.message());
    const fs::path main = base / (stem + "." + format);
    write_file(main, format == "json" ? to_json_text(rec, timing) : to_csv_text(rec));
    for (const auto& [suffix, text] : rec.attachments) write_file(base / (stem + "-" + suffix + ".csv"), text);
    return main.string();
}

std::string polarization_trace_csv(const ArmTransport& abd, const ArmTransport& acd, double c) {
    std::ostringstream os;
    os << "arm,s,t,x,y,z,f0x,f0y,f0z,f2x,f2y,f2z,f3x,f3y,f3z\n";
    for (const auto* a : {&abd, &acd}) {
        const char* name = a == &abd ? "ABD" : "ACD";
        for (const auto& s : a->trace) {
            os << name << ',' << format_double(s.s) << ',' << format_double(s.s / c);
            for (const Vec3* v : {&s.x, &s.f0, &s.f2, &s.f3})
                for (int i = 0; i < 3; ++i) os << ',' << format_double((*v)[i]);
            os << '\n';
        }
    }
    return os.str();
}

}  // namespace pnmzi
