#ifndef INCOMPAT_IO_HPP
#define INCOMPAT_IO_HPP

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "incompat/analytic_families.hpp"
#include "incompat/errors.hpp"
#include "incompat/observable.hpp"
#include "incompat/optimizer.hpp"

namespace incompat {

/// A double rendered with 17 significant digits, enough to reparse the exact
/// bit pattern.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

inline std::string format_vector(const BlochVector& v) {
    return "(" + format_double(v.x) + ", " + format_double(v.y) + ", " + format_double(v.z) + ")";
}

/// Parses a triplet specification document:
///   { "observables": [ { "bias": 0.0, "bloch": [x, y, z] }, ... three ... ] }
/// Each entry must describe a valid observable.
inline Triplet parse_triplet_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid triplet file: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("observables") || !doc["observables"].is_array() ||
        doc["observables"].size() != 3) {
        throw ParseError("triplet file must contain an \"observables\" array of exactly three entries");
    }
    Triplet t;
    for (int j = 0; j < 3; ++j) {
        const auto& entry = doc["observables"][static_cast<std::size_t>(j)];
        if (!entry.is_object() || !entry.contains("bias") || !entry.contains("bloch") ||
            !entry["bias"].is_number() || !entry["bloch"].is_array() || entry["bloch"].size() != 3 ||
            !entry["bloch"][0].is_number() || !entry["bloch"][1].is_number() ||
            !entry["bloch"][2].is_number()) {
            throw ParseError("each observable needs a numeric \"bias\" and a three-element \"bloch\" array");
        }
        t[j] = make_observable(entry["bias"].get<double>(),
                               BlochVector{entry["bloch"][0].get<double>(), entry["bloch"][1].get<double>(),
                                           entry["bloch"][2].get<double>()});
    }
    return t;
}

inline Triplet load_triplet(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open triplet file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_triplet_json(buf.str());
}

/// Serializes a triplet with full 17-digit precision; reparsing yields the
/// identical values.
inline std::string serialize_triplet(const Triplet& t) {
    std::ostringstream out;
    out << "{\n  \"observables\": [\n";
    for (int j = 0; j < 3; ++j) {
        out << "    { \"bias\": " << format_double(t[j].bias) << ", \"bloch\": ["
            << format_double(t[j].bloch.x) << ", " << format_double(t[j].bloch.y) << ", "
            << format_double(t[j].bloch.z) << "] }" << (j < 2 ? "," : "") << "\n";
    }
    out << "  ]\n}\n";
    return out.str();
}

inline void save_triplet(const Triplet& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write triplet file: " + path);
    out << serialize_triplet(t);
}

enum class SweepFamily { perp, y };

inline SweepFamily parse_family(const std::string& name) {
    if (name == "perp") return SweepFamily::perp;
    if (name == "y") return SweepFamily::y;
    throw OutOfRange("family must be 'perp' or 'y'");
}

/// One sample of an incompatibility sweep of a symmetric family.
struct SweepRow {
    double parameter_deg = 0.0;
    double analytic = 0.0;
    double numeric = 0.0;
    std::string regime;
    double bound_2delta = 0.0;
    bool saturable = false;
};

/// Evaluates a family sweep: the analytic value, the numerical optimizer
/// value with a fixed seed, the theoretical lower bound and its
/// attainability. Angles are taken in degrees.
inline std::vector<SweepRow> run_sweep(SweepFamily family, double start_deg, double stop_deg,
                                       int steps, const OptimizerOptions& opts = {}) {
    if (steps < 1) throw OutOfRange("steps must be at least 1");
    std::vector<SweepRow> rows;
    rows.reserve(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        const double deg = steps == 1 ? start_deg
                                      : start_deg + (stop_deg - start_deg) * static_cast<double>(i) /
                                            static_cast<double>(steps - 1);
        const double rad = deg * kPi / 180.0;
        SweepRow row;
        row.parameter_deg = deg;
        Triplet targets;
        if (family == SweepFamily::perp) {
            const PerpSolution sol = delta_perp(rad);
            row.analytic = sol.value;
            row.regime = to_string(sol.regime);
            targets = perp_triplet(rad);
        } else {
            const YSolution sol = delta_y(rad);
            row.analytic = sol.value;
            row.regime = to_string(sol.regime);
            targets = y_triplet(rad);
        }
        const MURReport bound = mur_lower_bound(targets);
        row.bound_2delta = 2.0 * bound.delta;
        row.saturable = bound.saturable;
        row.numeric = incompatibility(targets, opts).delta_num;
        rows.push_back(row);
    }
    return rows;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
    out << "parameter_deg,analytic,numeric,regime,bound_2delta,saturable\n";
    for (const auto& r : rows) {
        out << format_double(r.parameter_deg) << "," << format_double(r.analytic) << ","
            << format_double(r.numeric) << "," << r.regime << "," << format_double(r.bound_2delta)
            << "," << (r.saturable ? 1 : 0) << "\n";
    }
}

inline void save_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write sweep file: " + path);
    write_sweep_csv(rows, out);
}

}  // namespace incompat

#endif  // INCOMPAT_IO_HPP
