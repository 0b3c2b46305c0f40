#pragma once

// Persistence: CSV tables, JSON result envelopes, and complex fields as flat
// binary (interleaved re/im doubles, native little-endian) with a JSON
// header next to them at <path>.json.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "glzero/domain.hpp"
#include "glzero/error.hpp"

namespace glzero::io {

using json = nlohmann::json;
using lattice::cplx;
using lattice::Field;

inline constexpr int schema_version = 1;

/// Shortest text that reads back to the same double.
inline std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    for (int prec = 6; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

/// Table with a header row. Lines starting with '#' are comments; the writer
/// emits one comment line with the provenance (command and seed).
struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string comment;

    std::size_t column(const std::string& name) const {
        for (std::size_t k = 0; k < header.size(); ++k)
            if (header[k] == name) return k;
        throw ValidationError("csv: missing column '" + name + "'");
    }

    void add(std::vector<std::string> row) {
        require(row.size() == header.size(), "csv: row width does not match header");
        rows.push_back(std::move(row));
    }

    /// Column parsed as doubles.
    std::vector<double> numbers(const std::string& name) const {
        const std::size_t c = column(name);
        std::vector<double> out;
        for (const auto& r : rows) {
            const std::string& s = r[c];
            char* end = nullptr;
            const double v = std::strtod(s.c_str(), &end);
            if (s.empty() || end != s.c_str() + s.size()) throw ValidationError("csv: not a number in column '" + name + "': " + s);
            out.push_back(v);
        }
        return out;
    }
};

inline std::string to_string(const Csv& t) {
    std::ostringstream os;
    if (!t.comment.empty()) os << "# " << t.comment << '\n';
    for (std::size_t k = 0; k < t.header.size(); ++k) os << (k ? "," : "") << t.header[k];
    os << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << r[k];
        os << '\n';
    }
    return os.str();
}

inline Csv parse_csv(const std::string& text) {
    Csv t;
    std::istringstream is(text);
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ls(s);
        while (std::getline(ls, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            std::size_t a = 0;
            while (a < cell.size() && cell[a] == ' ') ++a;
            out.push_back(cell.substr(a));
        }
        if (!s.empty() && s.back() == ',') out.emplace_back();
        return out;
    };
    bool have_header = false;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (!have_header && t.comment.empty()) t.comment = line.size() > 2 ? line.substr(2) : "";
            continue;
        }
        if (!have_header) {
            t.header = split(line);
            have_header = true;
        } else {
            auto r = split(line);
            if (r.size() != t.header.size())
                throw ValidationError("csv: row has " + std::to_string(r.size()) + " cells, header has " +
                                      std::to_string(t.header.size()));
            t.rows.push_back(std::move(r));
        }
    }
    if (!have_header) throw ValidationError("csv: no header row");
    return t;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + path);
    out << text;
    if (!out) throw ValidationError("write failed: " + path);
}

inline Csv read_csv(const std::string& path) { return parse_csv(read_text(path)); }
inline void write_csv(const std::string& path, const Csv& t) { write_text(path, to_string(t)); }

/// Checks that the header is exactly `cols`.
inline void expect_schema(const Csv& t, const std::vector<std::string>& cols, const std::string& what) {
    if (t.header != cols) {
        std::string want;
        for (const auto& c : cols) want += (want.empty() ? "" : ",") + c;
        throw ValidationError(what + ": expected columns " + want);
    }
}

/// Result file: schema version, config echo (including the seed), optional
/// timings, and the module payload.
struct Envelope {
    int schema = schema_version;
    std::string command;
    json config = json::object();
    std::optional<json> timings;
    json payload = json::object();

    bool operator==(const Envelope&) const = default;
};

inline json to_json(const Envelope& e) {
    json j;
    j["schema"] = e.schema;
    j["command"] = e.command;
    j["config"] = e.config;
    if (e.timings) j["timings"] = *e.timings;
    j["payload"] = e.payload;
    return j;
}

inline Envelope envelope_from_json(const json& j) {
    try {
        Envelope e;
        e.schema = j.at("schema").get<int>();
        if (e.schema != schema_version) throw ValidationError("envelope: unsupported schema " + std::to_string(e.schema));
        e.command = j.at("command").get<std::string>();
        e.config = j.at("config");
        if (j.contains("timings")) e.timings = j.at("timings");
        e.payload = j.at("payload");
        return e;
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("envelope: ") + ex.what());
    }
}

inline std::string serialize(const Envelope& e) { return to_json(e).dump(2) + "\n"; }

inline json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& ex) {
        throw ValidationError(what + ": " + ex.what());
    }
}

inline Envelope parse_envelope(const std::string& text) { return envelope_from_json(parse_json(text, "envelope")); }

inline void write_envelope(const std::string& path, const Envelope& e) { write_text(path, serialize(e)); }
inline Envelope read_envelope(const std::string& path) { return parse_envelope(read_text(path)); }

// Fields ---------------------------------------------------------------------

inline std::string header_path(const std::string& bin) { return bin + ".json"; }

/// Writes `values` (interleaved re/im of `field`, then `extra` reals) and the
/// header with the layout added.
inline void write_field(const std::string& path, const Field& field, json header,
                        const std::vector<double>& extra = {}) {
    std::vector<double> buf;
    buf.reserve(2 * field.size() + extra.size());
    for (const cplx& z : field) {
        buf.push_back(z.real());
        buf.push_back(z.imag());
    }
    buf.insert(buf.end(), extra.begin(), extra.end());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(double)));
    if (!out) throw ValidationError("write failed: " + path);
    header["format"] = "f64le interleaved re,im";
    header["complex_count"] = field.size();
    header["extra_count"] = extra.size();
    write_text(header_path(path), header.dump(2) + "\n");
}

struct FieldFile {
    json header;
    Field field;
    std::vector<double> extra;
};

inline FieldFile read_field(const std::string& path) {
    FieldFile f;
    f.header = parse_json(read_text(header_path(path)), "field header");
    std::size_t nc = 0, ne = 0;
    try {
        nc = f.header.at("complex_count").get<std::size_t>();
        ne = f.header.at("extra_count").get<std::size_t>();
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("field header: ") + ex.what());
    }
    const std::string bytes = read_text(path);
    if (bytes.size() != (2 * nc + ne) * sizeof(double))
        throw ValidationError("field " + path + ": size does not match its header");
    std::vector<double> buf(2 * nc + ne);
    std::memcpy(buf.data(), bytes.data(), bytes.size());
    f.field.resize(nc);
    for (std::size_t k = 0; k < nc; ++k) f.field[k] = cplx(buf[2 * k], buf[2 * k + 1]);
    f.extra.assign(buf.begin() + static_cast<std::ptrdiff_t>(2 * nc), buf.end());
    return f;
}

// Domain problems and states -------------------------------------------------

inline json geometry_json(const domain::Geometry& g) {
    if (g.kind == domain::Geometry::Kind::Disc) return {{"kind", "disc"}, {"cx", g.cx}, {"cy", g.cy}, {"radius", g.radius}};
    return {{"kind", "rect"}, {"x0", g.x0}, {"y0", g.y0}, {"x1", g.x1}, {"y1", g.y1}};
}

inline domain::Geometry geometry_from_json(const json& j) {
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "disc")
            return domain::Geometry::disc(j.at("radius").get<double>(), j.value("cx", 0.0), j.value("cy", 0.0));
        if (kind == "rect")
            return domain::Geometry::rectangle(j.at("x0").get<double>(), j.at("y0").get<double>(), j.at("x1").get<double>(),
                                               j.at("y1").get<double>());
        throw ValidationError("geometry: unknown kind '" + kind + "' (disc | rect)");
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("geometry: ") + ex.what());
    }
}

/// Everything needed to rebuild a DomainProblem.
struct ProblemSpec {
    domain::Geometry geometry;
    std::string B0;
    double kappa = 0.0;
    double H = 0.0;
    domain::ProblemOptions options;

    domain::DomainProblem build() const { return domain::build_problem(geometry, B0, kappa, H, options); }
};

inline json to_json(const ProblemSpec& s) {
    return {{"geometry", geometry_json(s.geometry)}, {"B0", s.B0},          {"kappa", s.kappa},
            {"H", s.H},                            {"h", s.options.h}, {"subsample", s.options.subsample}};
}

inline ProblemSpec problem_from_json(const json& j) {
    try {
        ProblemSpec s;
        s.geometry = geometry_from_json(j.at("geometry"));
        s.B0 = j.at("B0").get<std::string>();
        s.kappa = j.at("kappa").get<double>();
        s.H = j.at("H").get<double>();
        s.options.h = j.value("h", 0.0);
        s.options.subsample = j.value("subsample", std::size_t{8});
        return s;
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("problem: ") + ex.what());
    }
}

inline ProblemSpec read_problem(const std::string& path) { return problem_from_json(parse_json(read_text(path), path)); }

/// psi in the binary, delta appended in full mode.
inline void write_state(const std::string& path, const domain::DomainProblem& p, const domain::GLState& s,
                        const ProblemSpec& spec, std::uint64_t seed) {
    json h = {{"kind", "domain_state"},
              {"nx", p.grid.nx},
              {"ny", p.grid.ny},
              {"x0", p.grid.x0},
              {"y0", p.grid.y0},
              {"hx", p.grid.hx()},
              {"hy", p.grid.hy()},
              {"mode", s.mode == domain::Mode::Full ? "full" : "fixed"},
              {"converged", s.converged},
              {"collapsed", s.collapsed},
              {"energy", s.energy_total},
              {"seed", seed},
              {"problem", to_json(spec)}};
    write_field(path, s.psi, h, s.mode == domain::Mode::Full ? s.delta : std::vector<double>{});
}

/// Reads a state and recomputes its energy parts and residuals on `p`.
inline domain::GLState read_state(const std::string& path, const domain::DomainProblem& p) {
    const FieldFile f = read_field(path);
    domain::GLState s;
    try {
        if (f.header.at("nx").get<std::size_t>() != p.grid.nx || f.header.at("ny").get<std::size_t>() != p.grid.ny)
            throw ValidationError("state " + path + ": grid does not match the problem");
        s.mode = f.header.at("mode").get<std::string>() == "full" ? domain::Mode::Full : domain::Mode::Fixed;
        s.converged = f.header.at("converged").get<bool>();
        s.collapsed = f.header.at("collapsed").get<bool>();
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("state header: ") + ex.what());
    }
    s.psi = f.field;
    lattice::check_shape(p.lat, s.psi, "read_state");
    if (s.mode == domain::Mode::Full) {
        require(f.extra.size() == p.grid_edges(), "state " + path + ": delta size does not match the problem");
        s.delta = f.extra;
    }
    domain::finish_state(p, s);
    return s;
}

} // namespace glzero::io
