#include "kinex/snapshot_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kinex {

namespace {

[[noreturn]] void fail(const std::filesystem::path& file, const std::string& what) {
    throw IoError(file.string() + ": " + what);
}

double parse_double(const std::string& token, const std::filesystem::path& file, std::size_t line) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0' || errno == ERANGE) {
        fail(file, "line " + std::to_string(line) + ": bad numeric field '" + token + "'");
    }
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::ofstream open_out(const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);  // binary: LF line endings everywhere
    if (!out) fail(file, "cannot open for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) fail(file, "cannot open for reading");
    return in;
}

}  // namespace

std::string format_double(double v, int precision) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

void write_agent_snapshot(const std::filesystem::path& file, double time,
                          const std::vector<AgentState>& agents, int precision) {
    auto out = open_out(file);
    out << "t,agent_id,x,y\n";
    const std::string t = format_double(time, precision);
    for (std::size_t i = 0; i < agents.size(); ++i) {
        out << t << ',' << i << ',' << format_double(agents[i].x, precision) << ','
            << format_double(agents[i].y, precision) << '\n';
    }
    if (!out) fail(file, "write failed");
}

AgentSnapshot read_agent_snapshot(const std::filesystem::path& file) {
    auto in = open_in(file);
    std::string line;
    if (!std::getline(in, line) || line != "t,agent_id,x,y") {
        fail(file, "missing or wrong header (expected t,agent_id,x,y)");
    }
    AgentSnapshot snap;
    std::size_t lineno = 1;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 4) {
            fail(file, "line " + std::to_string(lineno) + ": expected 4 fields, got " +
                           std::to_string(fields.size()));
        }
        const double t = parse_double(fields[0], file, lineno);
        if (first) {
            snap.time = t;
            first = false;
        }
        const auto id = static_cast<std::size_t>(
            std::strtoull(fields[1].c_str(), nullptr, 10));
        if (id != snap.agents.size()) {
            fail(file, "line " + std::to_string(lineno) + ": non-contiguous agent_id");
        }
        snap.agents.push_back(
            {parse_double(fields[2], file, lineno), parse_double(fields[3], file, lineno)});
    }
    return snap;
}

void write_particle_snapshot(const std::filesystem::path& file, double tau,
                             const std::vector<VWParticle>& particles, int precision) {
    auto out = open_out(file);
    out << "tau,particle_id,v,w\n";
    const std::string t = format_double(tau, precision);
    for (std::size_t i = 0; i < particles.size(); ++i) {
        out << t << ',' << i << ',' << format_double(particles[i].v, precision) << ','
            << format_double(particles[i].w, precision) << '\n';
    }
    if (!out) fail(file, "write failed");
}

ParticleSnapshot read_particle_snapshot(const std::filesystem::path& file) {
    auto in = open_in(file);
    std::string line;
    if (!std::getline(in, line) || line != "tau,particle_id,v,w") {
        fail(file, "missing or wrong header (expected tau,particle_id,v,w)");
    }
    ParticleSnapshot snap;
    std::size_t lineno = 1;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 4) {
            fail(file, "line " + std::to_string(lineno) + ": expected 4 fields, got " +
                           std::to_string(fields.size()));
        }
        const double t = parse_double(fields[0], file, lineno);
        if (first) {
            snap.tau = t;
            first = false;
        }
        const auto id = static_cast<std::size_t>(
            std::strtoull(fields[1].c_str(), nullptr, 10));
        if (id != snap.particles.size()) {
            fail(file, "line " + std::to_string(lineno) + ": non-contiguous particle_id");
        }
        snap.particles.push_back(
            {parse_double(fields[2], file, lineno), parse_double(fields[3], file, lineno)});
    }
    return snap;
}

void write_csv_table(const std::filesystem::path& file, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows, int precision) {
    auto out = open_out(file);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << header[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size()) fail(file, "row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << format_double(row[i], precision);
        }
        out << '\n';
    }
    if (!out) fail(file, "write failed");
}

}  // namespace kinex
