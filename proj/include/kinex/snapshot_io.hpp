#pragma once

// CSV persistence for population snapshots and particle states. Values are
// written with 17 significant digits so a read-back reproduces every double
// bit-exactly.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "kinex/fokker_planck.hpp"
#include "kinex/trade.hpp"

namespace kinex {

// File-level failures (open/parse/write); distinct from simulation errors so
// callers can map them to a dedicated exit status.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// %.{precision}g rendering; 17 significant digits round-trip doubles bit-exactly.
std::string format_double(double v, int precision = 17);

// Schema: header "t,agent_id,x,y", one row per agent in index order.
void write_agent_snapshot(const std::filesystem::path& file, double time,
                          const std::vector<AgentState>& agents, int precision = 17);

struct AgentSnapshot {
    double time = 0.0;
    std::vector<AgentState> agents;
};
AgentSnapshot read_agent_snapshot(const std::filesystem::path& file);

// Schema: header "tau,particle_id,v,w", one row per particle in index order.
void write_particle_snapshot(const std::filesystem::path& file, double tau,
                             const std::vector<VWParticle>& particles, int precision = 17);

struct ParticleSnapshot {
    double tau = 0.0;
    std::vector<VWParticle> particles;
};
ParticleSnapshot read_particle_snapshot(const std::filesystem::path& file);

// Generic numeric table with a header row, used for moment trajectories and
// sweep summaries.
void write_csv_table(const std::filesystem::path& file, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows, int precision = 17);

}  // namespace kinex
