// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ftns/config.hpp"
#include "ftns/sim.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace ftns {

enum class SystemKind { kEsc, kTarget, kAveraged };

std::string to_string(SystemKind kind);
/// "esc" | "target" | "averaged"; throws ParameterError otherwise.
SystemKind parse_system(const std::string& name);

/// Channels recorded with every trajectory, in CSV order.
const std::vector<std::string>& monitor_names();

struct RunResult {
    SystemKind system;
    Trajectory trajectory;
    double dt_record = 0;
    double dt_step = 0;
    double wall_seconds = 0;
};

SimConfig sim_config(const ExperimentConfig& cfg, SystemKind kind);

/// Integrates one system; the ESC steps at record_dt, target and averaged at
/// record_dt / substeps, all recorded on the same grid.
RunResult run_system(const ExperimentConfig& cfg, SystemKind kind);

/// Header plus one row per sample: t, x1..xn, v1..vn, xi1..xim, y, V1, V2,
/// V3, err_x, err_xi. Missing values are written as `nan`; numbers carry
/// 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& tr);
void write_gap_csv(std::ostream& os, const Trajectory& a, const std::vector<double>& gap);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void write_meta(std::ostream& os, const ExperimentConfig& cfg, const RunResult& run);

/// Final |x - target| with target = sim.settle_target or x*.
double final_error(const ExperimentConfig& cfg, const Trajectory& tr);
std::optional<Eigen::VectorXd> settle_target(const ExperimentConfig& cfg);

}  // namespace ftns
