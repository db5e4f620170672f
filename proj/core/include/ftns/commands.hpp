// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ftns/config.hpp"
#include "ftns/experiment.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ftns {

enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 2,
    kExitNumeric = 3,
    kExitIo = 4,
};

struct CommandContext {
    std::filesystem::path out_dir;  // empty: use output.directory
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
};

int cmd_run(const ExperimentConfig& cfg, SystemKind system, const CommandContext& ctx);

/// ESC against `reference` on the same grid; writes both CSVs plus
/// <prefix>_gap.csv and prints the sup gap.
int cmd_compare(const ExperimentConfig& cfg, SystemKind reference,
                const CommandContext& ctx);

int cmd_sweep(const ExperimentConfig& cfg, const std::string& param,
              const std::vector<double>& values, SystemKind system,
              const CommandContext& ctx);

int cmd_validate(const ExperimentConfig& cfg, const CommandContext& ctx);

/// Comma-separated numbers; empty string gives an empty list.
std::vector<double> parse_value_list(const std::string& csv);


}  // namespace ftns
