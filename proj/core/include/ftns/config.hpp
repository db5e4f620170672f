// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ftns/controller.hpp"
#include "ftns/dither.hpp"
#include "ftns/flows.hpp"
#include "ftns/plant.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ftns {

/// Every problem found while reading or checking a config, each prefixed
/// with its section.key location.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(std::vector<std::string> errors);

    const std::vector<std::string>& errors() const { return errors_; }

  private:
    std::vector<std::string> errors_;
};

struct CostSection {
    std::string kind;  // "quadratic" | "polynomial"
    std::vector<double> hstar;  // vec_sym order
    std::vector<double> xstar;
    double ystar = 0;
    int dim = 0;
    std::vector<PolyTerm> terms;
};

struct DitherSection {
    double a = 0;
    std::vector<double> omegas;
    std::optional<double> offdiag_scale;
};

struct FlowSection {
    double q1 = 0, q2 = 0, c1 = 0, c2 = 0;
    std::optional<double> sing_eps;
};

struct SimSection {
    double t_end = 0;
    std::optional<double> dt;
    std::vector<double> x0, v0, xi0;
    double settle_tol = 0;
    std::optional<std::vector<double>> settle_target;
    int substeps = 16;
    int record_stride = 1;
    bool hessian_floor = false;
    AveragingMode averaging = AveragingMode::kArgument;
};

struct OutputSection {
    std::string directory = ".";
    std::string prefix = "run";
};

/// Parsed experiment description. Raw values are kept so a sweep can
/// override one field and re-check; the builders construct validated
/// library objects.
struct ExperimentConfig {
    std::string source_path;
    std::string source_text;  // echoed verbatim into run metadata
    std::vector<std::string> overrides;  // "path = value" applied after parsing

    CostSection cost;
    DitherSection dither;
    FlowSection flow;
    GainSet gains;
    SimSection sim;
    OutputSection output;

    CostModel model() const;
    DitherSpec dither_spec() const;
    FlowParams flow_params() const;
    EscState initial_state() const;
    HessianFloor hessian_floor() const;

    int dim() const;
    /// sim.dt if given, else common_period / 64.
    double record_dt() const;

    /// All consistency problems, empty when usable.
    std::vector<std::string> check() const;
};

/// Reads and validates a config file. Throws ConfigError (all problems) or
/// std::ios_base::failure when the file cannot be read.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& source_name = "<string>");

/// Sets a scalar at `section.key` or a vector component at `section.key[i]`
/// (0-based) and re-validates. Throws ConfigError.
void set_param(ExperimentConfig& cfg, const std::string& path, double value);

}  // namespace ftns
