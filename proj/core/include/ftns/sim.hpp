// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ftns {

using Rhs = std::function<void(double, const Eigen::Ref<const Eigen::VectorXd>&,
                               Eigen::Ref<Eigen::VectorXd>)>;

struct SimConfig {
    double t_end = 0;
    double dt = 0;
    int record_stride = 1;
    double settle_tol = 0.1;
    std::optional<Eigen::VectorXd> settle_target;
    // Overrides floor(t_end / dt); lets a refined run land on a coarser grid.
    std::optional<int> step_count;

    // Throws ParameterError.
    void validate() const;
    int steps() const;
};

/// Which slice of a packed state to compare: [x; v; xi].
enum class Component { kX, kV, kXi };

struct StateLayout {
    int n = 0;
    bool has_xi = false;

    int size() const;
    int offset(Component c) const;
    int length(Component c) const;
};

/// Named scalar channels evaluated at every recorded sample.
struct Monitors {
    std::vector<std::string> names;
    std::function<void(double, const Eigen::VectorXd&, std::span<double>)> eval;
};

struct Trajectory {
    StateLayout layout;
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::vector<std::string> channel_names;
    std::vector<std::vector<double>> channels;

    std::size_t size() const { return times.size(); }
    const std::vector<double>& channel(const std::string& name) const;
    Eigen::VectorXd slice(std::size_t i, Component c) const;
};

/// Raised when a state component becomes NaN or infinite.
class NumericAbort : public std::runtime_error {
  public:
    NumericAbort(double time, Eigen::VectorXd last_state);

    double time() const { return time_; }
    const Eigen::VectorXd& last_state() const { return last_state_; }

  private:
    double time_;
    Eigen::VectorXd last_state_;
};

/// One classical RK4 step of size dt from (t, y), written into y_next.
void rk4_step(const Rhs& rhs, double t, const Eigen::VectorXd& y, double dt,
              Eigen::VectorXd& y_next);

/// Fixed-step RK4 from t = 0 to cfg.t_end. Samples every record_stride steps
/// and at the final step. Step k sits at t = k * dt exactly, so two runs with
/// equal dt share a bit-identical time grid.
Trajectory integrate(const Rhs& rhs, const Eigen::VectorXd& y0, const SimConfig& cfg,
                     StateLayout layout, const Monitors& monitors = {});

/// Earliest recorded t after which |x(s) - target| <= tol for every recorded
/// s >= t.
std::optional<double> settling_time(const Trajectory& tr,
                                    const Eigen::Ref<const Eigen::VectorXd>& target,
                                    double tol);

/// Pointwise Euclidean distance; throws ShapeError on mismatched grids.
std::vector<double> gap_series(const Trajectory& a, const Trajectory& b,
                               Component c = Component::kX);
double sup_gap(const Trajectory& a, const Trajectory& b, Component c = Component::kX);

/// Index of the first sample i with series[i] > series[i-1] + tol*max(series[i-1], 1),
/// or nullopt if the series is non-increasing at that tolerance.
std::optional<std::size_t> first_increase(std::span<const double> series, double rel_tol);

/// Worst-case constant k7 in dV/dt <= -2^((2-a1)/2) k7 V^((2-a1)/2), estimated
/// from forward differences over samples with V > v_floor.
double fit_decay_constant(std::span<const double> times, std::span<const double> values,
                          double alpha1, double v_floor);

/// Settling-time bound V0^(a1/2) / (2^((2-a1)/2) k7 a1/2).
double finite_time_bound(double v0, double k7, double alpha1);

struct RunOutcome {
    std::optional<double> settling_time;
    double final_err = 0;
    std::optional<double> sup_gap;
};

struct SweepRow {
    double value = 0;
    std::optional<double> settling_time;
    double final_err = 0;
    std::optional<double> sup_gap;
    std::string error;  // empty on success

    bool ok() const { return error.empty(); }
};

/// Runs `run` once per value, concurrently up to `max_parallel` (0: hardware
/// concurrency). Rows come back in input order; a throwing run fills only
/// its own row's error.
std::vector<SweepRow> sweep(std::span<const double> values,
                            const std::function<RunOutcome(double)>& run,
                            unsigned max_parallel = 0);

}  // namespace ftns
