// SPDX-License-Identifier: Apache-2.0
#include "ftns/sim.hpp"

#include "ftns/errors.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>
#include <thread>

namespace ftns {

void SimConfig::validate() const
{
    if (!(dt > 0.0)) throw ParameterError("sim dt must be positive");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
        throw ParameterError("sim t_end must be finite and non-negative");
    }
    if (record_stride < 1) throw ParameterError("record_stride must be at least 1");
    if (step_count && *step_count < 0) throw ParameterError("step_count must be non-negative");
    if (!(settle_tol > 0.0)) throw ParameterError("settle_tol must be positive");
}

int SimConfig::steps() const
{
    if (step_count) return *step_count;
    return static_cast<int>(std::floor(t_end / dt + 1e-9));
}

int StateLayout::size() const
{
    return has_xi ? 2 * n + n * (n + 1) / 2 : 2 * n;
}

int StateLayout::offset(Component c) const
{
    switch (c) {
    case Component::kX: return 0;
    case Component::kV: return n;
    case Component::kXi: return 2 * n;
    }
    return 0;
}

int StateLayout::length(Component c) const
{
    if (c == Component::kXi) return has_xi ? n * (n + 1) / 2 : 0;
    return n;
}

const std::vector<double>& Trajectory::channel(const std::string& name) const
{
    const auto it = std::find(channel_names.begin(), channel_names.end(), name);
    if (it == channel_names.end()) throw ParameterError("no trajectory channel named " + name);
    return channels[static_cast<std::size_t>(it - channel_names.begin())];
}

Eigen::VectorXd Trajectory::slice(std::size_t i, Component c) const
{
    return states[i].segment(layout.offset(c), layout.length(c));
}

namespace {

std::string abort_message(double t)
{
    std::ostringstream os;
    os << "non-finite state at t = " << t;
    return os.str();
}

}  // namespace

NumericAbort::NumericAbort(double time, Eigen::VectorXd last_state)
    : std::runtime_error(abort_message(time)), time_(time), last_state_(std::move(last_state))
{
}

void rk4_step(const Rhs& rhs, double t, const Eigen::VectorXd& y, double dt,
              Eigen::VectorXd& y_next)
{
    const auto size = y.size();
    Eigen::VectorXd k1(size), k2(size), k3(size), k4(size), w(size);
    rhs(t, y, k1);
    w = y + (0.5 * dt) * k1;
    rhs(t + 0.5 * dt, w, k2);
    w = y + (0.5 * dt) * k2;
    rhs(t + 0.5 * dt, w, k3);
    w = y + dt * k3;
    rhs(t + dt, w, k4);
    y_next = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory integrate(const Rhs& rhs, const Eigen::VectorXd& y0, const SimConfig& cfg,
                     StateLayout layout, const Monitors& monitors)
{
    cfg.validate();
    if (y0.size() != layout.size()) throw ShapeError("initial state does not match layout");
    if (!y0.allFinite()) throw NumericAbort(0.0, y0);

    Trajectory tr;
    tr.layout = layout;
    tr.channel_names = monitors.names;
    tr.channels.resize(monitors.names.size());
    std::vector<double> row(monitors.names.size());

    const auto record = [&](double t, const Eigen::VectorXd& y) {
        tr.times.push_back(t);
        tr.states.push_back(y);
        if (monitors.eval) {
            monitors.eval(t, y, row);
            for (std::size_t c = 0; c < row.size(); ++c) tr.channels[c].push_back(row[c]);
        }
    };

    const int steps = cfg.steps();
    Eigen::VectorXd y = y0;
    Eigen::VectorXd next(y.size());
    record(0.0, y);
    for (int k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * cfg.dt;
        rk4_step(rhs, t, y, cfg.dt, next);
        if (!next.allFinite()) throw NumericAbort(t, y);
        y.swap(next);
        const int done = k + 1;
        if (done % cfg.record_stride == 0 || done == steps) {
            record(static_cast<double>(done) * cfg.dt, y);
        }
    }
    return tr;
}

std::optional<double> settling_time(const Trajectory& tr,
                                    const Eigen::Ref<const Eigen::VectorXd>& target, double tol)
{
    if (target.size() != tr.layout.n) throw ShapeError("settle target has wrong dimension");
    std::optional<double> settled;
    for (std::size_t i = tr.size(); i-- > 0;) {
        const double err = (tr.slice(i, Component::kX) - target).norm();
        if (!(err <= tol)) break;
        settled = tr.times[i];
    }
    return settled;
}

std::vector<double> gap_series(const Trajectory& a, const Trajectory& b, Component c)
{
    if (a.size() != b.size()) {
        throw ShapeError("trajectories have different sample counts ("
                         + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
    if (a.layout.length(c) != b.layout.length(c) || a.layout.length(c) == 0) {
        throw ShapeError("trajectories do not share the requested component");
    }
    std::vector<double> gap(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double ta = a.times[i], tb = b.times[i];
        if (std::abs(ta - tb) > 1e-12 * std::max({1.0, std::abs(ta), std::abs(tb)})) {
            throw ShapeError("trajectories have different time grids");
        }
        gap[i] = (a.slice(i, c) - b.slice(i, c)).norm();
    }
    return gap;
}

double sup_gap(const Trajectory& a, const Trajectory& b, Component c)
{
    const std::vector<double> gap = gap_series(a, b, c);
    double sup = 0.0;
    for (double g : gap) sup = std::max(sup, g);
    return sup;
}

std::optional<std::size_t> first_increase(std::span<const double> series, double rel_tol)
{
    for (std::size_t i = 1; i < series.size(); ++i) {
        const double prev = series[i - 1];
        if (series[i] > prev + rel_tol * std::max(prev, 1.0)) return i;
    }
    return std::nullopt;
}

double fit_decay_constant(std::span<const double> times, std::span<const double> values,
                          double alpha1, double v_floor)
{
    if (times.size() != values.size()) throw ShapeError("times and values differ in length");
    const double beta = (2.0 - alpha1) / 2.0;
    const double scale = std::pow(2.0, beta);
    double k7 = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        if (!(values[i] > v_floor)) continue;
        const double rate = -(values[i + 1] - values[i]) / (times[i + 1] - times[i]);
        k7 = std::min(k7, rate / (scale * std::pow(values[i], beta)));
        any = true;
    }
    return any ? k7 : std::numeric_limits<double>::quiet_NaN();
}

double finite_time_bound(double v0, double k7, double alpha1)
{
    const double beta = (2.0 - alpha1) / 2.0;
    return std::pow(v0, alpha1 / 2.0) / (std::pow(2.0, beta) * k7 * (alpha1 / 2.0));
}

std::vector<SweepRow> sweep(std::span<const double> values,
                            const std::function<RunOutcome(double)>& run, unsigned max_parallel)
{
    std::vector<SweepRow> rows(values.size());
    if (values.empty()) return rows;

    unsigned workers = max_parallel != 0 ? max_parallel : std::thread::hardware_concurrency();
    workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(values.size())));

    const auto one = [&](std::size_t i) {
        SweepRow& row = rows[i];
        row.value = values[i];
        try {
            const RunOutcome out = run(values[i]);
            row.settling_time = out.settling_time;
            row.final_err = out.final_err;
            row.sup_gap = out.sup_gap;
        } catch (const std::exception& e) {
            row.final_err = std::numeric_limits<double>::quiet_NaN();
            row.error = e.what();
            if (row.error.empty()) row.error = "run failed";
        }
    };

    // Each worker owns a strided subset of rows, so no two threads write the
    // same row.
    std::vector<std::future<void>> futures;
    for (unsigned w = 0; w < workers; ++w) {
        futures.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < values.size(); i += workers) one(i);
        }));
    }
    for (auto& f : futures) f.get();
    return rows;
}

}  // namespace ftns
