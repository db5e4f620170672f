// SPDX-License-Identifier: Apache-2.0
#include "ftns/experiment.hpp"

#include "ftns/errors.hpp"
#include "ftns/version.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace ftns {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void put(std::ostream& os, double v)
{
    if (std::isnan(v)) {
        os << "nan";
        return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}

Monitors make_monitors(const ExperimentConfig& cfg, const CostModel& model, bool has_xi)
{
    const int n = model.dim();
    const std::optional<Eigen::VectorXd> target = settle_target(cfg);
    std::optional<Eigen::VectorXd> hvec;
    if (model.is_quadratic()) hvec = vec_sym(model.hstar()).entries();

    Monitors mon;
    mon.names = monitor_names();
    mon.eval = [=](double, const Eigen::VectorXd& y, std::span<double> out) {
        const auto x = y.head(n);
        const auto v = y.segment(n, n);
        out[0] = model.eval(x);
        out[1] = out[2] = out[3] = out[4] = out[5] = kNaN;
        if (model.has_oracles()) {
            const Eigen::VectorXd g = model.grad(x);
            out[1] = lyapunov_V1(model.hess(x) * v + g, g);
            if (has_xi) {
                Eigen::MatrixXd h(n, n);
                unvec_sym_into(y.tail(sym_size(n)), n, h);
                out[3] = lyapunov_V3(h * v + g, g);
            }
        }
        if (hvec && has_xi) {
            const double e = (y.tail(sym_size(n)) - *hvec).norm();
            out[2] = 0.5 * e * e;
            out[5] = e;
        }
        if (target) out[4] = (x - *target).norm();
    };
    return mon;
}

}  // namespace

std::string to_string(SystemKind kind)
{
    switch (kind) {
    case SystemKind::kEsc: return "esc";
    case SystemKind::kTarget: return "target";
    case SystemKind::kAveraged: return "averaged";
    }
    return "unknown";
}

SystemKind parse_system(const std::string& name)
{
    if (name == "esc") return SystemKind::kEsc;
    if (name == "target") return SystemKind::kTarget;
    if (name == "averaged") return SystemKind::kAveraged;
    throw ParameterError("system must be esc, target or averaged, got '" + name + "'");
}

const std::vector<std::string>& monitor_names()
{
    static const std::vector<std::string> names = {"y", "V1", "V2", "V3", "err_x", "err_xi"};
    return names;
}

std::optional<Eigen::VectorXd> settle_target(const ExperimentConfig& cfg)
{
    if (cfg.sim.settle_target) {
        const auto& t = *cfg.sim.settle_target;
        return Eigen::VectorXd(
            Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size())));
    }
    if (cfg.cost.kind == "quadratic") {
        return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
            cfg.cost.xstar.data(), static_cast<Eigen::Index>(cfg.cost.xstar.size())));
    }
    return std::nullopt;
}

double final_error(const ExperimentConfig& cfg, const Trajectory& tr)
{
    const auto target = settle_target(cfg);
    if (!target || tr.size() == 0) return kNaN;
    return (tr.slice(tr.size() - 1, Component::kX) - *target).norm();
}

SimConfig sim_config(const ExperimentConfig& cfg, SystemKind kind)
{
    SimConfig sc;
    sc.t_end = cfg.sim.t_end;
    sc.settle_tol = cfg.sim.settle_tol;
    sc.settle_target = settle_target(cfg);
    const double dt = cfg.record_dt();
    if (kind == SystemKind::kEsc) {
        sc.dt = dt;
        sc.record_stride = cfg.sim.record_stride;
    } else {
        SimConfig coarse = sc;
        coarse.dt = dt;
        sc.dt = dt / cfg.sim.substeps;
        sc.step_count = coarse.steps() * cfg.sim.substeps;
        sc.record_stride = cfg.sim.record_stride * cfg.sim.substeps;
    }
    return sc;
}

RunResult run_system(const ExperimentConfig& cfg, SystemKind kind)
{
    const auto start = std::chrono::steady_clock::now();
    const CostModel model = cfg.model();
    const GainSet gains = GainSet::make(cfg.gains.k, cfg.gains.K, cfg.gains.K2);
    const FlowParams flow = cfg.flow_params();
    const EscState s0 = cfg.initial_state();
    const SimConfig sc = sim_config(cfg, kind);
    const int n = model.dim();

    RunResult out;
    out.system = kind;
    out.dt_record = cfg.record_dt();
    out.dt_step = sc.dt;

    switch (kind) {
    case SystemKind::kEsc: {
        const EscSystem sys(gains, flow, cfg.dither_spec(), model, cfg.hessian_floor());
        out.trajectory = integrate(std::cref(sys), pack(s0), sc, {n, true},
                                   make_monitors(cfg, model, true));
        break;
    }
    case SystemKind::kTarget: {
        const TargetSystem sys(gains, flow, model);
        out.trajectory = integrate(std::cref(sys), pack(TargetState{s0.x, s0.v}), sc, {n, false},
                                   make_monitors(cfg, model, false));
        break;
    }
    case SystemKind::kAveraged: {
        const AveragedSystem sys(gains, flow, cfg.dither_spec(), model, cfg.sim.averaging,
                                 cfg.hessian_floor());
        out.trajectory = integrate(std::cref(sys), pack(s0), sc, {n, true},
                                   make_monitors(cfg, model, true));
        break;
    }
    }
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr)
{
    const int n = tr.layout.n;
    const int m = sym_size(n);
    os << "t";
    for (int i = 1; i <= n; ++i) os << ",x" << i;
    for (int i = 1; i <= n; ++i) os << ",v" << i;
    for (int i = 1; i <= m; ++i) os << ",xi" << i;
    for (const std::string& name : monitor_names()) os << ',' << name;
    os << '\n';

    std::vector<const std::vector<double>*> cols;
    for (const std::string& name : monitor_names()) {
        const auto it = std::find(tr.channel_names.begin(), tr.channel_names.end(), name);
        cols.push_back(it == tr.channel_names.end()
                           ? nullptr
                           : &tr.channels[static_cast<std::size_t>(it - tr.channel_names.begin())]);
    }

    for (std::size_t r = 0; r < tr.size(); ++r) {
        const Eigen::VectorXd& y = tr.states[r];
        put(os, tr.times[r]);
        for (int i = 0; i < 2 * n; ++i) {
            os << ',';
            put(os, y[i]);
        }
        for (int i = 0; i < m; ++i) {
            os << ',';
            put(os, tr.layout.has_xi ? y[2 * n + i] : kNaN);
        }
        for (const auto* col : cols) {
            os << ',';
            put(os, col ? (*col)[r] : kNaN);
        }
        os << '\n';
    }
}

void write_gap_csv(std::ostream& os, const Trajectory& a, const std::vector<double>& gap)
{
    os << "t,gap_x\n";
    for (std::size_t i = 0; i < gap.size(); ++i) {
        put(os, a.times[i]);
        os << ',';
        put(os, gap[i]);
        os << '\n';
    }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows)
{
    os << "value,settling_time,final_err\n";
    for (const SweepRow& r : rows) {
        put(os, r.value);
        os << ',';
        put(os, r.settling_time.value_or(kNaN));
        os << ',';
        put(os, r.ok() ? r.final_err : kNaN);
        os << '\n';
    }
}

void write_meta(std::ostream& os, const ExperimentConfig& cfg, const RunResult& run)
{
    const DitherSpec d = cfg.dither_spec();
    const SimConfig sc = sim_config(cfg, run.system);
    os << "tool = ftns\n";
    os << "version = " << kVersion << '\n';
    os << "system = " << to_string(run.system) << '\n';
    os << "dt_record = ";
    put(os, run.dt_record);
    os << "\ndt_step = ";
    put(os, run.dt_step);
    os << "\nsteps = " << sc.steps() << '\n';
    os << "record_stride = " << sc.record_stride << '\n';
    os << "samples = " << run.trajectory.size() << '\n';
    os << "common_period = ";
    put(os, common_period(d));
    os << "\noffdiag_scale = ";
    put(os, d.offdiag_scale());
    os << "\nhessian_floor = " << (cfg.sim.hessian_floor ? "true" : "false") << '\n';
    if (run.system == SystemKind::kAveraged) {
        os << "averaging = "
           << (cfg.sim.averaging == AveragingMode::kArgument ? "argument" : "field") << '\n';
        os << "quadrature_nodes = " << default_node_count(d) << '\n';
    }
    os << "wall_seconds = " << run.wall_seconds << '\n';
    for (const std::string& o : cfg.overrides) os << "override = " << o << '\n';
    os << "config_path = " << cfg.source_path << '\n';
    os << "----- config -----\n" << cfg.source_text;
    if (!cfg.source_text.empty() && cfg.source_text.back() != '\n') os << '\n';
}

}  // namespace ftns
