// SPDX-License-Identifier: Apache-2.0
// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any FAIL.
#include "ftns/commands.hpp"
#include "ftns/controller.hpp"
#include "ftns/experiment.hpp"
#include "ftns/sim.hpp"

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace ftns;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    std::string name;
    double budget_s;
    std::function<Verdict()> body;
};

std::string fmt(double v, int digits = 4)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

ExperimentConfig reference()
{
    return parse_config(std::string(FTNS_CONFIG_DIR) + "/paper_sec4.cfg");
}

const Eigen::Vector2d kXstar(1.0, 2.0);

std::optional<std::size_t> first_below(const std::vector<double>& s, double level)
{
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] < level) return i;
    }
    return std::nullopt;
}

Verdict demodulation_oracle()
{
    const ExperimentConfig cfg = reference();
    const DitherSpec d = cfg.dither_spec();
    const CostModel m = cfg.model();
    const DemodGrid grid = make_grid(d);
    const Eigen::Vector3d hvec(60, 25, 30);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-5, 5);
    double worst_g = 0, worst_h = 0;
    for (int i = 0; i < 50; ++i) {
        const Eigen::Vector2d x(u(rng), u(rng));
        const DemodAverages avg = demod_averages(x, d, m, grid);
        const Eigen::VectorXd g = m.grad(x);
        worst_g = std::max(worst_g, (avg.grad - g).norm() / g.norm());
        worst_h = std::max(worst_h, (avg.hess.entries() - hvec).norm() / hvec.norm());
    }
    const bool scale_ok = d.offdiag_scale() == 4.0 / (d.a() * d.a());
    return {worst_g <= 1e-6 && worst_h <= 1e-6 && scale_ok,
            "50 states, worst rel err grad " + fmt(worst_g) + ", hess " + fmt(worst_h) +
                " (tol 1e-6)"};
}

Verdict target_convergence()
{
    const ExperimentConfig cfg = reference();
    const GainThreshold th = gain_threshold(cfg.model(), cfg.gains.k, cfg.flow_params());
    const RunResult run = run_system(cfg, SystemKind::kTarget);
    const Trajectory& tr = run.trajectory;
    const auto ts = settling_time(tr, kXstar, 1e-6);
    const auto inc = first_increase(tr.channel("V1"), 1e-9);
    const bool pass = cfg.gains.K > th.Kstar && ts.has_value() && !inc.has_value();
    return {pass, "K = " + fmt(cfg.gains.K) + " > K* = " + fmt(th.Kstar) + ", |x-x*| <= 1e-6 from t = " +
                      (ts ? fmt(*ts) : std::string("never")) + " to " + fmt(tr.times.back()) +
                      ", V1 " + (inc ? "increases at t = " + fmt(tr.times[*inc]) : std::string("non-increasing"))};
}

Verdict scalar_settling()
{
    const FlowParams p = FlowParams::make(3, 1.5, 1, 0);
    const Rhs rhs = [&](double, const Eigen::Ref<const Eigen::VectorXd>& y, Eigen::Ref<Eigen::VectorXd> dy) {
        scaled_flow_into(y, p, dy);
        dy = -dy;
    };
    SimConfig c;
    c.t_end = 3.0;
    c.dt = 1e-3;
    Eigen::VectorXd y0(2);
    y0 << 1.0, 0.0;
    const Trajectory tr = integrate(rhs, y0, c, {1, false});
    // RK4 rests at ~6.1e-8 on this flow at dt = 1e-3; 1e-7 separates that
    // floor from the exact solution one step before T (2.5e-7).
    const double tol = 1e-7;
    const auto ts = settling_time(tr, Eigen::VectorXd::Zero(1), tol);
    const bool pass = ts && std::abs(*ts - 2.0) <= c.dt;
    return {pass, "settles at t = " + (ts ? fmt(*ts, 6) : std::string("never")) +
                      " (closed form 2, stride 1e-3, tol " + fmt(tol) + ")"};
}

Verdict reference_reproduction()
{
    const ExperimentConfig cfg = reference();
    const RunResult esc = run_system(cfg, SystemKind::kEsc);
    const RunResult avg = run_system(cfg, SystemKind::kAveraged);
    const Trajectory& tr = esc.trajectory;
    const auto tx = settling_time(tr, kXstar, 0.1);
    std::optional<double> ty;
    const std::vector<double>& y = tr.channel("y");
    for (std::size_t i = tr.size(); i-- > 0;) {
        if (!(std::abs(y[i] - 1.0) <= 1.0)) break;
        ty = tr.times[i];
    }
    const auto ta = settling_time(avg.trajectory, kXstar, 1e-3);
    const double fe = final_error(cfg, tr);
    const double fa = final_error(cfg, avg.trajectory);
    const bool pass = tx && ty && ta && tr.times.back() <= cfg.sim.t_end + 1e-12;
    return {pass, "ESC |x-x*| <= 0.1 from t = " + (tx ? fmt(*tx) : std::string("never")) +
                      ", |y-1| <= 1 from t = " + (ty ? fmt(*ty) : std::string("never")) +
                      ", final " + fmt(fe) + "; averaged <= 1e-3 from t = " +
                      (ta ? fmt(*ta) : std::string("never")) + ", final " + fmt(fa)};
}

Verdict gain_trend()
{
    const ExperimentConfig cfg = reference();
    const std::vector<double> ks = {1, 2, 4};
    const std::vector<SweepRow> rows = sweep(ks, [&](double k) {
        ExperimentConfig c = cfg;
        set_param(c, "gains.k", k);
        const RunResult r = run_system(c, SystemKind::kEsc);
        RunOutcome o;
        o.settling_time = settling_time(r.trajectory, kXstar, 0.1);
        o.final_err = final_error(c, r.trajectory);
        return o;
    });
    bool pass = true;
    std::string detail = "settling times";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& t = rows[i].settling_time;
        detail += " k=" + fmt(rows[i].value) + ": " + (t ? fmt(*t) : std::string("none"));
        if (!rows[i].ok() || !t) pass = false;
        if (i > 0 && pass && !(*t < *rows[i - 1].settling_time)) pass = false;
    }
    return {pass, detail};
}

Verdict initial_conditions()
{
    const ExperimentConfig cfg = reference();
    struct Case {
        std::string path;
        double value;
        double x1, x2;
    };
    std::vector<Case> cases;
    for (double v : {0.0, 0.5, 1.0, 1.5, 2.0}) cases.push_back({"sim.x0[0]", v, v, 1.0});
    for (double v : {0.0, 1.0, 2.0, 3.0, 4.0}) cases.push_back({"sim.x0[1]", v, 0.0, v});

    const auto run_all = [&](bool floor) {
        std::vector<double> idx(cases.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<double>(i);
        return sweep(idx, [&](double id) {
            const Case& c = cases[static_cast<std::size_t>(id)];
            ExperimentConfig e = cfg;
            e.sim.hessian_floor = floor;
            set_param(e, "sim.x0[0]", c.x1);
            set_param(e, "sim.x0[1]", c.x2);
            const RunResult r = run_system(e, SystemKind::kEsc);
            RunOutcome o;
            o.settling_time = settling_time(r.trajectory, kXstar, 0.1);
            o.final_err = final_error(e, r.trajectory);
            return o;
        });
    };

    const std::vector<SweepRow> with_floor = run_all(true);
    const std::vector<SweepRow> without = run_all(false);
    int converged = 0, converged_raw = 0;
    std::string misses;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        if (with_floor[i].ok() && with_floor[i].settling_time) {
            ++converged;
        } else {
            misses += " (" + fmt(cases[i].x1) + "," + fmt(cases[i].x2) + ")";
        }
        if (without[i].ok() && without[i].settling_time) ++converged_raw;
    }
    return {converged == 10, std::to_string(converged) + "/10 reach 0.1 with Hessian floor" +
                                 (misses.empty() ? std::string() : ", missed:" + misses) +
                                 "; without floor " + std::to_string(converged_raw) + "/10"};
}

Verdict closeness_trend()
{
    const auto gap_at = [](double scale) {
        ExperimentConfig c = reference();
        set_param(c, "sim.t_end", 5.0);
        set_param(c, "dither.omegas[0]", 150.0 * scale);
        set_param(c, "dither.omegas[1]", 200.0 * scale);
        const RunResult esc = run_system(c, SystemKind::kEsc);
        const RunResult avg = run_system(c, SystemKind::kAveraged);
        return sup_gap(esc.trajectory, avg.trajectory);
    };
    const double slow = gap_at(1.0);
    const double fast = gap_at(10.0);
    return {fast < slow, "sup gap on [0,5]: " + fmt(slow) + " at (150,200), " + fmt(fast) +
                             " at (1500,2000)"};
}

Verdict hessian_estimate_monitors()
{
    const ExperimentConfig cfg = reference();
    const RunResult avg = run_system(cfg, SystemKind::kAveraged);
    const Trajectory& tr = avg.trajectory;
    const std::vector<double>& v2 = tr.channel("V2");
    const std::vector<double>& v3 = tr.channel("V3");
    const auto inc2 = first_increase(v2, 1e-9);
    const auto hit = first_below(v2, 1e-10);
    std::optional<std::size_t> inc3;
    if (hit) {
        const std::span<const double> tail(v3.data() + *hit, v3.size() - *hit);
        if (const auto j = first_increase(tail, 1e-9)) inc3 = *hit + *j;
    }
    const bool pass = !inc2 && hit && !inc3;
    return {pass, "V2(0) = " + fmt(v2.front()) + ", " +
                      (inc2 ? "increases at t = " + fmt(tr.times[*inc2]) : std::string("non-increasing")) +
                      ", < 1e-10 from t = " + (hit ? fmt(tr.times[*hit]) : std::string("never")) +
                      " (min " + fmt(*std::min_element(v2.begin(), v2.end())) + "); V3 after: " +
                      (inc3 ? "increases at t = " + fmt(tr.times[*inc3]) : std::string("non-increasing"))};
}

Verdict rk4_order()
{
    const Rhs rhs = [](double, const Eigen::Ref<const Eigen::VectorXd>& y, Eigen::Ref<Eigen::VectorXd> dy) {
        dy = -y;
    };
    const auto err = [&](double dt) {
        SimConfig c;
        c.t_end = 1.0;
        c.dt = dt;
        Eigen::VectorXd y0(2);
        y0 << 1.0, 0.0;
        const Trajectory tr = integrate(rhs, y0, c, {1, false});
        return std::abs(tr.states.back()[0] - std::exp(-1.0));
    };
    const double ratio = err(0.1) / err(0.05);
    return {std::abs(ratio - 16.0) <= 0.2 * 16.0,
            "error ratio dt=0.1 vs 0.05: " + fmt(ratio) + " (16 +/- 20%)"};
}

}  // namespace

int main()
{
    const std::vector<Criterion> criteria = {
        {"demodulation oracle", 5, demodulation_oracle},
        {"target finite-time convergence", 10, target_convergence},
        {"scalar settling time", 1, scalar_settling},
        {"reference run reproduction", 60, reference_reproduction},
        {"gain trend", 180, gain_trend},
        {"initial-condition robustness", 300, initial_conditions},
        {"averaging closeness trend", 120, closeness_trend},
        {"Hessian-estimate Lyapunov monitors", 30, hessian_estimate_monitors},
        {"integrator order", 1, rk4_order},
    };

    int failed = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.body();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < c.budget_s;
        const bool pass = v.pass && in_time;
        if (!pass) ++failed;
        std::cout << (pass ? "PASS" : "FAIL") << "  " << c.name << ": " << v.detail << " ["
                  << fmt(secs, 3) << " s of " << fmt(c.budget_s) << " s"
                  << (in_time ? "" : ", over budget") << "]" << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
