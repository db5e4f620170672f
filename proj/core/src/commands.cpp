// SPDX-License-Identifier: Apache-2.0
#include "ftns/commands.hpp"

#include "ftns/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace ftns {

namespace {

namespace fs = std::filesystem;

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

std::ostream& out_of(const CommandContext& ctx) { return ctx.out ? *ctx.out : std::cout; }
std::ostream& err_of(const CommandContext& ctx) { return ctx.err ? *ctx.err : std::cerr; }

fs::path output_dir(const ExperimentConfig& cfg, const CommandContext& ctx)
{
    fs::path dir = ctx.out_dir.empty() ? fs::path(cfg.output.directory) : ctx.out_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

template <class Writer>
void write_file(const fs::path& path, Writer&& writer)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    writer(os);
    os.flush();
    if (!os) throw IoError("write failed: " + path.string());
}

void write_run(const fs::path& dir, const std::string& stem, const ExperimentConfig& cfg,
               const RunResult& run)
{
    write_file(dir / (stem + ".csv"), [&](std::ostream& os) { write_trajectory_csv(os, run.trajectory); });
    write_file(dir / (stem + ".meta"), [&](std::ostream& os) { write_meta(os, cfg, run); });
}

std::string fmt(double v)
{
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "none"; }

// Maps library exceptions onto exit codes; everything lands on stderr.
template <class Body>
int guarded(const CommandContext& ctx, Body&& body)
{
    std::ostream& err = err_of(ctx);
    try {
        return body();
    } catch (const NumericAbort& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const ConfigError& e) {
        for (const std::string& m : e.errors()) err << "error: " << m << '\n';
        return kExitValidation;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::ios_base::failure& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
}

std::string stem(const ExperimentConfig& cfg, SystemKind kind)
{
    return cfg.output.prefix + "_" + to_string(kind);
}

}  // namespace

int cmd_run(const ExperimentConfig& cfg, SystemKind system, const CommandContext& ctx)
{
    return guarded(ctx, [&] {
        const fs::path dir = output_dir(cfg, ctx);
        const RunResult run = run_system(cfg, system);
        write_run(dir, stem(cfg, system), cfg, run);

        std::optional<double> ts;
        if (const auto target = settle_target(cfg)) {
            ts = settling_time(run.trajectory, *target, cfg.sim.settle_tol);
        }
        out_of(ctx) << "system " << to_string(system) << ": " << run.trajectory.size()
                    << " samples, final_err " << fmt(final_error(cfg, run.trajectory))
                    << ", settling_time " << fmt(ts) << ", " << fmt(run.wall_seconds)
                    << " s\n";
        return int(kExitOk);
    });
}

int cmd_compare(const ExperimentConfig& cfg, SystemKind reference, const CommandContext& ctx)
{
    return guarded(ctx, [&] {
        const fs::path dir = output_dir(cfg, ctx);
        const RunResult esc = run_system(cfg, SystemKind::kEsc);
        const RunResult ref =
            reference == SystemKind::kEsc ? esc : run_system(cfg, reference);
        const std::vector<double> gap = gap_series(esc.trajectory, ref.trajectory);
        double sup = 0;
        for (double g : gap) sup = std::max(sup, g);

        write_run(dir, stem(cfg, SystemKind::kEsc), cfg, esc);
        if (reference != SystemKind::kEsc) write_run(dir, stem(cfg, reference), cfg, ref);
        write_file(dir / (cfg.output.prefix + "_gap.csv"),
                   [&](std::ostream& os) { write_gap_csv(os, esc.trajectory, gap); });

        std::ostringstream line;
        line << std::setprecision(17) << sup;
        out_of(ctx) << "sup_gap " << line.str() << " (esc vs " << to_string(reference) << ", "
                    << gap.size() << " samples)\n";
        return int(kExitOk);
    });
}

int cmd_sweep(const ExperimentConfig& cfg, const std::string& param,
              const std::vector<double>& values, SystemKind system, const CommandContext& ctx)
{
    return guarded(ctx, [&] {
        const fs::path dir = output_dir(cfg, ctx);
        std::ostream& err = err_of(ctx);

        // Configs are prepared up front; a value the config rejects becomes
        // a failed row, a parameter no value can set fails the command.
        std::vector<std::optional<ExperimentConfig>> cfgs(values.size());
        std::vector<std::string> cfg_errors(values.size());
        std::size_t rejected = 0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            ExperimentConfig c = cfg;
            try {
                set_param(c, param, values[i]);
                cfgs[i] = std::move(c);
            } catch (const ConfigError& e) {
                std::string msg;
                for (const std::string& m : e.errors()) msg += (msg.empty() ? "" : "; ") + m;
                cfg_errors[i] = msg;
                ++rejected;
            }
        }
        if (!values.empty() && rejected == values.size()) throw ConfigError({cfg_errors[0]});

        std::vector<std::optional<RunResult>> runs(values.size());
        std::vector<double> index(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) index[i] = static_cast<double>(i);

        // Rows are keyed by index so duplicate values stay distinct; each
        // worker writes only its own slot.
        std::vector<SweepRow> rows = sweep(index, [&](double id) {
            const auto i = static_cast<std::size_t>(id);
            if (!cfgs[i]) throw ParameterError(cfg_errors[i]);
            const ExperimentConfig& c = *cfgs[i];
            RunResult run = run_system(c, system);
            RunOutcome o;
            if (const auto target = settle_target(c)) {
                o.settling_time = settling_time(run.trajectory, *target, c.sim.settle_tol);
            }
            o.final_err = final_error(c, run.trajectory);
            runs[i] = std::move(run);
            return o;
        });

        for (std::size_t i = 0; i < rows.size(); ++i) {
            rows[i].value = values[i];
            if (!rows[i].ok()) {
                err << "warning: " << param << " = " << fmt(values[i]) << ": " << rows[i].error
                    << '\n';
                continue;
            }
            write_run(dir,
                      cfg.output.prefix + "_sweep_" + std::to_string(i) + "_" + to_string(system),
                      *cfgs[i], *runs[i]);
        }
        write_file(dir / (cfg.output.prefix + "_sweep.csv"),
                   [&](std::ostream& os) { write_sweep_csv(os, rows); });

        std::ostream& out = out_of(ctx);
        for (const SweepRow& r : rows) {
            out << param << " = " << fmt(r.value) << ": settling_time " << fmt(r.settling_time)
                << ", final_err " << (r.ok() ? fmt(r.final_err) : "nan") << '\n';
        }
        return int(kExitOk);
    });
}

int cmd_validate(const ExperimentConfig& cfg, const CommandContext& ctx)
{
    return guarded(ctx, [&] {
        std::ostream& out = out_of(ctx);
        bool pass = true;

        const std::vector<std::string> errors = cfg.check();
        for (const std::string& e : errors) out << "FAIL config: " << e << '\n';
        if (!errors.empty()) {
            out << "validate: FAIL\n";
            return int(kExitValidation);
        }
        out << "pass config: all sections consistent\n";

        const DitherSpec d = cfg.dither_spec();
        const int n = cfg.dim();
        const FreqReport report = validate_freqs(d, n);
        if (report.ok()) {
            out << "pass dither: demodulation oracle holds at period " << fmt(common_period(d))
                << " with " << default_node_count(d) << " nodes\n";
        }
        for (const Violation& v : report.violations) {
            out << "FAIL dither: [" << to_string(v.kind) << "] " << v.message << '\n';
            pass = false;
        }
        if (std::abs(d.offdiag_scale() - DitherSpec::default_offdiag_scale(d.a())) >
            1e-12 * DitherSpec::default_offdiag_scale(d.a())) {
            out << "warning dither: offdiag_scale " << fmt(d.offdiag_scale())
                << " differs from 4/a^2; the Hessian estimate is biased off-diagonal\n";
        }

        const CostModel model = cfg.model();
        if (model.has_oracles()) {
            const EscState s0 = cfg.initial_state();
            std::vector<Eigen::VectorXd> samples = {s0.x};
            if (const auto t = settle_target(cfg)) samples.push_back(*t);
            for (const std::string& w : convexity_warnings(model, samples)) {
                out << "warning cost: " << w << '\n';
            }
        }
        if (model.is_quadratic()) {
            const GainThreshold th = gain_threshold(model, cfg.gains.k, cfg.flow_params());
            out << (cfg.gains.K > th.Kstar ? "pass" : "warning") << " gains: K = "
                << fmt(cfg.gains.K) << ", sufficient threshold K* = " << fmt(th.Kstar) << '\n';
        }

        out << "validate: " << (pass ? "PASS" : "FAIL") << '\n';
        return int(pass ? kExitOk : kExitValidation);
    });
}

std::vector<double> parse_value_list(const std::string& csv)
{
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) {
            if (csv.find_first_not_of(" \t") == std::string::npos) break;
            throw ParameterError("empty entry in value list '" + csv + "'");
        }
        const std::string tok = item.substr(b, e - b + 1);
        double v = 0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) {
            throw ParameterError("not a number in value list: '" + tok + "'");
        }
        out.push_back(v);
    }
    return out;
}

}  // namespace ftns
