// SPDX-License-Identifier: Apache-2.0
#include "ftns/config.hpp"

#include "ftns/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace ftns {

namespace pt = boost::property_tree;
using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& items, const std::string& sep)
{
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

const std::map<std::string, std::set<std::string>>& known_keys()
{
    static const std::map<std::string, std::set<std::string>> keys = {
        {"cost", {"kind", "hstar", "xstar", "ystar", "dim", "terms"}},
        {"dither", {"a", "omegas", "offdiag_scale"}},
        {"flow", {"q1", "q2", "c1", "c2", "sing_eps"}},
        {"gains", {"k", "K", "K2"}},
        {"sim",
         {"t_end", "dt", "x0", "v0", "xi0", "settle_tol", "settle_target", "substeps",
          "record_stride", "hessian_floor", "averaging"}},
        {"output", {"directory", "prefix"}},
    };
    return keys;
}

// "value   ; note" -> "value". A comment marker counts only after whitespace
// and outside double quotes.
std::string strip_inline_comment(const std::string& text)
{
    bool quoted = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '"') quoted = !quoted;
        if (!quoted && (c == ';' || c == '#') && i > 0 && (text[i - 1] == ' ' || text[i - 1] == '\t')) {
            const auto end = text.find_last_not_of(" \t", i - 1);
            return end == std::string::npos ? std::string() : text.substr(0, end + 1);
        }
    }
    return text;
}

// Reads typed values out of the property tree, collecting every problem.
class Reader {
  public:
    Reader(const pt::ptree& tree, std::vector<std::string>& errors)
        : tree_(tree), errors_(errors)
    {
    }

    bool has(const std::string& section, const std::string& key) const
    {
        const auto sec = tree_.get_child_optional(section);
        return sec && sec->get_child_optional(pt::ptree::path_type(key, '\0'));
    }

    std::optional<std::string> raw(const std::string& section, const std::string& key,
                                   bool required)
    {
        const auto sec = tree_.get_child_optional(section);
        if (sec) {
            const auto node = sec->get_child_optional(pt::ptree::path_type(key, '\0'));
            if (node) return strip_inline_comment(node->data());
        }
        if (required) errors_.push_back(section + "." + key + ": missing required key");
        return std::nullopt;
    }

    std::optional<json> value(const std::string& section, const std::string& key,
                              bool required)
    {
        const auto text = raw(section, key, required);
        if (!text) return std::nullopt;
        try {
            return json::parse(*text);
        } catch (const json::parse_error&) {
            errors_.push_back(section + "." + key + ": cannot parse '" + *text + "'");
            return std::nullopt;
        }
    }

    std::optional<double> number(const std::string& section, const std::string& key,
                                 bool required)
    {
        const auto v = value(section, key, required);
        if (!v) return std::nullopt;
        if (!v->is_number()) {
            errors_.push_back(section + "." + key + ": expected a number, got " + v->dump());
            return std::nullopt;
        }
        return v->get<double>();
    }

    std::optional<int> integer(const std::string& section, const std::string& key,
                               bool required)
    {
        const auto v = value(section, key, required);
        if (!v) return std::nullopt;
        if (!v->is_number_integer()) {
            errors_.push_back(section + "." + key + ": expected an integer, got " + v->dump());
            return std::nullopt;
        }
        return v->get<int>();
    }

    std::optional<bool> boolean(const std::string& section, const std::string& key)
    {
        const auto v = value(section, key, false);
        if (!v) return std::nullopt;
        if (!v->is_boolean()) {
            errors_.push_back(section + "." + key + ": expected true or false, got " + v->dump());
            return std::nullopt;
        }
        return v->get<bool>();
    }

    std::optional<std::vector<double>> vector(const std::string& section, const std::string& key,
                                              bool required, bool allow_scalar = false)
    {
        const auto v = value(section, key, required);
        if (!v) return std::nullopt;
        if (allow_scalar && v->is_number()) return std::vector<double>{v->get<double>()};
        if (!v->is_array()) {
            errors_.push_back(section + "." + key + ": expected an array of numbers, got "
                              + v->dump());
            return std::nullopt;
        }
        std::vector<double> out;
        for (const json& e : *v) {
            if (!e.is_number()) {
                errors_.push_back(section + "." + key + ": array entry " + e.dump()
                                  + " is not a number");
                return std::nullopt;
            }
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::optional<std::vector<std::vector<double>>> matrix(const std::string& section,
                                                           const std::string& key,
                                                           bool required)
    {
        const auto v = value(section, key, required);
        if (!v) return std::nullopt;
        const std::string where = section + "." + key;
        if (!v->is_array()) {
            errors_.push_back(where + ": expected an array of rows");
            return std::nullopt;
        }
        std::vector<std::vector<double>> rows;
        for (const json& r : *v) {
            if (!r.is_array()) {
                errors_.push_back(where + ": row " + r.dump() + " is not an array");
                return std::nullopt;
            }
            std::vector<double> row;
            for (const json& e : r) {
                if (!e.is_number()) {
                    errors_.push_back(where + ": entry " + e.dump() + " is not a number");
                    return std::nullopt;
                }
                row.push_back(e.get<double>());
            }
            rows.push_back(std::move(row));
        }
        return rows;
    }

    std::optional<std::string> word(const std::string& section, const std::string& key,
                                    bool required)
    {
        auto text = raw(section, key, required);
        if (!text) return std::nullopt;
        std::string s = *text;
        if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
            s = s.substr(1, s.size() - 2);
        }
        return s;
    }

  private:
    const pt::ptree& tree_;
    std::vector<std::string>& errors_;
};

template <typename T>
void assign(T& dst, const std::optional<T>& src)
{
    if (src) dst = *src;
}

bool is_power_of_two(int v)
{
    return v > 0 && (v & (v - 1)) == 0;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error("invalid configuration:\n  " + join(errors, "\n  ")),
      errors_(std::move(errors))
{
}

// ---------------------------------------------------------------------------

CostModel ExperimentConfig::model() const
{
    if (cost.kind == "quadratic") {
        const int n = static_cast<int>(cost.xstar.size());
        if (static_cast<int>(cost.hstar.size()) != sym_size(n)) {
            throw ShapeError("cost.hstar needs " + std::to_string(sym_size(n))
                             + " entries (vec_sym order) for dimension " + std::to_string(n));
        }
        const Eigen::VectorXd hv = Eigen::Map<const Eigen::VectorXd>(
            cost.hstar.data(), static_cast<Eigen::Index>(cost.hstar.size()));
        const Eigen::VectorXd xs = Eigen::Map<const Eigen::VectorXd>(cost.xstar.data(), n);
        return CostModel::quadratic(unvec_sym(SymVec(hv)), xs, cost.ystar);
    }
    if (cost.kind == "polynomial") return CostModel::polynomial(cost.dim, cost.terms);
    throw ParameterError("cost.kind must be quadratic or polynomial, got '" + cost.kind + "'");
}

DitherSpec ExperimentConfig::dither_spec() const
{
    return DitherSpec::make(dither.a, dither.omegas, dither.offdiag_scale);
}

FlowParams ExperimentConfig::flow_params() const
{
    return FlowParams::make(flow.q1, flow.q2, flow.c1, flow.c2,
                            flow.sing_eps.value_or(FlowParams::kDefaultSingEps));
}

int ExperimentConfig::dim() const
{
    return cost.kind == "polynomial" ? cost.dim : static_cast<int>(cost.xstar.size());
}

EscState ExperimentConfig::initial_state() const
{
    const int n = dim();
    const auto as_vec = [](const std::vector<double>& v) {
        return Eigen::VectorXd(
            Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    EscState s;
    s.x = as_vec(sim.x0);
    s.v = sim.v0.size() == 1 ? Eigen::VectorXd::Constant(n, sim.v0[0]) : as_vec(sim.v0);
    s.xi = SymVec(as_vec(sim.xi0));
    return s;
}

HessianFloor ExperimentConfig::hessian_floor() const
{
    HessianFloor f;
    f.enabled = sim.hessian_floor;
    return f;
}

double ExperimentConfig::record_dt() const
{
    if (sim.dt) return *sim.dt;
    return common_period(dither_spec()) / 64.0;
}

std::vector<std::string> ExperimentConfig::check() const
{
    std::vector<std::string> errors;
    const auto guard = [&](const std::string& where, auto&& fn) {
        try {
            fn();
            return true;
        } catch (const std::exception& e) {
            errors.push_back(where + ": " + e.what());
            return false;
        }
    };

    const bool cost_ok = guard("cost", [&] { (void)model(); });
    const int n = cost_ok ? dim() : 0;

    bool dither_ok = guard("dither", [&] { (void)dither_spec(); });
    if (dither_ok && n > 0) {
        const FreqReport report = validate_freqs(dither_spec(), n);
        for (const Violation& v : report.violations) {
            errors.push_back("dither.omegas: [" + to_string(v.kind) + "] " + v.message);
        }
        dither_ok = report.ok();
    }

    guard("flow", [&] { (void)flow_params(); });
    guard("gains", [&] { (void)GainSet::make(gains.k, gains.K, gains.K2); });

    if (n > 0) {
        if (static_cast<int>(sim.x0.size()) != n) {
            errors.push_back("sim.x0: length " + std::to_string(sim.x0.size())
                             + " does not match cost dimension " + std::to_string(n));
        }
        if (sim.v0.size() != 1 && static_cast<int>(sim.v0.size()) != n) {
            errors.push_back("sim.v0: length " + std::to_string(sim.v0.size())
                             + " does not match cost dimension " + std::to_string(n));
        }
        if (static_cast<int>(sim.xi0.size()) != sym_size(n)) {
            errors.push_back("sim.xi0: length " + std::to_string(sim.xi0.size())
                             + " does not match n(n+1)/2 = " + std::to_string(sym_size(n)));
        }
        if (sim.settle_target && static_cast<int>(sim.settle_target->size()) != n) {
            errors.push_back("sim.settle_target: length does not match cost dimension");
        }
    }
    if (!(sim.t_end >= 0.0) || !std::isfinite(sim.t_end)) {
        errors.push_back("sim.t_end: must be finite and non-negative");
    }
    if (!(sim.settle_tol > 0.0)) errors.push_back("sim.settle_tol: must be positive");
    if (!is_power_of_two(sim.substeps)) {
        errors.push_back("sim.substeps: must be a power of two");
    }
    if (sim.record_stride < 1) errors.push_back("sim.record_stride: must be at least 1");
    if (sim.dt) {
        if (!(*sim.dt > 0.0)) {
            errors.push_back("sim.dt: must be positive");
        } else if (dither_ok) {
            const double limit = common_period(dither_spec()) / 32.0;
            if (*sim.dt > limit * (1.0 + 1e-12)) {
                std::ostringstream os;
                os.precision(6);
                os << "sim.dt: " << *sim.dt << " exceeds common_period/32 = " << limit;
                errors.push_back(os.str());
            }
        }
    }
    if (output.prefix.empty()) errors.push_back("output.prefix: must not be empty");
    return errors;
}

// ---------------------------------------------------------------------------

ExperimentConfig parse_config_text(const std::string& text, const std::string& source_name)
{
    std::vector<std::string> errors;
    pt::ptree tree;
    try {
        std::istringstream is(text);
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError({source_name + ": " + e.message() + " (line "
                           + std::to_string(e.line()) + ")"});
    }

    for (const auto& [section, node] : tree) {
        const auto known = known_keys().find(section);
        if (known == known_keys().end()) {
            if (node.empty()) {
                errors.push_back(section + ": key outside any section");
            } else {
                errors.push_back(section + ": unknown section");
            }
            continue;
        }
        for (const auto& kv : node) {
            if (!known->second.count(kv.first)) {
                errors.push_back(section + "." + kv.first + ": unknown key");
            }
        }
    }
    for (const auto& [section, keys] : known_keys()) {
        if (!tree.get_child_optional(section)) errors.push_back(section + ": missing section");
    }

    ExperimentConfig cfg;
    cfg.source_path = source_name;
    cfg.source_text = text;
    Reader r(tree, errors);

    if (auto kind = r.word("cost", "kind", true)) {
        cfg.cost.kind = *kind;
        if (*kind == "quadratic") {
            assign(cfg.cost.hstar, r.vector("cost", "hstar", true));
            assign(cfg.cost.xstar, r.vector("cost", "xstar", true));
            assign(cfg.cost.ystar, r.number("cost", "ystar", true));
        } else if (*kind == "polynomial") {
            assign(cfg.cost.dim, r.integer("cost", "dim", true));
            if (auto rows = r.matrix("cost", "terms", true)) {
                for (const auto& row : *rows) {
                    if (static_cast<int>(row.size()) != cfg.cost.dim + 1) {
                        errors.push_back("cost.terms: each row needs coefficient plus "
                                         + std::to_string(cfg.cost.dim) + " exponents");
                        break;
                    }
                    PolyTerm t;
                    t.coeff = row[0];
                    bool ok = true;
                    for (std::size_t i = 1; i < row.size(); ++i) {
                        if (row[i] < 0 || row[i] != std::floor(row[i])) ok = false;
                        t.exponents.push_back(static_cast<int>(row[i]));
                    }
                    if (!ok) {
                        errors.push_back("cost.terms: exponents must be non-negative integers");
                        break;
                    }
                    cfg.cost.terms.push_back(std::move(t));
                }
            }
        } else {
            errors.push_back("cost.kind: must be quadratic or polynomial, got '" + *kind + "'");
        }
    }

    assign(cfg.dither.a, r.number("dither", "a", true));
    assign(cfg.dither.omegas, r.vector("dither", "omegas", true));
    if (auto s = r.number("dither", "offdiag_scale", false)) cfg.dither.offdiag_scale = *s;

    assign(cfg.flow.q1, r.number("flow", "q1", true));
    assign(cfg.flow.q2, r.number("flow", "q2", true));
    assign(cfg.flow.c1, r.number("flow", "c1", true));
    assign(cfg.flow.c2, r.number("flow", "c2", true));
    if (auto e = r.number("flow", "sing_eps", false)) cfg.flow.sing_eps = *e;

    assign(cfg.gains.k, r.number("gains", "k", true));
    assign(cfg.gains.K, r.number("gains", "K", true));
    assign(cfg.gains.K2, r.number("gains", "K2", true));

    assign(cfg.sim.t_end, r.number("sim", "t_end", true));
    if (auto dt = r.number("sim", "dt", false)) cfg.sim.dt = *dt;
    assign(cfg.sim.x0, r.vector("sim", "x0", true));
    assign(cfg.sim.v0, r.vector("sim", "v0", true, /*allow_scalar=*/true));
    assign(cfg.sim.xi0, r.vector("sim", "xi0", true));
    assign(cfg.sim.settle_tol, r.number("sim", "settle_tol", true));
    if (auto st = r.vector("sim", "settle_target", false)) cfg.sim.settle_target = *st;
    assign(cfg.sim.substeps, r.integer("sim", "substeps", false));
    assign(cfg.sim.record_stride, r.integer("sim", "record_stride", false));
    assign(cfg.sim.hessian_floor, r.boolean("sim", "hessian_floor"));
    if (auto mode = r.word("sim", "averaging", false)) {
        if (*mode == "argument") {
            cfg.sim.averaging = AveragingMode::kArgument;
        } else if (*mode == "field") {
            cfg.sim.averaging = AveragingMode::kField;
        } else {
            errors.push_back("sim.averaging: must be argument or field, got '" + *mode + "'");
        }
    }

    assign(cfg.output.directory, r.word("output", "directory", true));
    assign(cfg.output.prefix, r.word("output", "prefix", true));

    if (errors.empty()) {
        for (std::string& e : cfg.check()) errors.push_back(std::move(e));
    }
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::ios_base::failure("cannot open config file " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

// ---------------------------------------------------------------------------

void set_param(ExperimentConfig& cfg, const std::string& path, double value)
{
    static const std::regex re(R"(^([a-z]+)\.([A-Za-z0-9_]+)(?:\[(\d+)\])?$)");
    std::smatch m;
    if (!std::regex_match(path, m, re)) {
        throw ConfigError({path + ": expected section.key or section.key[index]"});
    }
    const std::string section = m[1], key = m[2];
    const std::optional<std::size_t> index =
        m[3].matched ? std::optional<std::size_t>(std::stoul(m[3])) : std::nullopt;

    const auto scalar = [&](double& dst) {
        if (index) throw ConfigError({path + ": key is a scalar, index not allowed"});
        dst = value;
    };
    const auto component = [&](std::vector<double>& dst) {
        if (!index) throw ConfigError({path + ": key is a vector, give an index"});
        if (*index >= dst.size()) {
            throw ConfigError({path + ": index out of range (size "
                               + std::to_string(dst.size()) + ")"});
        }
        dst[*index] = value;
    };

    const std::string full = section + "." + key;
    if (full == "dither.a") scalar(cfg.dither.a);
    else if (full == "dither.omegas") component(cfg.dither.omegas);
    else if (full == "dither.offdiag_scale") {
        double s = 0;
        scalar(s);
        cfg.dither.offdiag_scale = s;
    } else if (full == "flow.q1") scalar(cfg.flow.q1);
    else if (full == "flow.q2") scalar(cfg.flow.q2);
    else if (full == "flow.c1") scalar(cfg.flow.c1);
    else if (full == "flow.c2") scalar(cfg.flow.c2);
    else if (full == "gains.k") scalar(cfg.gains.k);
    else if (full == "gains.K") scalar(cfg.gains.K);
    else if (full == "gains.K2") scalar(cfg.gains.K2);
    else if (full == "sim.t_end") scalar(cfg.sim.t_end);
    else if (full == "sim.settle_tol") scalar(cfg.sim.settle_tol);
    else if (full == "sim.dt") {
        double dt = 0;
        scalar(dt);
        cfg.sim.dt = dt;
    } else if (full == "sim.x0") component(cfg.sim.x0);
    else if (full == "sim.v0") {
        if (cfg.sim.v0.size() == 1) cfg.sim.v0.assign(static_cast<std::size_t>(cfg.dim()), cfg.sim.v0[0]);
        component(cfg.sim.v0);
    } else if (full == "sim.xi0") component(cfg.sim.xi0);
    else if (full == "cost.ystar") scalar(cfg.cost.ystar);
    else if (full == "cost.xstar") component(cfg.cost.xstar);
    else if (full == "cost.hstar") component(cfg.cost.hstar);
    else throw ConfigError({path + ": parameter cannot be swept"});

    std::ostringstream os;
    os.precision(17);
    os << path << " = " << value;
    cfg.overrides.push_back(os.str());

    std::vector<std::string> errors = cfg.check();
    if (!errors.empty()) throw ConfigError(std::move(errors));
}

}  // namespace ftns
