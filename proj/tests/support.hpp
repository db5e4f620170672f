// SPDX-License-Identifier: Apache-2.0
// Shared fixtures: the two-input reference case (quadratic map with minimizer
// (1, 2), dither 150/200 rad/s, k=5, K=10, K2=100).
#pragma once

#include "ftns/controller.hpp"
#include "ftns/sim.hpp"

#include <Eigen/Core>

#include <random>
#include <string>

namespace ftns::testing {

inline FlowParams ref_flow() { return FlowParams::make(3.0, 1.5, 1.0, 1e-4); }
inline GainSet ref_gains() { return GainSet::make(5.0, 10.0, 100.0); }
inline DitherSpec ref_dither() { return DitherSpec::make(1.0, std::vector<double>{150.0, 200.0}); }
inline CostModel ref_model() { return CostModel::reference_quadratic(); }

inline Eigen::VectorXd vec(std::initializer_list<double> xs)
{
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

inline EscState ref_state()
{
    return {vec({0, 1}), vec({0.01, 0.01}), SymVec(vec({1, 0, 1}))};
}

inline TargetState ref_target_state() { return {vec({0, 1}), vec({0.01, 0.01})}; }

inline Eigen::VectorXd uniform(std::mt19937_64& rng, int n, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = u(rng);
    return v;
}

inline double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1.0); }

inline std::string config_path(const std::string& name)
{
    return std::string(FTNS_CONFIG_DIR) + "/" + name;
}

}  // namespace ftns::testing

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ftns::testing {

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream out(p, std::ios::binary);
    out << text;
}

/// The bundled reference config with line `from` replaced by `to`; `to` empty
/// deletes the line.
inline std::string ref_config_text(
    std::initializer_list<std::pair<std::string, std::string>> edits = {})
{
    std::string text = read_file(config_path("paper_sec4.cfg"));
    for (const auto& [from, to] : edits) {
        const auto pos = text.find(from);
        if (pos == std::string::npos) throw std::runtime_error("no line '" + from + "'");
        text.replace(pos, from.size(), to);
    }
    return text;
}

/// Fresh scratch directory removed on destruction.
class ScratchDir {
  public:
    explicit ScratchDir(const std::string& tag)
        : path_(std::filesystem::temp_directory_path() /
                ("ftns_" + tag + "_" + std::to_string(std::hash<std::string>{}(tag + std::to_string(counter()++)))))
    {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() { std::filesystem::remove_all(path_); }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  private:
    static int& counter()
    {
        static int c = 0;
        return c;
    }
    std::filesystem::path path_;
};

}  // namespace ftns::testing
