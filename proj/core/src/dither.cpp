// SPDX-License-Identifier: Apache-2.0
#include "ftns/dither.hpp"

#include "ftns/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <sstream>

namespace ftns {

namespace {

constexpr std::int64_t kMaxDenominator = 1000;
constexpr double kRatioTol = 1e-9;
constexpr double kMaxHarmonic = 1e5;
constexpr double kOracleTol = 1e-8;

struct Fraction {
    std::int64_t num;
    std::int64_t den;
};

// Best continued-fraction convergent of r with bounded denominator.
std::optional<Fraction> rationalize(double r)
{
    std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double x = r;
    for (int it = 0; it < 64; ++it) {
        const double fl = std::floor(x);
        const auto a = static_cast<std::int64_t>(fl);
        const std::int64_t h2 = a * h1 + h0;
        const std::int64_t k2 = a * k1 + k0;
        if (k2 > kMaxDenominator) break;
        h0 = h1, h1 = h2, k0 = k1, k1 = k2;
        if (std::abs(static_cast<double>(h1) / static_cast<double>(k1) - r)
            <= kRatioTol * std::abs(r)) {
            return Fraction{h1, k1};
        }
        const double frac = x - fl;
        if (frac < 1e-15) break;
        x = 1.0 / frac;
    }
    return std::nullopt;
}

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

}  // namespace

int sym_dim(int m)
{
    int n = 0;
    while (sym_size(n) < m) ++n;
    if (sym_size(n) != m) {
        throw ShapeError("length " + std::to_string(m) + " is not n(n+1)/2 for any n");
    }
    return n;
}

int sym_index(int n, int i, int j)
{
    if (i > j) std::swap(i, j);
    // Rows 0..i-1 contribute n, n-1, ..., n-i+1 entries.
    return i * n - i * (i - 1) / 2 + (j - i);
}

SymVec::SymVec(Eigen::VectorXd entries)
    : entries_(std::move(entries)), n_(sym_dim(static_cast<int>(entries_.size())))
{
}

SymVec SymVec::zero(int n)
{
    return SymVec(Eigen::VectorXd::Zero(sym_size(n)));
}

double SymVec::at(int i, int j) const
{
    return entries_[sym_index(n_, i, j)];
}

SymVec vec_sym(const Eigen::Ref<const Eigen::MatrixXd>& s)
{
    if (s.rows() != s.cols()) {
        throw ShapeError("vec_sym needs a square matrix");
    }
    const int n = static_cast<int>(s.rows());
    const double scale = std::max(s.cwiseAbs().maxCoeff(), 1e-300);
    Eigen::VectorXd out(sym_size(n));
    int idx = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            if (std::abs(s(i, j) - s(j, i)) > 1e-12 * scale) {
                throw ShapeError("vec_sym: matrix is not symmetric at (" + std::to_string(i)
                                 + ", " + std::to_string(j) + ")");
            }
            out[idx++] = s(i, j);
        }
    }
    return SymVec(std::move(out));
}

void unvec_sym_into(const Eigen::Ref<const Eigen::VectorXd>& s, int n,
                    Eigen::Ref<Eigen::MatrixXd> out)
{
    int idx = 0;
    for (int i = 0; i < n; ++i) {
        out(i, i) = s[idx++];
        for (int j = i + 1; j < n; ++j) {
            out(i, j) = s[idx];
            out(j, i) = s[idx];
            ++idx;
        }
    }
}

Eigen::MatrixXd unvec_sym(const SymVec& s)
{
    Eigen::MatrixXd out(s.n(), s.n());
    unvec_sym_into(s.entries(), s.n(), out);
    return out;
}

DitherSpec DitherSpec::make(double a, std::vector<double> omegas,
                            std::optional<double> offdiag_scale)
{
    if (!(a > 0.0)) throw ParameterError("dither amplitude a must be positive");
    if (omegas.empty()) throw ParameterError("at least one dither frequency is required");
    for (double w : omegas) {
        if (!(w > 0.0)) throw ParameterError("dither frequencies must be positive");
    }
    const double scale = offdiag_scale.value_or(default_offdiag_scale(a));
    if (!(scale > 0.0)) throw ParameterError("offdiag_scale must be positive");

    DitherSpec d;
    d.a_ = a;
    d.omegas_ = Eigen::Map<const Eigen::VectorXd>(omegas.data(),
                                                  static_cast<Eigen::Index>(omegas.size()));
    d.offdiag_scale_ = scale;
    return d;
}

Eigen::VectorXd probe(double t, const DitherSpec& d)
{
    return (d.omegas() * t).array().sin().matrix();
}

namespace {

void demod_from_probe(const Eigen::Ref<const Eigen::VectorXd>& m, const DitherSpec& d,
                      Eigen::Ref<Eigen::VectorXd> out)
{
    const int n = static_cast<int>(m.size());
    const double diag = 16.0 / (d.a() * d.a());
    int idx = 0;
    for (int i = 0; i < n; ++i) {
        out[idx++] = diag * (m[i] * m[i] - 0.5);
        for (int j = i + 1; j < n; ++j) {
            out[idx++] = d.offdiag_scale() * m[i] * m[j];
        }
    }
}

}  // namespace

SymVec hess_demod(double t, const DitherSpec& d)
{
    Eigen::VectorXd out(sym_size(d.n()));
    demod_from_probe(probe(t, d), d, out);
    return SymVec(std::move(out));
}

Eigen::VectorXd delta1(double y_probe, double t, const DitherSpec& d)
{
    return (2.0 / d.a()) * y_probe * probe(t, d);
}

SymVec delta2(double y_probe, double t, const DitherSpec& d)
{
    SymVec s = hess_demod(t, d);
    s.entries() *= y_probe;
    return s;
}

double base_frequency(const DitherSpec& d)
{
    const Eigen::VectorXd& w = d.omegas();
    std::vector<Fraction> ratios;
    std::int64_t lcm = 1;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const auto f = rationalize(w[i] / w[0]);
        if (!f) {
            throw ValidationError("frequency ratio " + fmt(w[i]) + "/" + fmt(w[0])
                                  + " is not rational");
        }
        ratios.push_back(*f);
        lcm = std::lcm(lcm, f->den);
        if (lcm > kMaxDenominator * kMaxDenominator) {
            throw ValidationError("frequency ratios have no common period of practical length");
        }
    }
    std::int64_t g = 0;
    std::int64_t max_mult = 0;
    for (const Fraction& f : ratios) {
        const std::int64_t mult = f.num * (lcm / f.den);
        g = std::gcd(g, mult);
        max_mult = std::max(max_mult, mult);
    }
    if (static_cast<double>(max_mult) / static_cast<double>(g) > kMaxHarmonic) {
        throw ValidationError("common dither period exceeds " + fmt(kMaxHarmonic)
                              + " cycles of the fastest frequency");
    }
    return w[0] * static_cast<double>(g) / static_cast<double>(lcm);
}

double common_period(const DitherSpec& d)
{
    return 2.0 * std::numbers::pi / base_frequency(d);
}

int default_node_count(const DitherSpec& d)
{
    const double harmonic = d.omegas().maxCoeff() / base_frequency(d);
    return std::max(256, static_cast<int>(std::ceil(32.0 * harmonic - 1e-9)));
}

DemodGrid make_grid(const DitherSpec& d, std::optional<int> nodes)
{
    const int count = nodes.value_or(default_node_count(d));
    if (count < 1) throw ParameterError("quadrature needs at least one node");
    DemodGrid grid;
    grid.period = common_period(d);
    grid.times.resize(static_cast<std::size_t>(count));
    grid.probes.resize(d.n(), count);
    grid.demods.resize(sym_size(d.n()), count);
    for (int j = 0; j < count; ++j) {
        const double t = grid.period * static_cast<double>(j) / static_cast<double>(count);
        grid.times[static_cast<std::size_t>(j)] = t;
        grid.probes.col(j) = probe(t, d);
        demod_from_probe(grid.probes.col(j), d, grid.demods.col(j));
    }
    return grid;
}

std::string to_string(ViolationKind kind)
{
    switch (kind) {
    case ViolationKind::kDimensionMismatch: return "dimension_mismatch";
    case ViolationKind::kNonPositive: return "non_positive_frequency";
    case ViolationKind::kDuplicate: return "duplicate_frequency";
    case ViolationKind::kIrrationalRatio: return "irrational_ratio";
    case ViolationKind::kGradientResidual: return "gradient_oracle_residual";
    case ViolationKind::kHessianResidual: return "hessian_oracle_residual";
    }
    return "unknown";
}

namespace {

// Canonical diagonally dominant quadratic used by the orthogonality oracle.
struct CanonicalQuadratic {
    Eigen::MatrixXd h;
    Eigen::VectorXd xstar;

    explicit CanonicalQuadratic(int n) : h(n, n), xstar(n)
    {
        for (int i = 0; i < n; ++i) {
            xstar[i] = 0.5 * (i + 1);
            for (int j = 0; j < n; ++j) {
                h(i, j) = (i == j) ? n + 1.0 + i : 1.0 / (1.0 + i + j);
            }
        }
    }

    double eval(const Eigen::VectorXd& x) const
    {
        const Eigen::VectorXd dx = x - xstar;
        return 1.0 + 0.5 * dx.dot(h * dx);
    }
};

void oracle_check(const DitherSpec& d, FreqReport& report)
{
    const int n = d.n();
    const DitherSpec canon = DitherSpec::make(
        d.a(), std::vector<double>(d.omegas().data(), d.omegas().data() + n));
    const DemodGrid grid = make_grid(canon);
    const CanonicalQuadratic q(n);
    const Eigen::VectorXd hvec = vec_sym(q.h).entries();

    std::vector<Eigen::VectorXd> points;
    points.push_back(q.xstar);
    Eigen::VectorXd p1(n), p2(n);
    for (int i = 0; i < n; ++i) {
        p1[i] = q.xstar[i] + ((i % 2 == 0) ? 0.3 : -0.3) * (i + 1);
        p2[i] = q.xstar[i] + 1.7 - 0.2 * i;
    }
    points.push_back(p1);
    points.push_back(p2);

    double grad_res = 0, hess_res = 0;
    Eigen::VectorXd probe_x(n);
    for (const Eigen::VectorXd& x : points) {
        Eigen::VectorXd g_avg = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd h_avg = Eigen::VectorXd::Zero(hvec.size());
        for (int j = 0; j < grid.nodes(); ++j) {
            probe_x = x + canon.a() * grid.probes.col(j);
            const double y = q.eval(probe_x);
            g_avg += (2.0 / canon.a()) * y * grid.probes.col(j);
            h_avg += y * grid.demods.col(j);
        }
        g_avg /= grid.nodes();
        h_avg /= grid.nodes();
        const Eigen::VectorXd g = q.h * (x - q.xstar);
        grad_res = std::max(grad_res, (g_avg - g).norm() / std::max(g.norm(), 1.0));
        hess_res = std::max(hess_res, (h_avg - hvec).norm() / hvec.norm());
    }
    if (!(grad_res <= kOracleTol)) {
        report.violations.push_back({ViolationKind::kGradientResidual,
                                     "averaged delta1 misses the gradient by relative "
                                         + fmt(grad_res),
                                     grad_res});
    }
    if (!(hess_res <= kOracleTol)) {
        report.violations.push_back({ViolationKind::kHessianResidual,
                                     "averaged delta2 misses vec(H) by relative "
                                         + fmt(hess_res),
                                     hess_res});
    }
}

}  // namespace

FreqReport validate_freqs(const DitherSpec& d, int n)
{
    FreqReport report;
    const Eigen::VectorXd& w = d.omegas();
    if (d.n() != n) {
        report.violations.push_back({ViolationKind::kDimensionMismatch,
                                     "expected " + std::to_string(n) + " frequencies, got "
                                         + std::to_string(d.n()),
                                     static_cast<double>(d.n())});
    }
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (!(w[i] > 0.0)) {
            report.violations.push_back(
                {ViolationKind::kNonPositive, "frequency " + fmt(w[i]) + " is not positive",
                 w[i]});
        }
        for (Eigen::Index j = i + 1; j < w.size(); ++j) {
            if (std::abs(w[i] - w[j]) <= 1e-12 * std::max(std::abs(w[i]), std::abs(w[j]))) {
                report.violations.push_back({ViolationKind::kDuplicate,
                                             "duplicate frequency " + fmt(w[i]) + " at indices "
                                                 + std::to_string(i) + " and "
                                                 + std::to_string(j),
                                             w[i]});
            }
        }
    }
    if (!report.ok()) return report;

    try {
        (void)base_frequency(d);
    } catch (const ValidationError& e) {
        report.violations.push_back({ViolationKind::kIrrationalRatio, e.what(), 0.0});
        return report;
    }
    oracle_check(d, report);
    return report;
}

void require_valid(const DitherSpec& d, int n)
{
    const FreqReport report = validate_freqs(d, n);
    if (report.ok()) return;
    std::string msg = "dither frequencies rejected:";
    for (const Violation& v : report.violations) {
        msg += " [" + to_string(v.kind) + "] " + v.message + ";";
    }
    throw ValidationError(msg);
}

}  // namespace ftns
