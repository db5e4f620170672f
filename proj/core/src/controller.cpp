// SPDX-License-Identifier: Apache-2.0
#include "ftns/controller.hpp"

#include "ftns/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace ftns {

GainSet GainSet::make(double k, double K, double K2)
{
    if (!(k > 0.0)) throw ParameterError("gain k must be positive");
    if (!(K > 0.0)) throw ParameterError("gain K must be positive");
    if (!(K2 > 0.0)) throw ParameterError("gain K2 must be positive");
    return {k, K, K2};
}

Eigen::VectorXd pack(const EscState& s)
{
    const int n = s.n();
    if (s.v.size() != n || s.xi.size() != sym_size(n)) {
        throw ShapeError("inconsistent EscState dimensions");
    }
    Eigen::VectorXd y(2 * n + sym_size(n));
    y << s.x, s.v, s.xi.entries();
    return y;
}

Eigen::VectorXd pack(const TargetState& s)
{
    if (s.v.size() != s.x.size()) throw ShapeError("inconsistent TargetState dimensions");
    Eigen::VectorXd y(2 * s.n());
    y << s.x, s.v;
    return y;
}

EscState unpack_esc(const Eigen::Ref<const Eigen::VectorXd>& y, int n)
{
    if (y.size() != 2 * n + sym_size(n)) throw ShapeError("packed ESC state has wrong length");
    return {y.head(n), y.segment(n, n), SymVec(y.tail(sym_size(n)))};
}

TargetState unpack_target(const Eigen::Ref<const Eigen::VectorXd>& y, int n)
{
    if (y.size() != 2 * n) throw ShapeError("packed target state has wrong length");
    return {y.head(n), y.segment(n, n)};
}

Eigen::MatrixXd apply_floor(const Eigen::Ref<const Eigen::MatrixXd>& h,
                            const HessianFloor& floor)
{
    if (!floor.enabled) return h;
    const double level = floor.rel * std::abs(h.trace()) / static_cast<double>(h.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(level);
    return es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
}

// ---------------------------------------------------------------------------

EscSystem::EscSystem(GainSet gains, FlowParams flow, DitherSpec dither, CostModel model,
                     HessianFloor floor)
    : gains_(gains),
      flow_(flow),
      dither_(std::move(dither)),
      model_(std::move(model)),
      floor_(floor)
{
    require_valid(dither_, model_.dim());
}

void EscSystem::operator()(double t, const Eigen::Ref<const Eigen::VectorXd>& y,
                           Eigen::Ref<Eigen::VectorXd> dy) const
{
    const int n = this->n();
    const int m = sym_size(n);
    const auto x = y.head(n);
    const auto v = y.segment(n, n);
    const auto xi = y.tail(m);

    const Eigen::VectorXd probe_t = probe(t, dither_);
    const Eigen::VectorXd xp = x + dither_.a() * probe_t;
    const double y_probe = model_.eval(xp);

    Eigen::MatrixXd h(n, n);
    unvec_sym_into(xi, n, h);
    if (floor_.enabled) h = apply_floor(h, floor_);

    scaled_flow_into(v, flow_, dy.head(n));
    dy.head(n) *= gains_.k;

    const Eigen::VectorXd w = h * v + (2.0 / dither_.a()) * y_probe * probe_t;
    scaled_flow_into(w, flow_, dy.segment(n, n));
    dy.segment(n, n) *= -gains_.K;

    Eigen::VectorXd e(m);
    int idx = 0;
    const double diag = 16.0 / (dither_.a() * dither_.a());
    for (int i = 0; i < n; ++i) {
        e[idx] = xi[idx] - y_probe * diag * (probe_t[i] * probe_t[i] - 0.5);
        ++idx;
        for (int j = i + 1; j < n; ++j) {
            e[idx] = xi[idx] - y_probe * dither_.offdiag_scale() * probe_t[i] * probe_t[j];
            ++idx;
        }
    }
    scaled_flow_into(e, flow_, dy.tail(m));
    dy.tail(m) *= -gains_.K2;
}

EscState EscSystem::rhs(double t, const EscState& s) const
{
    Eigen::VectorXd dy(state_size());
    (*this)(t, pack(s), dy);
    return unpack_esc(dy, n());
}

// ---------------------------------------------------------------------------

TargetSystem::TargetSystem(GainSet gains, FlowParams flow, CostModel model)
    : gains_(gains), flow_(flow), model_(std::move(model))
{
    if (!model_.has_oracles()) {
        throw UnsupportedError("target system needs analytic gradient and Hessian oracles");
    }
}

void TargetSystem::operator()(double /*t*/, const Eigen::Ref<const Eigen::VectorXd>& y,
                              Eigen::Ref<Eigen::VectorXd> dy) const
{
    const int n = this->n();
    const auto x = y.head(n);
    const auto v = y.segment(n, n);

    scaled_flow_into(v, flow_, dy.head(n));
    dy.head(n) *= gains_.k;

    const Eigen::VectorXd w = model_.hess(x) * v + model_.grad(x);
    scaled_flow_into(w, flow_, dy.tail(n));
    dy.tail(n) *= -gains_.K;
}

TargetState TargetSystem::rhs(const TargetState& s) const
{
    Eigen::VectorXd dy(state_size());
    (*this)(0.0, pack(s), dy);
    return unpack_target(dy, n());
}

// ---------------------------------------------------------------------------

DemodAverages demod_averages(const Eigen::Ref<const Eigen::VectorXd>& x, const DitherSpec& d,
                             const CostModel& m, const DemodGrid& grid)
{
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd h = Eigen::VectorXd::Zero(sym_size(n));
    Eigen::VectorXd xp(n);
    for (int j = 0; j < grid.nodes(); ++j) {
        xp.noalias() = x + d.a() * grid.probes.col(j);
        const double y = m.eval(xp);
        g.noalias() += y * grid.probes.col(j);
        h.noalias() += y * grid.demods.col(j);
    }
    g *= 2.0 / (d.a() * grid.nodes());
    h /= grid.nodes();
    return {std::move(g), SymVec(std::move(h))};
}

AveragedSystem::AveragedSystem(GainSet gains, FlowParams flow, DitherSpec dither,
                               CostModel model, AveragingMode mode, HessianFloor floor,
                               std::optional<int> nodes)
    : gains_(gains),
      flow_(flow),
      dither_(std::move(dither)),
      model_(std::move(model)),
      mode_(mode),
      floor_(floor)
{
    require_valid(dither_, model_.dim());
    grid_ = make_grid(dither_, nodes);
}

void AveragedSystem::operator()(double /*t*/, const Eigen::Ref<const Eigen::VectorXd>& y,
                                Eigen::Ref<Eigen::VectorXd> dy) const
{
    const int n = this->n();
    const int m = sym_size(n);
    const auto x = y.head(n);
    const auto v = y.segment(n, n);
    const auto xi = y.tail(m);

    Eigen::MatrixXd h(n, n);
    unvec_sym_into(xi, n, h);
    if (floor_.enabled) h = apply_floor(h, floor_);

    scaled_flow_into(v, flow_, dy.head(n));
    dy.head(n) *= gains_.k;

    if (mode_ == AveragingMode::kArgument) {
        const DemodAverages avg = demod_averages(x, dither_, model_, grid_);
        const Eigen::VectorXd w = h * v + avg.grad;
        scaled_flow_into(w, flow_, dy.segment(n, n));
        const Eigen::VectorXd e = xi - avg.hess.entries();
        scaled_flow_into(e, flow_, dy.tail(m));
    } else {
        const Eigen::VectorXd hv = h * v;
        Eigen::VectorXd xp(n), w(n), fw(n), e(m), fe(m);
        Eigen::VectorXd acc_v = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd acc_xi = Eigen::VectorXd::Zero(m);
        for (int j = 0; j < grid_.nodes(); ++j) {
            xp.noalias() = x + dither_.a() * grid_.probes.col(j);
            const double yp = model_.eval(xp);
            w.noalias() = hv + (2.0 / dither_.a()) * yp * grid_.probes.col(j);
            scaled_flow_into(w, flow_, fw);
            acc_v += fw;
            e.noalias() = xi - yp * grid_.demods.col(j);
            scaled_flow_into(e, flow_, fe);
            acc_xi += fe;
        }
        dy.segment(n, n) = acc_v / grid_.nodes();
        dy.tail(m) = acc_xi / grid_.nodes();
    }
    dy.segment(n, n) *= -gains_.K;
    dy.tail(m) *= -gains_.K2;
}

EscState AveragedSystem::rhs(const EscState& s) const
{
    Eigen::VectorXd dy(state_size());
    (*this)(0.0, pack(s), dy);
    return unpack_esc(dy, n());
}

// ---------------------------------------------------------------------------

EscState esc_rhs(double t, const EscState& s, const GainSet& g, const FlowParams& p,
                 const DitherSpec& d, const CostModel& m)
{
    return EscSystem(g, p, d, m).rhs(t, s);
}

TargetState target_rhs(const TargetState& s, const GainSet& g, const FlowParams& p,
                       const CostModel& m)
{
    return TargetSystem(g, p, m).rhs(s);
}

EscState averaged_rhs(const EscState& s, const GainSet& g, const FlowParams& p,
                      const DitherSpec& d, const CostModel& m, AveragingMode mode)
{
    return AveragedSystem(g, p, d, m, mode).rhs(s);
}

ZG to_zg(const TargetState& s, const CostModel& m)
{
    Eigen::VectorXd g = m.grad(s.x);
    Eigen::VectorXd z = m.hess(s.x) * s.v + g;
    return {std::move(z), std::move(g)};
}

ZG to_zg(const EscState& s, const CostModel& m)
{
    Eigen::VectorXd g = m.grad(s.x);
    Eigen::VectorXd z = unvec_sym(s.xi) * s.v + g;
    return {std::move(z), std::move(g)};
}

double lyapunov_V1(const Eigen::Ref<const Eigen::VectorXd>& z,
                   const Eigen::Ref<const Eigen::VectorXd>& g)
{
    return 0.5 * z.squaredNorm() + 0.5 * g.squaredNorm();
}

double lyapunov_V2(const SymVec& xi, const CostModel& m)
{
    const SymVec target = vec_sym(m.hstar());
    if (target.size() != xi.size()) throw ShapeError("xi does not match the model dimension");
    return 0.5 * (xi.entries() - target.entries()).squaredNorm();
}

double lyapunov_V3(const Eigen::Ref<const Eigen::VectorXd>& z,
                   const Eigen::Ref<const Eigen::VectorXd>& g)
{
    return lyapunov_V1(z, g);
}

GainThreshold gain_threshold(const CostModel& m, double k, const FlowParams& p)
{
    if (!m.is_quadratic()) {
        throw UnsupportedError("gain_threshold requires a quadratic model");
    }
    const Spectrum sp = spectrum(m.hstar());
    const double lmin = sp.lambda_min;
    const double lmax = sp.lambda_max;
    const double a1 = p.alpha1();
    const double a2 = p.alpha2();

    GainThreshold out{};
    out.k1min = std::pow(std::pow(lmin, -2.0) * (1.0 - a1) / (2.0 - a1), 1.0 - a1);
    out.k2min = std::pow(std::pow(lmax, a2 - 2.0) / std::pow(lmin, a2) * (1.0 - a2) / (2.0 - a2),
                         1.0 - a2);
    const double t1 = out.k1min / (2.0 - a1) * std::pow(lmax, 2.0 - a1) / lmin;
    const double t2 = out.k2min / (2.0 - a2) * std::pow(lmax, 2.0 - a2) / lmin;
    out.Kstar = 2.0 * k * std::max(t1, t2);
    return out;
}

}  // namespace ftns
