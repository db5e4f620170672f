// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ftns/dither.hpp"
#include "ftns/flows.hpp"
#include "ftns/plant.hpp"

#include <Eigen/Core>

#include <optional>

namespace ftns {

/// k drives x, K the Newton direction v, K2 the Hessian estimate xi.
struct GainSet {
    double k = 0;
    double K = 0;
    double K2 = 0;

    static GainSet make(double k, double K, double K2);
};

struct EscState {
    Eigen::VectorXd x;
    Eigen::VectorXd v;
    SymVec xi;

    int n() const { return static_cast<int>(x.size()); }
};

struct TargetState {
    Eigen::VectorXd x;
    Eigen::VectorXd v;

    int n() const { return static_cast<int>(x.size()); }
};

// Flat layouts used by the integrator: [x; v; xi] and [x; v].
Eigen::VectorXd pack(const EscState& s);
Eigen::VectorXd pack(const TargetState& s);
EscState unpack_esc(const Eigen::Ref<const Eigen::VectorXd>& y, int n);
TargetState unpack_target(const Eigen::Ref<const Eigen::VectorXd>& y, int n);

/// Optional eigenvalue floor on unvec(xi) where it enters the v equation.
/// Off by default; the floor is rel * |trace| / n.
struct HessianFloor {
    bool enabled = false;
    double rel = 1e-3;
};

Eigen::MatrixXd apply_floor(const Eigen::Ref<const Eigen::MatrixXd>& h,
                            const HessianFloor& floor);

enum class AveragingMode {
    /// gamma applied to the period average of its argument.
    kArgument,
    /// period average of gamma(w(t)) w(t), term by term.
    kField,
};

/// Closed-loop Newton seeking system driven by the dither.
class EscSystem {
  public:
    EscSystem(GainSet gains, FlowParams flow, DitherSpec dither, CostModel model,
              HessianFloor floor = {});

    int n() const { return model_.dim(); }
    int state_size() const { return 2 * n() + sym_size(n()); }

    void operator()(double t, const Eigen::Ref<const Eigen::VectorXd>& y,
                    Eigen::Ref<Eigen::VectorXd> dy) const;
    EscState rhs(double t, const EscState& s) const;

    const GainSet& gains() const { return gains_; }
    const FlowParams& flow() const { return flow_; }
    const DitherSpec& dither() const { return dither_; }
    const CostModel& model() const { return model_; }
    const HessianFloor& floor() const { return floor_; }

  private:
    GainSet gains_;
    FlowParams flow_;
    DitherSpec dither_;
    CostModel model_;
    HessianFloor floor_;
};

/// Ideal Newton flow built from the analytic gradient and Hessian.
class TargetSystem {
  public:
    TargetSystem(GainSet gains, FlowParams flow, CostModel model);

    int n() const { return model_.dim(); }
    int state_size() const { return 2 * n(); }

    void operator()(double t, const Eigen::Ref<const Eigen::VectorXd>& y,
                    Eigen::Ref<Eigen::VectorXd> dy) const;
    TargetState rhs(const TargetState& s) const;

    const CostModel& model() const { return model_; }

  private:
    GainSet gains_;
    FlowParams flow_;
    CostModel model_;
};

/// Frozen-state average of the ESC vector field over one common period.
class AveragedSystem {
  public:
    AveragedSystem(GainSet gains, FlowParams flow, DitherSpec dither, CostModel model,
                   AveragingMode mode = AveragingMode::kArgument,
                   HessianFloor floor = {}, std::optional<int> nodes = std::nullopt);

    int n() const { return model_.dim(); }
    int state_size() const { return 2 * n() + sym_size(n()); }

    void operator()(double t, const Eigen::Ref<const Eigen::VectorXd>& y,
                    Eigen::Ref<Eigen::VectorXd> dy) const;
    EscState rhs(const EscState& s) const;

    const DemodGrid& grid() const { return grid_; }
    AveragingMode mode() const { return mode_; }

  private:
    GainSet gains_;
    FlowParams flow_;
    DitherSpec dither_;
    CostModel model_;
    AveragingMode mode_;
    HessianFloor floor_;
    DemodGrid grid_;
};

// Free-function forms.
EscState esc_rhs(double t, const EscState& s, const GainSet& g, const FlowParams& p,
                 const DitherSpec& d, const CostModel& m);
TargetState target_rhs(const TargetState& s, const GainSet& g, const FlowParams& p,
                       const CostModel& m);
EscState averaged_rhs(const EscState& s, const GainSet& g, const FlowParams& p,
                      const DitherSpec& d, const CostModel& m,
                      AveragingMode mode = AveragingMode::kArgument);

/// Period averages of the demodulated signals at a frozen x:
/// (1/T) int delta1 dt and (1/T) int delta2 dt.
struct DemodAverages {
    Eigen::VectorXd grad;
    SymVec hess;
};

DemodAverages demod_averages(const Eigen::Ref<const Eigen::VectorXd>& x,
                             const DitherSpec& d, const CostModel& m,
                             const DemodGrid& grid);

struct ZG {
    Eigen::VectorXd z;
    Eigen::VectorXd g;
};

/// z = H v + grad h(x), g = grad h(x), H from the Hessian oracle.
ZG to_zg(const TargetState& s, const CostModel& m);
/// Same transform with H = unvec(xi).
ZG to_zg(const EscState& s, const CostModel& m);

double lyapunov_V1(const Eigen::Ref<const Eigen::VectorXd>& z,
                   const Eigen::Ref<const Eigen::VectorXd>& g);
/// 1/2 |xi - vec(H*)|^2; quadratic models only.
double lyapunov_V2(const SymVec& xi, const CostModel& m);
double lyapunov_V3(const Eigen::Ref<const Eigen::VectorXd>& z,
                   const Eigen::Ref<const Eigen::VectorXd>& g);

/// Sufficient gain thresholds for the target system: any K > Kstar makes
/// (x*, 0) globally finite-time stable for the given k.
struct GainThreshold {
    double k1min;
    double k2min;
    double Kstar;
};

GainThreshold gain_threshold(const CostModel& m, double k, const FlowParams& p);

}  // namespace ftns
