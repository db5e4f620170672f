// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

namespace ftns {

struct Exponents {
    double alpha1;
    double alpha2;
};

// alpha_i = (q_i - 2) / (q_i - 1), requiring q1 > 2 and 1 < q2 < 2.
Exponents exponents_from_q(double q1, double q2);

/// Parameters of the finite-time scaling gamma(v) = c1 |v|^-alpha1 + c2 |v|^-alpha2.
///
/// The exponents are derived from (q1, q2) once at construction and are
/// never set on their own. Fields are read-only after make().
class FlowParams {
  public:
    static constexpr double kDefaultSingEps = 1e-12;

    static FlowParams make(double q1, double q2, double c1, double c2,
                           double sing_eps = kDefaultSingEps);

    double q1() const { return q1_; }
    double q2() const { return q2_; }
    double c1() const { return c1_; }
    double c2() const { return c2_; }
    double alpha1() const { return alpha1_; }
    double alpha2() const { return alpha2_; }
    double sing_eps() const { return sing_eps_; }

  private:
    FlowParams() = default;

    double q1_ = 0, q2_ = 0, c1_ = 0, c2_ = 0;
    double alpha1_ = 0, alpha2_ = 0;
    double sing_eps_ = kDefaultSingEps;
};

/// gamma(|v|) as a function of the norm alone. Throws SingularityError when
/// norm <= sing_eps.
double gamma_of_norm(double norm, const FlowParams& p);

double gamma(const Eigen::Ref<const Eigen::VectorXd>& v, const FlowParams& p);

/// gamma(v) * v, extended by continuity with 0 inside the sing_eps ball.
Eigen::VectorXd scaled_flow(const Eigen::Ref<const Eigen::VectorXd>& v,
                            const FlowParams& p);

// In-place variant for hot loops: out = gamma(v) v.
void scaled_flow_into(const Eigen::Ref<const Eigen::VectorXd>& v,
                      const FlowParams& p, Eigen::Ref<Eigen::VectorXd> out);

}  // namespace ftns
