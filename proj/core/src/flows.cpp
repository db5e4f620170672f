// SPDX-License-Identifier: Apache-2.0
#include "ftns/flows.hpp"

#include "ftns/errors.hpp"

#include <cmath>
#include <string>

namespace ftns {

Exponents exponents_from_q(double q1, double q2)
{
    if (!(q1 > 2.0)) {
        throw ParameterError("q1 must satisfy q1 > 2, got " + std::to_string(q1));
    }
    if (!(q2 > 1.0)) {
        throw ParameterError("q2 must satisfy q2 > 1, got " + std::to_string(q2));
    }
    if (!(q2 < 2.0)) {
        throw ParameterError("q2 must satisfy q2 < 2, got " + std::to_string(q2));
    }
    return {(q1 - 2.0) / (q1 - 1.0), (q2 - 2.0) / (q2 - 1.0)};
}

FlowParams FlowParams::make(double q1, double q2, double c1, double c2, double sing_eps)
{
    const Exponents e = exponents_from_q(q1, q2);
    if (!(c1 >= 0.0) || !(c2 >= 0.0)) {
        throw ParameterError("c1 and c2 must be non-negative");
    }
    if (!(c1 + c2 > 0.0)) {
        throw ParameterError("c1 + c2 must be positive");
    }
    if (!(sing_eps > 0.0)) {
        throw ParameterError("sing_eps must be positive");
    }
    FlowParams p;
    p.q1_ = q1;
    p.q2_ = q2;
    p.c1_ = c1;
    p.c2_ = c2;
    p.alpha1_ = e.alpha1;
    p.alpha2_ = e.alpha2;
    p.sing_eps_ = sing_eps;
    return p;
}

double gamma_of_norm(double norm, const FlowParams& p)
{
    if (!(norm > p.sing_eps())) {
        throw SingularityError("gamma is undefined at |v| = " + std::to_string(norm));
    }
    double g = 0.0;
    if (p.c1() != 0.0) g += p.c1() * std::pow(norm, -p.alpha1());
    if (p.c2() != 0.0) g += p.c2() * std::pow(norm, -p.alpha2());
    return g;
}

double gamma(const Eigen::Ref<const Eigen::VectorXd>& v, const FlowParams& p)
{
    return gamma_of_norm(v.norm(), p);
}

void scaled_flow_into(const Eigen::Ref<const Eigen::VectorXd>& v, const FlowParams& p,
                      Eigen::Ref<Eigen::VectorXd> out)
{
    const double norm = v.norm();
    if (std::isnan(norm)) {
        out.setConstant(std::nan(""));
        return;
    }
    if (norm <= p.sing_eps()) {
        out.setZero();
        return;
    }
    out = gamma_of_norm(norm, p) * v;
}

Eigen::VectorXd scaled_flow(const Eigen::Ref<const Eigen::VectorXd>& v, const FlowParams& p)
{
    Eigen::VectorXd out(v.size());
    scaled_flow_into(v, p, out);
    return out;
}

}  // namespace ftns
