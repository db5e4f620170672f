// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ftns {

/// One monomial coeff * prod_i x_i^exponents[i].
struct PolyTerm {
    double coeff = 0;
    std::vector<int> exponents;
};

struct QuadraticMap {
    Eigen::MatrixXd hstar;
    Eigen::VectorXd xstar;
    double ystar = 0;
};

struct PolynomialMap {
    int dim = 0;
    std::vector<PolyTerm> terms;
};

enum class CostKind { kQuadratic, kPolynomial, kBlackBox };

/// The static map y = h(x) seen by the controller.
///
/// The controller only ever calls eval(). Gradient and Hessian oracles exist
/// for monitors and tests and are unavailable on black-box models.
class CostModel {
  public:
    using Function = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

    /// h(x) = ystar + 1/2 (x - xstar)^T H (x - xstar); H symmetric positive
    /// definite.
    static CostModel quadratic(Eigen::MatrixXd hstar, Eigen::VectorXd xstar,
                               double ystar);
    static CostModel polynomial(int dim, std::vector<PolyTerm> terms);
    static CostModel black_box(int dim, Function f);

    /// Two-input reference map:
    /// 1 + 30 (x1-1)^2 + 25 (x1-1)(x2-2) + 15 (x2-2)^2.
    static CostModel reference_quadratic();

    CostKind kind() const { return kind_; }
    int dim() const { return dim_; }
    bool is_quadratic() const { return kind_ == CostKind::kQuadratic; }
    bool has_oracles() const { return kind_ != CostKind::kBlackBox; }

    double eval(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    Eigen::VectorXd grad(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    Eigen::MatrixXd hess(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    // Quadratic-only accessors; throw UnsupportedError otherwise.
    const QuadraticMap& quadratic_map() const;
    const Eigen::MatrixXd& hstar() const { return quadratic_map().hstar; }
    const Eigen::VectorXd& xstar() const { return quadratic_map().xstar; }
    double ystar() const { return quadratic_map().ystar; }

    const PolynomialMap& polynomial_map() const;

  private:
    CostModel() = default;
    void check_dim(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    CostKind kind_ = CostKind::kQuadratic;
    int dim_ = 0;
    std::shared_ptr<const QuadraticMap> quad_;
    std::shared_ptr<const PolynomialMap> poly_;
    Function fn_;
};

// Free-function spellings of the model interface.
inline double eval_cost(const CostModel& m, const Eigen::Ref<const Eigen::VectorXd>& x) {
    return m.eval(x);
}
inline Eigen::VectorXd grad_oracle(const CostModel& m,
                                   const Eigen::Ref<const Eigen::VectorXd>& x) {
    return m.grad(x);
}
inline Eigen::MatrixXd hess_oracle(const CostModel& m,
                                   const Eigen::Ref<const Eigen::VectorXd>& x) {
    return m.hess(x);
}

struct Spectrum {
    double lambda_min;
    double lambda_max;
};

Spectrum spectrum(const Eigen::Ref<const Eigen::MatrixXd>& symmetric);

/// Points in `samples` where the model Hessian is not positive definite.
/// Non-convex polynomials are accepted; callers surface these as warnings.
std::vector<std::string> convexity_warnings(const CostModel& m,
                                            const std::vector<Eigen::VectorXd>& samples);

}  // namespace ftns
