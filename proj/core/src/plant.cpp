// SPDX-License-Identifier: Apache-2.0
#include "ftns/plant.hpp"

#include "ftns/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace ftns {

namespace {

double ipow(double x, int e)
{
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

// coeff * prod_k x_k^e_k
double monomial(const PolyTerm& t, const Eigen::Ref<const Eigen::VectorXd>& x)
{
    double r = t.coeff;
    for (std::size_t k = 0; k < t.exponents.size(); ++k) {
        r *= ipow(x[static_cast<Eigen::Index>(k)], t.exponents[k]);
    }
    return r;
}

}  // namespace

CostModel CostModel::quadratic(Eigen::MatrixXd hstar, Eigen::VectorXd xstar, double ystar)
{
    const auto n = xstar.size();
    if (n == 0) throw ShapeError("quadratic model needs a non-empty minimizer");
    if (hstar.rows() != n || hstar.cols() != n) {
        throw ShapeError("Hstar must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    const double scale = std::max(hstar.cwiseAbs().maxCoeff(), 1e-300);
    if ((hstar - hstar.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw ShapeError("Hstar must be symmetric");
    }
    const Spectrum sp = spectrum(hstar);
    if (!(sp.lambda_min > 0.0)) {
        std::ostringstream os;
        os << "Hstar must be positive definite (lambda_min = " << sp.lambda_min << ")";
        throw ParameterError(os.str());
    }
    CostModel m;
    m.kind_ = CostKind::kQuadratic;
    m.dim_ = static_cast<int>(n);
    m.quad_ = std::make_shared<const QuadraticMap>(
        QuadraticMap{std::move(hstar), std::move(xstar), ystar});
    return m;
}

CostModel CostModel::polynomial(int dim, std::vector<PolyTerm> terms)
{
    if (dim <= 0) throw ShapeError("polynomial dimension must be positive");
    for (const PolyTerm& t : terms) {
        if (static_cast<int>(t.exponents.size()) != dim) {
            throw ShapeError("polynomial term has " + std::to_string(t.exponents.size())
                             + " exponents, expected " + std::to_string(dim));
        }
        for (int e : t.exponents) {
            if (e < 0) throw ParameterError("polynomial exponents must be non-negative");
        }
    }
    CostModel m;
    m.kind_ = CostKind::kPolynomial;
    m.dim_ = dim;
    m.poly_ = std::make_shared<const PolynomialMap>(PolynomialMap{dim, std::move(terms)});
    return m;
}

CostModel CostModel::black_box(int dim, Function f)
{
    if (dim <= 0) throw ShapeError("black-box dimension must be positive");
    if (!f) throw ParameterError("black-box model needs a callable");
    CostModel m;
    m.kind_ = CostKind::kBlackBox;
    m.dim_ = dim;
    m.fn_ = std::move(f);
    return m;
}

CostModel CostModel::reference_quadratic()
{
    Eigen::MatrixXd h(2, 2);
    h << 60, 25, 25, 30;
    Eigen::VectorXd xs(2);
    xs << 1, 2;
    return quadratic(h, xs, 1.0);
}

void CostModel::check_dim(const Eigen::Ref<const Eigen::VectorXd>& x) const
{
    if (x.size() != dim_) {
        throw ShapeError("cost model expects dimension " + std::to_string(dim_) + ", got "
                         + std::to_string(x.size()));
    }
}

double CostModel::eval(const Eigen::Ref<const Eigen::VectorXd>& x) const
{
    check_dim(x);
    switch (kind_) {
    case CostKind::kQuadratic: {
        // Allocation-free: this sits inside every quadrature node.
        const QuadraticMap& q = *quad_;
        double acc = 0.0;
        for (int i = 0; i < dim_; ++i) {
            const double di = x[i] - q.xstar[i];
            double row = 0.0;
            for (int j = 0; j < dim_; ++j) row += q.hstar(i, j) * (x[j] - q.xstar[j]);
            acc += di * row;
        }
        return q.ystar + 0.5 * acc;
    }
    case CostKind::kPolynomial: {
        double acc = 0.0;
        for (const PolyTerm& t : poly_->terms) acc += monomial(t, x);
        return acc;
    }
    case CostKind::kBlackBox:
        return fn_(x);
    }
    return 0.0;
}

Eigen::VectorXd CostModel::grad(const Eigen::Ref<const Eigen::VectorXd>& x) const
{
    check_dim(x);
    switch (kind_) {
    case CostKind::kQuadratic:
        return quad_->hstar * (x - quad_->xstar);
    case CostKind::kPolynomial: {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(dim_);
        for (const PolyTerm& t : poly_->terms) {
            for (int i = 0; i < dim_; ++i) {
                const int ei = t.exponents[static_cast<std::size_t>(i)];
                if (ei == 0) continue;
                PolyTerm d = t;
                d.coeff *= ei;
                d.exponents[static_cast<std::size_t>(i)] -= 1;
                g[i] += monomial(d, x);
            }
        }
        return g;
    }
    case CostKind::kBlackBox:
        break;
    }
    throw UnsupportedError("gradient oracle is not available for black-box models");
}

Eigen::MatrixXd CostModel::hess(const Eigen::Ref<const Eigen::VectorXd>& x) const
{
    check_dim(x);
    switch (kind_) {
    case CostKind::kQuadratic:
        return quad_->hstar;
    case CostKind::kPolynomial: {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim_, dim_);
        for (const PolyTerm& t : poly_->terms) {
            for (int i = 0; i < dim_; ++i) {
                for (int j = i; j < dim_; ++j) {
                    PolyTerm d = t;
                    auto& ei = d.exponents[static_cast<std::size_t>(i)];
                    if (ei == 0) continue;
                    d.coeff *= ei;
                    ei -= 1;
                    auto& ej = d.exponents[static_cast<std::size_t>(j)];
                    if (ej == 0) continue;
                    d.coeff *= ej;
                    ej -= 1;
                    const double v = monomial(d, x);
                    h(i, j) += v;
                    if (i != j) h(j, i) += v;
                }
            }
        }
        return h;
    }
    case CostKind::kBlackBox:
        break;
    }
    throw UnsupportedError("Hessian oracle is not available for black-box models");
}

const QuadraticMap& CostModel::quadratic_map() const
{
    if (kind_ != CostKind::kQuadratic) {
        throw UnsupportedError("operation requires a quadratic cost model");
    }
    return *quad_;
}

const PolynomialMap& CostModel::polynomial_map() const
{
    if (kind_ != CostKind::kPolynomial) {
        throw UnsupportedError("operation requires a polynomial cost model");
    }
    return *poly_;
}

Spectrum spectrum(const Eigen::Ref<const Eigen::MatrixXd>& symmetric)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = es.eigenvalues();
    return {ev.minCoeff(), ev.maxCoeff()};
}

std::vector<std::string> convexity_warnings(const CostModel& m,
                                            const std::vector<Eigen::VectorXd>& samples)
{
    std::vector<std::string> out;
    if (!m.has_oracles()) return out;
    for (const Eigen::VectorXd& x : samples) {
        const Spectrum sp = spectrum(m.hess(x));
        if (!(sp.lambda_min > 0.0)) {
            std::ostringstream os;
            os << "Hessian not positive definite at x = [" << x.transpose()
               << "] (lambda_min = " << sp.lambda_min << ")";
            out.push_back(os.str());
        }
    }
    return out;
}

}  // namespace ftns
