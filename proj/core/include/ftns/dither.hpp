// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace ftns {

/// n(n+1)/2, the length of a half-vectorized n x n symmetric matrix.
constexpr int sym_size(int n) { return n * (n + 1) / 2; }

/// Inverse of sym_size; throws ShapeError if m is not a triangular number.
int sym_dim(int m);

/// Half-vectorized symmetric matrix, row-major upper triangle:
/// S11, S12, ..., S1n, S22, ..., Snn.
class SymVec {
  public:
    SymVec() = default;
    explicit SymVec(Eigen::VectorXd entries);

    static SymVec zero(int n);

    int n() const { return n_; }
    int size() const { return static_cast<int>(entries_.size()); }
    const Eigen::VectorXd& entries() const { return entries_; }
    Eigen::VectorXd& entries() { return entries_; }

    // Entry (i, j) of the underlying matrix, either triangle.
    double at(int i, int j) const;

  private:
    Eigen::VectorXd entries_;
    int n_ = 0;
};

// Position of (i, j), i <= j, in SymVec ordering.
int sym_index(int n, int i, int j);

SymVec vec_sym(const Eigen::Ref<const Eigen::MatrixXd>& s);
Eigen::MatrixXd unvec_sym(const SymVec& s);
void unvec_sym_into(const Eigen::Ref<const Eigen::VectorXd>& s, int n,
                    Eigen::Ref<Eigen::MatrixXd> out);

/// Sinusoidal probe a*M(t) and its demodulation constants.
class DitherSpec {
  public:
    /// offdiag_scale defaults to 4/a^2, which makes the averaged off-diagonal
    /// Hessian estimate exact for quadratic maps.
    static DitherSpec make(double a, std::vector<double> omegas,
                           std::optional<double> offdiag_scale = std::nullopt);

    static double default_offdiag_scale(double a) { return 4.0 / (a * a); }

    double a() const { return a_; }
    const Eigen::VectorXd& omegas() const { return omegas_; }
    double offdiag_scale() const { return offdiag_scale_; }
    int n() const { return static_cast<int>(omegas_.size()); }

  private:
    DitherSpec() = default;

    double a_ = 1.0;
    Eigen::VectorXd omegas_;
    double offdiag_scale_ = 4.0;
};

/// M(t) = [sin(w_1 t), ..., sin(w_n t)].
Eigen::VectorXd probe(double t, const DitherSpec& d);

/// s(t) = vec_sym(S(t)) with S_ii = 16/a^2 (sin^2(w_i t) - 1/2) and
/// S_ij = offdiag_scale sin(w_i t) sin(w_j t).
SymVec hess_demod(double t, const DitherSpec& d);

/// (2/a) y M(t), where y is the cost measured at x + a M(t).
Eigen::VectorXd delta1(double y_probe, double t, const DitherSpec& d);

/// y s(t).
SymVec delta2(double y_probe, double t, const DitherSpec& d);

/// Base angular frequency w_gcd: every w_i is an integer multiple of it.
/// Throws ValidationError when some ratio w_i / w_1 has no rational
/// approximation with denominator <= 1000 within relative 1e-9, or when
/// w_max / w_gcd exceeds 1e5.
double base_frequency(const DitherSpec& d);

/// Smallest T > 0 with w_i T in 2 pi Z for all i.
double common_period(const DitherSpec& d);

/// Uniform nodes over one common period with the probe and demodulation
/// signals tabulated. For periodic integrands the composite trapezoid rule
/// reduces to the plain mean over these nodes.
struct DemodGrid {
    double period = 0;
    std::vector<double> times;
    Eigen::MatrixXd probes;   // n x N
    Eigen::MatrixXd demods;   // sym_size(n) x N

    int nodes() const { return static_cast<int>(times.size()); }
};

/// max(256, 32 * w_max / w_gcd) nodes.
int default_node_count(const DitherSpec& d);

DemodGrid make_grid(const DitherSpec& d, std::optional<int> nodes = std::nullopt);

enum class ViolationKind {
    kDimensionMismatch,
    kNonPositive,
    kDuplicate,
    kIrrationalRatio,
    kGradientResidual,
    kHessianResidual,
};

struct Violation {
    ViolationKind kind;
    std::string message;
    double magnitude = 0;  // residual or offending value
};

struct FreqReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

std::string to_string(ViolationKind kind);

/// Operational orthogonality check: structural conditions plus the
/// demodulation oracle on a fixed canonical quadratic (relative tol 1e-8).
FreqReport validate_freqs(const DitherSpec& d, int n);

/// Throws ValidationError listing every violation.
void require_valid(const DitherSpec& d, int n);

}  // namespace ftns
