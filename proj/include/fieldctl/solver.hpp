#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "fieldctl/bem.hpp"

namespace fieldctl {

/// Prescribed field at the matrix rows; null-region rows are exactly zero.
using TargetVector = Eigen::VectorXcd;

/// Tikhonov-regularized least squares for A c = b:
///   c(alpha) = (alpha I + A* A)^{-1} A* b.
/// The Gram matrix and A* b are formed once; each alpha costs one Hermitian
/// factorization, cached for the most recent alpha.
class TikhonovSystem {
public:
    TikhonovSystem(const Eigen::MatrixXcd& A, const TargetVector& b);

    const Eigen::MatrixXcd& matrix() const { return *A_; }
    const TargetVector& target() const { return b_; }
    double target_norm() const { return b_.norm(); }
    Eigen::Index unknowns() const { return A_->cols(); }

    /// Solves for the stored right-hand side. Enforces
    /// ||(alpha I + A*A) c - A* b|| <= 1e-10 ||A* b|| (with iterative
    /// refinement); throws NumericalError otherwise.
    DensityVector solve(double alpha) const;

    /// Same factorization, different data vector b'.
    DensityVector solve(double alpha, const TargetVector& other_b) const;

    /// Unchecked solve used while scanning alpha.
    DensityVector solve_unchecked(double alpha) const;

    double residual(const DensityVector& c) const { return ((*A_) * c - b_).norm(); }

    /// ||(alpha I + A*A) c - A* data|| / ||A* data|| (0 when A* data = 0),
    /// evaluated as alpha c + A*(A c - data) in extended precision.
    double normal_equation_residual(double alpha, const DensityVector& c) const;
    double normal_equation_residual(double alpha, const DensityVector& c, const TargetVector& data) const;

private:
    DensityVector solve_normal(double alpha, const TargetVector& data, const Eigen::VectorXcd& atb,
                               bool checked) const;
    Eigen::VectorXcd normal_residual_vector(double alpha, const DensityVector& c, const TargetVector& data) const;
    void factorize(double alpha) const;

    const Eigen::MatrixXcd* A_;
    TargetVector b_;
    Eigen::MatrixXcd gram_;  // lower triangle valid
    Eigen::VectorXcd atb_;

    struct Factor;
    mutable std::shared_ptr<Factor> factor_;
};

inline constexpr double kNormalEquationTolerance = 1e-10;

DensityVector tikhonov_solve(const Eigen::MatrixXcd& A, const TargetVector& b, double alpha);

enum class MorozovStatus {
    converged,         // residual in [delta, upper_factor * delta]
    delta_unreachable, // residual above delta even at the smallest alpha
    zero_solution,     // delta >= ||b||: the zero density already qualifies
    bracket_exhausted, // residual below delta even at the largest alpha
};

std::string to_string(MorozovStatus s);

struct MorozovOptions {
    double log10_alpha_min = -14.0;
    double log10_alpha_max = 2.0;
    double upper_factor = 1.05;
    int max_iterations = 100;
};

struct RegularizedSolution {
    DensityVector coefficients;
    double alpha = 0.0;
    double residual_norm = 0.0;
    double discrepancy_target = 0.0;
    MorozovStatus status = MorozovStatus::converged;
    int iterations = 0;

    bool warning() const { return status != MorozovStatus::converged; }
};

/// Picks alpha so that ||A c(alpha) - b|| lands in [delta, 1.05 delta].
/// Bracketed search on log10 alpha (false position with bisection
/// safeguards); the residual is monotone in alpha.
RegularizedSolution morozov_select(const TikhonovSystem& system, double delta, const MorozovOptions& opts = {});
RegularizedSolution morozov_select(const Eigen::MatrixXcd& A, const TargetVector& b, double delta,
                                   const MorozovOptions& opts = {});

/// Unit-norm complex vector with i.i.d. Gaussian components.
Eigen::VectorXcd unit_noise(Eigen::Index n, std::uint64_t seed);

struct StabilityReport {
    double epsilon = 0.0;
    double alpha = 0.0;
    double relative_drift = 0.0;       // ||c - c_eps|| / ||c||
    double perturbed_residual = 0.0;   // ||A c_eps - (b + eps s)||
    DensityVector perturbed;           // c_eps
};

/// Re-solves with b + eps s at the same alpha.
StabilityReport stability_probe(const TikhonovSystem& system, const DensityVector& solution, double alpha,
                                double epsilon, std::uint64_t seed);

/// Convenience: Morozov solve at delta = 0.01 ||b||, then probe.
StabilityReport stability_probe(const Eigen::MatrixXcd& A, const TargetVector& b, double epsilon,
                                std::uint64_t seed);

}  // namespace fieldctl
