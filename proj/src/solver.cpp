#include "fieldctl/solver.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include <Eigen/Cholesky>

#include "fieldctl/dense.hpp"
#include "fieldctl/error.hpp"
#include "fieldctl/parallel.hpp"

namespace fieldctl {

namespace {
constexpr int kMaxRefinementSteps = 8;
constexpr double kRefinementFloor = 1e-16;

std::string fmt_g(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}
}

struct TikhonovSystem::Factor {
    double alpha = -1.0;
    dense::HermitianFactor chol;
    Eigen::LDLT<Eigen::MatrixXcd, Eigen::Lower> ldlt;
    bool use_ldlt = false;

    Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const { return use_ldlt ? ldlt.solve(rhs) : chol.solve(rhs); }
};

TikhonovSystem::TikhonovSystem(const Eigen::MatrixXcd& A, const TargetVector& b)
    : A_(&A), b_(b)
{
    if (A.rows() != b.size())
        throw Error("target length " + std::to_string(b.size()) + " does not match " + std::to_string(A.rows()) +
                    " matrix rows");
    dense::gram_lower(A, gram_);
    atb_ = A.adjoint() * b;
}

void TikhonovSystem::factorize(double alpha) const
{
    if (factor_ && factor_->alpha == alpha)
        return;
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw NumericalError("Tikhonov parameter must be positive and finite");
    auto f = std::make_shared<Factor>();
    f->alpha = alpha;
    if (!f->chol.compute(gram_, alpha)) {
        Eigen::MatrixXcd shifted = gram_;
        shifted.diagonal().array() += alpha;
        f->ldlt.compute(shifted);
        if (f->ldlt.info() != Eigen::Success)
            throw NumericalError("factorization of (alpha I + A*A) failed at alpha = " + std::to_string(alpha));
        f->use_ldlt = true;
    }
    factor_ = std::move(f);
}

// The contract is relative to ||A* b||, while a double-precision residual
// carries an error of about eps ||A||^2 ||c||. At small alpha ||c|| grows
// like ||b|| / sqrt(alpha) and that error alone exceeds the tolerance, so the
// residual is accumulated in long double straight from A (not the rounded
// Gram matrix); refinement then converges to the solution for A itself.
Eigen::VectorXcd TikhonovSystem::normal_residual_vector(double alpha, const DensityVector& c,
                                                        const TargetVector& data) const
{
    using lcplx = std::complex<long double>;
    const Eigen::MatrixXcd& A = *A_;
    const auto m = static_cast<std::size_t>(A.rows());
    const auto n = static_cast<std::size_t>(A.cols());
    std::vector<lcplx> r(m);
    for (std::size_t i = 0; i < m; ++i)
        r[i] = -lcplx(data[static_cast<Eigen::Index>(i)]);
    // column-major A: each worker sweeps all columns over its row range
    parallel_for(m, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = 0; j < n; ++j) {
            const lcplx cj(c[static_cast<Eigen::Index>(j)]);
            const cplx* col = A.col(static_cast<Eigen::Index>(j)).data();
            for (std::size_t i = begin; i < end; ++i)
                r[i] += lcplx(col[i]) * cj;
        }
    });
    Eigen::VectorXcd out(static_cast<Eigen::Index>(n));
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            const cplx* col = A.col(static_cast<Eigen::Index>(j)).data();
            lcplx acc = static_cast<long double>(alpha) * lcplx(c[static_cast<Eigen::Index>(j)]);
            for (std::size_t i = 0; i < m; ++i)
                acc += std::conj(lcplx(col[i])) * r[i];
            out[static_cast<Eigen::Index>(j)] = cplx(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
        }
    });
    return out;
}

double TikhonovSystem::normal_equation_residual(double alpha, const DensityVector& c) const
{
    return normal_equation_residual(alpha, c, b_);
}

double TikhonovSystem::normal_equation_residual(double alpha, const DensityVector& c, const TargetVector& data) const
{
    if (data.size() != A_->rows() || c.size() != A_->cols())
        throw Error("normal_equation_residual: dimension mismatch");
    const double scale = (A_->adjoint() * data).norm();
    if (scale == 0.0)
        return c.norm() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return normal_residual_vector(alpha, c, data).norm() / scale;
}

DensityVector TikhonovSystem::solve_normal(double alpha, const TargetVector& data, const Eigen::VectorXcd& atb,
                                           bool checked) const
{
    factorize(alpha);
    const double scale = atb.norm();
    if (scale == 0.0)
        return DensityVector::Zero(atb.size());
    DensityVector c = factor_->solve(atb);
    if (!checked)
        return c;
    // Refine against A until the correction stops shrinking. A small residual
    // is not enough: with a rank-deficient A*A the null-space error only
    // shows up as alpha * e in the residual.
    double rel = std::numeric_limits<double>::infinity(), best_rel = rel;
    double prev_step = std::numeric_limits<double>::infinity();
    DensityVector best = c;
    for (int step = 0;; ++step) {
        const Eigen::VectorXcd r = normal_residual_vector(alpha, c, data);
        const double now = r.norm() / scale;
        if (now < 2.0 * rel) {
            best = c;
            best_rel = now;
        }
        rel = std::min(rel, now);
        if (now > 2.0 * rel || step == kMaxRefinementSteps)
            break;
        const DensityVector dc = factor_->solve(r);
        const double size = dc.norm();
        if (!(size < 0.5 * prev_step) || size <= kRefinementFloor * c.norm())
            break;
        prev_step = size;
        c -= dc;
    }
    rel = best_rel;
    c = std::move(best);
    if (!(rel <= kNormalEquationTolerance) || !c.allFinite())
        throw NumericalError("regularized normal equations not solved to tolerance at alpha = " +
                             fmt_g(alpha) + " (relative residual " + fmt_g(rel) + ")");
    return c;
}

DensityVector TikhonovSystem::solve(double alpha) const
{
    return solve_normal(alpha, b_, atb_, true);
}

DensityVector TikhonovSystem::solve(double alpha, const TargetVector& other_b) const
{
    if (other_b.size() != A_->rows())
        throw Error("target length does not match matrix rows");
    return solve_normal(alpha, other_b, A_->adjoint() * other_b, true);
}

DensityVector TikhonovSystem::solve_unchecked(double alpha) const
{
    return solve_normal(alpha, b_, atb_, false);
}

DensityVector tikhonov_solve(const Eigen::MatrixXcd& A, const TargetVector& b, double alpha)
{
    if (!(alpha > 0.0))
        throw NumericalError("Tikhonov parameter must be positive");
    return TikhonovSystem(A, b).solve(alpha);
}

std::string to_string(MorozovStatus s)
{
    switch (s) {
    case MorozovStatus::converged: return "converged";
    case MorozovStatus::delta_unreachable: return "delta_unreachable";
    case MorozovStatus::zero_solution: return "zero_solution";
    case MorozovStatus::bracket_exhausted: return "bracket_exhausted";
    }
    return "unknown";
}

RegularizedSolution morozov_select(const TikhonovSystem& system, double delta, const MorozovOptions& opts)
{
    if (!(delta >= 0.0))
        throw NumericalError("discrepancy level must be non-negative");
    if (!(opts.log10_alpha_min < opts.log10_alpha_max) || !(opts.upper_factor > 1.0))
        throw ConfigError("invalid Morozov options");

    RegularizedSolution out;
    out.discrepancy_target = delta;
    const double bnorm = system.target_norm();
    if (delta >= bnorm) {
        out.coefficients = DensityVector::Zero(system.unknowns());
        out.alpha = std::pow(10.0, opts.log10_alpha_max);
        out.residual_norm = bnorm;
        out.status = MorozovStatus::zero_solution;
        return out;
    }

    const double upper = opts.upper_factor * delta;
    struct Probe {
        double s;
        double residual;
        DensityVector c;
    };
    auto probe = [&](double s) {
        DensityVector c = system.solve_unchecked(std::pow(10.0, s));
        const double r = system.residual(c);
        ++out.iterations;
        return Probe{s, r, std::move(c)};
    };
    auto finish = [&](Probe p, MorozovStatus status) {
        out.alpha = std::pow(10.0, p.s);
        // Final solve under the normal-equation contract.
        out.coefficients = system.solve(out.alpha);
        out.residual_norm = system.residual(out.coefficients);
        out.status = status;
        return out;
    };
    auto inside = [&](double r) { return r >= delta && r <= upper; };

    Probe lo = probe(opts.log10_alpha_min);
    if (inside(lo.residual))
        return finish(std::move(lo), MorozovStatus::converged);
    if (lo.residual > upper)
        return finish(std::move(lo), MorozovStatus::delta_unreachable);

    Probe hi = probe(opts.log10_alpha_max);
    if (inside(hi.residual))
        return finish(std::move(hi), MorozovStatus::converged);
    if (hi.residual < delta)
        return finish(std::move(hi), MorozovStatus::bracket_exhausted);

    // f(s) = log r(10^s) - log(goal): negative at lo, positive at hi.
    const double goal = std::sqrt(delta * upper);
    auto f = [&](const Probe& p) { return std::log(p.residual) - std::log(goal); };
    double f_lo = f(lo);
    double f_hi = f(hi);
    int stale_side = 0;
    for (int it = 0; it < opts.max_iterations; ++it) {
        const double width = hi.s - lo.s;
        double s = (lo.s * f_hi - hi.s * f_lo) / (f_hi - f_lo);
        // Fall back to bisection when false position hugs an endpoint.
        if (!std::isfinite(s) || s <= lo.s + 0.05 * width || s >= hi.s - 0.05 * width || it % 4 == 3)
            s = 0.5 * (lo.s + hi.s);
        Probe mid = probe(s);
        if (inside(mid.residual))
            return finish(std::move(mid), MorozovStatus::converged);
        const double fm = f(mid);
        if (mid.residual < delta) {
            lo = std::move(mid);
            f_lo = fm;
            if (stale_side == -1)
                f_hi *= 0.5;  // Illinois step
            stale_side = -1;
        } else {
            hi = std::move(mid);
            f_hi = fm;
            if (stale_side == 1)
                f_lo *= 0.5;
            stale_side = 1;
        }
        if (hi.s - lo.s < 1e-12)
            break;
    }
    throw NumericalError("Morozov search did not reach the discrepancy window");
}

RegularizedSolution morozov_select(const Eigen::MatrixXcd& A, const TargetVector& b, double delta,
                                   const MorozovOptions& opts)
{
    const TikhonovSystem system(A, b);
    return morozov_select(system, delta, opts);
}

Eigen::VectorXcd unit_noise(Eigen::Index n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXcd s(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        s[i] = cplx(re, im);
    }
    const double norm = s.norm();
    if (norm > 0.0)
        s /= norm;
    return s;
}

StabilityReport stability_probe(const TikhonovSystem& system, const DensityVector& solution, double alpha,
                                double epsilon, std::uint64_t seed)
{
    if (!(epsilon >= 0.0 && epsilon < 1.0))
        throw ConfigError("stability probe needs 0 <= epsilon < 1");
    StabilityReport rep;
    rep.epsilon = epsilon;
    rep.alpha = alpha;
    const TargetVector perturbed_b = system.target() + epsilon * unit_noise(system.target().size(), seed);
    rep.perturbed = epsilon == 0.0 ? solution : system.solve(alpha, perturbed_b);
    const double cn = solution.norm();
    rep.relative_drift = cn > 0.0 ? (solution - rep.perturbed).norm() / cn : (rep.perturbed.norm() > 0.0 ? 1.0 : 0.0);
    rep.perturbed_residual = (system.matrix() * rep.perturbed - perturbed_b).norm();
    return rep;
}

StabilityReport stability_probe(const Eigen::MatrixXcd& A, const TargetVector& b, double epsilon, std::uint64_t seed)
{
    const TikhonovSystem system(A, b);
    const auto sol = morozov_select(system, 0.01 * b.norm());
    return stability_probe(system, sol.coefficients, sol.alpha, epsilon, seed);
}

}  // namespace fieldctl
