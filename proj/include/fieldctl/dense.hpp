#pragma once

// Dense Hermitian kernels behind the Tikhonov solver: the Gram product A*A
// and the Cholesky factorization of A*A + alpha I. Two backends: OpenBLAS
// (loaded at runtime, carries its own CPU dispatch) and Eigen (always
// available, used when OpenBLAS cannot be loaded or FIELDCTL_DENSE=eigen).

#include <memory>
#include <string>

#include <Eigen/Dense>

namespace fieldctl::dense {

enum class Backend { eigen, openblas };

std::string to_string(Backend b);
bool backend_available(Backend b);
Backend active_backend();
void set_backend(Backend b);

/// G = A^H A. Only the lower triangle of G is meaningful afterwards.
void gram_lower(const Eigen::MatrixXcd& A, Eigen::MatrixXcd& G);

/// Cholesky factor of (G + shift I), G given by its lower triangle.
class HermitianFactor {
public:
    /// Returns false when the shifted matrix is not numerically positive
    /// definite.
    bool compute(const Eigen::MatrixXcd& gram_lower, double shift);
    Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const;

private:
    Backend backend_ = Backend::eigen;
    Eigen::MatrixXcd factor_;
    Eigen::LLT<Eigen::MatrixXcd, Eigen::Lower> llt_;
};

}  // namespace fieldctl::dense
