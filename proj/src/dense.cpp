#include "fieldctl/dense.hpp"

#include <dlfcn.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <string_view>

#include "fieldctl/error.hpp"
#include "fieldctl/parallel.hpp"

namespace fieldctl::dense {
namespace {

// CBLAS enum values from cblas.h.
constexpr int kColMajor = 102;
constexpr int kLower = 122;
constexpr int kConjTrans = 113;

struct OpenBlas {
    using zherk_fn = void (*)(int, int, int, int, int, double, const void*, int, double, void*, int);
    using zpotrf_fn = void (*)(const char*, const int*, void*, const int*, int*, std::size_t);
    using zpotrs_fn = void (*)(const char*, const int*, const int*, const void*, const int*, void*, const int*, int*,
                               std::size_t);
    using threads_fn = void (*)(int);

    zherk_fn zherk = nullptr;
    zpotrf_fn zpotrf = nullptr;
    zpotrs_fn zpotrs = nullptr;
    threads_fn set_threads = nullptr;
};

// OpenBLAS picks its kernels when the library is loaded. Some virtual CPUs
// report a model it does not recognise and it falls back to SSE3 kernels,
// so the core type is derived from the feature flags before loading.
void hint_core_type()
{
    if (std::getenv("OPENBLAS_CORETYPE"))
        return;
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
    if (__builtin_cpu_supports("avx512f") && __builtin_cpu_supports("avx512bw") &&
        __builtin_cpu_supports("avx512dq") && __builtin_cpu_supports("avx512vl"))
        setenv("OPENBLAS_CORETYPE", "SkylakeX", 0);
    else if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        setenv("OPENBLAS_CORETYPE", "Haswell", 0);
#endif
}

const OpenBlas* load_openblas()
{
    static const OpenBlas* lib = []() -> const OpenBlas* {
        hint_core_type();
        void* h = nullptr;
        for (const char* name : {"libopenblas.so.0", "libopenblas.so"}) {
            h = dlopen(name, RTLD_NOW | RTLD_LOCAL);
            if (h)
                break;
        }
        if (!h)
            return nullptr;
        auto* ob = new OpenBlas;
        ob->zherk = reinterpret_cast<OpenBlas::zherk_fn>(dlsym(h, "cblas_zherk"));
        ob->zpotrf = reinterpret_cast<OpenBlas::zpotrf_fn>(dlsym(h, "zpotrf_"));
        ob->zpotrs = reinterpret_cast<OpenBlas::zpotrs_fn>(dlsym(h, "zpotrs_"));
        ob->set_threads = reinterpret_cast<OpenBlas::threads_fn>(dlsym(h, "openblas_set_num_threads"));
        if (!ob->zherk || !ob->zpotrf || !ob->zpotrs) {
            delete ob;
            return nullptr;
        }
        return ob;
    }();
    return lib;
}

Backend detect()
{
    if (const char* env = std::getenv("FIELDCTL_DENSE"); env && std::string_view(env) == "eigen")
        return Backend::eigen;
    return load_openblas() ? Backend::openblas : Backend::eigen;
}

std::atomic<Backend>& active()
{
    static std::atomic<Backend> b{detect()};
    return b;
}

const OpenBlas& blas()
{
    const OpenBlas* ob = load_openblas();
    if (ob->set_threads)
        ob->set_threads(static_cast<int>(thread_count()));
    return *ob;
}

void check_int_range(Eigen::Index n)
{
    if (n > std::numeric_limits<int>::max())
        throw NumericalError("matrix dimension exceeds the BLAS integer range");
}

}  // namespace

std::string to_string(Backend b)
{
    return b == Backend::openblas ? "openblas" : "eigen";
}

bool backend_available(Backend b)
{
    return b == Backend::eigen || load_openblas() != nullptr;
}

Backend active_backend()
{
    return active().load();
}

void set_backend(Backend b)
{
    if (!backend_available(b))
        throw Error("dense backend " + to_string(b) + " is not available");
    active().store(b);
}

void gram_lower(const Eigen::MatrixXcd& A, Eigen::MatrixXcd& G)
{
    const Eigen::Index n = A.cols();
    const Eigen::Index m = A.rows();
    G.setZero(n, n);
    if (n == 0 || m == 0)
        return;
    if (active_backend() == Backend::openblas) {
        check_int_range(std::max(n, m));
        blas().zherk(kColMajor, kLower, kConjTrans, static_cast<int>(n), static_cast<int>(m), 1.0, A.data(),
                     static_cast<int>(m), 0.0, G.data(), static_cast<int>(n));
        return;
    }
    G.selfadjointView<Eigen::Lower>().rankUpdate(A.adjoint());
}

bool HermitianFactor::compute(const Eigen::MatrixXcd& gram_lower, double shift)
{
    backend_ = active_backend();
    const Eigen::Index n = gram_lower.rows();
    if (backend_ == Backend::openblas) {
        check_int_range(n);
        factor_ = gram_lower;
        factor_.diagonal().array() += shift;
        const int nn = static_cast<int>(n);
        int info = 0;
        blas().zpotrf("L", &nn, factor_.data(), &nn, &info, 1);
        return info == 0;
    }
    Eigen::MatrixXcd shifted = gram_lower;
    shifted.diagonal().array() += shift;
    llt_.compute(shifted);
    return llt_.info() == Eigen::Success;
}

Eigen::VectorXcd HermitianFactor::solve(const Eigen::VectorXcd& rhs) const
{
    if (backend_ == Backend::openblas) {
        Eigen::VectorXcd x = rhs;
        const int n = static_cast<int>(factor_.rows());
        const int one = 1;
        int info = 0;
        blas().zpotrs("L", &n, &one, factor_.data(), &n, x.data(), &n, &info, 1);
        if (info != 0)
            throw NumericalError("triangular solve failed");
        return x;
    }
    return llt_.solve(rhs);
}

}  // namespace fieldctl::dense
