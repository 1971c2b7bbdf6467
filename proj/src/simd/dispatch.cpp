#include <atomic>
#include <cstdlib>
#include <string_view>

#include "fieldctl/error.hpp"
#include "fieldctl/simd.hpp"

namespace fieldctl::simd {

std::string to_string(Isa isa)
{
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    }
    return "unknown";
}

bool isa_supported(Isa isa)
{
    switch (isa) {
    case Isa::scalar:
        return true;
    case Isa::avx2:
#if defined(FIELDCTL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
        return false;
#endif
    }
    return false;
}

const KernelTable& kernels_for(Isa isa)
{
    if (!isa_supported(isa))
        throw Error("instruction set " + to_string(isa) + " is not available");
#if defined(FIELDCTL_HAVE_AVX2)
    if (isa == Isa::avx2)
        return detail::avx2_table;
#endif
    return detail::scalar_table;
}

namespace {

Isa detect()
{
    if (const char* env = std::getenv("FIELDCTL_ISA"); env && std::string_view(env) == "scalar")
        return Isa::scalar;
    return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<const KernelTable*>& active()
{
    static std::atomic<const KernelTable*> table{&kernels_for(detect())};
    return table;
}

}  // namespace

const KernelTable& kernels()
{
    return *active().load(std::memory_order_acquire);
}

Isa active_isa()
{
    return kernels().isa;
}

void set_active_isa(Isa isa)
{
    active().store(&kernels_for(isa), std::memory_order_release);
}

}  // namespace fieldctl::simd
