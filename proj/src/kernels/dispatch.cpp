#include "degsde/kernels.hpp"

#include "degsde/error.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace degsde::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(DEGSDE_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa detect() {
    const char* env = std::getenv("DEGSDE_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return Isa::scalar;
    return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<int> forced{-1};

}  // namespace

bool available(Isa isa) {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2: return cpu_has_avx2();
    }
    return false;
}

std::vector<Isa> available_isas() {
    std::vector<Isa> out{Isa::scalar};
    if (available(Isa::avx2)) out.push_back(Isa::avx2);
    return out;
}

const char* name(Isa isa) {
    return isa == Isa::avx2 ? "avx2" : "scalar";
}

const KernelTable& table(Isa isa) {
    if (!available(isa)) throw CapabilityError(std::string("kernel ISA not available: ") + name(isa));
#if defined(DEGSDE_HAVE_AVX2)
    if (isa == Isa::avx2) return detail::avx2_table;
#endif
    return detail::scalar_table;
}

Isa active_isa() {
    int f = forced.load();
    if (f >= 0) return static_cast<Isa>(f);
    static const Isa detected = detect();
    return detected;
}

const KernelTable& active() {
    return table(active_isa());
}

void force(Isa isa) {
    if (!available(isa)) throw CapabilityError(std::string("kernel ISA not available: ") + name(isa));
    forced.store(static_cast<int>(isa));
}

void reset() {
    forced.store(-1);
}

}  // namespace degsde::kernels
