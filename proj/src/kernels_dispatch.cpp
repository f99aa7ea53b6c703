#include <cstdlib>
#include <string>

#include "dp/error.hpp"
#include "dp/kernels.hpp"

namespace dp::kernels {

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

struct Choice {
    const Table* table;
    std::string name;
};

Choice pick() {
    const char* env = std::getenv("DEEP_PURSUIT_KERNELS");
    if (env != nullptr) {
        std::string want(env);
        if (want == "scalar") return {&scalar_table(), "scalar"};
        if (want == "avx2") {
            if (!avx2_supported())
                throw ConfigError(
                    "DEEP_PURSUIT_KERNELS=avx2 requested but this CPU has no "
                    "AVX2+FMA support");
            return {&avx2_table(), "avx2"};
        }
        throw ConfigError("unknown DEEP_PURSUIT_KERNELS value '" + want +
                          "' (expected scalar or avx2)");
    }
    if (avx2_supported()) return {&avx2_table(), "avx2"};
    return {&scalar_table(), "scalar"};
}

const Choice& choice() {
    static const Choice c = pick();
    return c;
}

}  // namespace

const Table& active() { return *choice().table; }

std::string backend_name() { return choice().name; }

}  // namespace dp::kernels
