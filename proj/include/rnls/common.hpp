#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <new>
#include <stdexcept>
#include <string>
#include <vector>

namespace rnls {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Error taxonomy. Everything user-facing derives from Error so the CLI can
// map failures onto exit codes in one place.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A field contains NaN/Inf samples.
struct InvalidFieldError : Error {
    using Error::Error;
};

/// Two fields (or a field and an operator) live on different grids.
struct GridMismatchError : Error {
    using Error::Error;
};

/// A parameter lies outside the admissible domain (e.g. omega >= -lambda0).
struct ParameterDomainError : Error {
    using Error::Error;
};

/// The gradient flow produced non-finite iterates even after tau reduction.
struct DivergenceError : Error {
    using Error::Error;
};

/// Malformed or inconsistent run configuration.
struct ConfigError : Error {
    using Error::Error;
};

/// File format / filesystem failures.
struct IoError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// 64-byte aligned allocator so FFTW new-array execution sees the same SIMD
// alignment class as the buffers the plans were created on.
// ---------------------------------------------------------------------------

template <class T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::size_t alignment = 64;

    AlignedAllocator() noexcept = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) {
        if (n == 0) return nullptr;
        void* p = ::operator new[](n * sizeof(T), std::align_val_t(alignment));
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) noexcept {
        ::operator delete[](p, std::align_val_t(alignment));
    }
    template <class U>
    bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
    template <class U>
    bool operator!=(const AlignedAllocator<U>&) const noexcept { return false; }
};

using CplxVec = std::vector<cplx, AlignedAllocator<cplx>>;
using RealVec = std::vector<double, AlignedAllocator<double>>;

// Print a double with 17 significant digits (exact binary round trip).
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace rnls
