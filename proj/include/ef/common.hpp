#pragma once

#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ef {

/// Base class for all library errors. Subclasses name the failure mode so
/// callers can map them to exit codes or recover selectively.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define EF_DEFINE_ERROR(Name)                                              \
    struct Name : Error {                                                  \
        explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
    }

// conformal map
EF_DEFINE_ERROR(PoleProximity);
EF_DEFINE_ERROR(OutsideDomain);
// level-set extraction
EF_DEFINE_ERROR(EmptyLevel);
EF_DEFINE_ERROR(NearCriticalLevel);
// elliptic solves
EF_DEFINE_ERROR(SolverBreakdown);
EF_DEFINE_ERROR(NonContraction);
EF_DEFINE_ERROR(SingularOperator);
EF_DEFINE_ERROR(IterationStall);
EF_DEFINE_ERROR(KernelLeak);
// orbits and transport
EF_DEFINE_ERROR(NonClosingOrbit);
EF_DEFINE_ERROR(CriticalPointProximity);
EF_DEFINE_ERROR(BandContainsCriticalValue);
EF_DEFINE_ERROR(CriticalPointInRegion);
EF_DEFINE_ERROR(NotInRange);
EF_DEFINE_ERROR(CriticalSupport);
// state forging
EF_DEFINE_ERROR(NoSaddle);
EF_DEFINE_ERROR(OverlappingWindows);
EF_DEFINE_ERROR(PicardDivergence);
EF_DEFINE_ERROR(MeanViolation);
// verification
EF_DEFINE_ERROR(CFLViolation);
EF_DEFINE_ERROR(SymmetryViolation);
EF_DEFINE_ERROR(AsymmetricGrid);
EF_DEFINE_ERROR(CollinearityViolation);
EF_DEFINE_ERROR(ArnoldViolation);
// i/o
EF_DEFINE_ERROR(IntegrityError);
EF_DEFINE_ERROR(FormatError);

#undef EF_DEFINE_ERROR

namespace par {

/// Global switch between the OpenMP kernels and their serial reference
/// implementations. The loops guarded by it write disjoint outputs, so both
/// modes produce bit-identical results; tests assert that and the benchmark
/// compares timings.
inline std::atomic<bool>& parallel_flag() {
    static std::atomic<bool> enabled{true};
    return enabled;
}

inline bool enabled() { return parallel_flag().load(std::memory_order_relaxed); }
inline void set_enabled(bool on) { parallel_flag().store(on, std::memory_order_relaxed); }

/// Elementwise parallel loop over [0, n). Body must not touch shared mutable
/// state other than its own output slots.
template <class F>
inline void for_each(std::int64_t n, F&& body) {
    if (enabled()) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) body(i);
    } else {
        for (std::int64_t i = 0; i < n; ++i) body(i);
    }
}

/// Parallel loop with a coarser chunk, for bodies with per-iteration setup.
template <class F>
inline void for_each_dynamic(std::int64_t n, F&& body) {
    if (enabled()) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t i = 0; i < n; ++i) body(i);
    } else {
        for (std::int64_t i = 0; i < n; ++i) body(i);
    }
}

} // namespace par
} // namespace ef
