#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense double-precision reduction kernels used by the embedding-similarity
// and reward-statistics paths. Each kernel has a scalar reference
// implementation and, on x86-64, an AVX2 variant; the active variant is
// picked once at startup (override with IDIOM_FORGE_ISA=scalar|avx2).

namespace forge::vecops {

enum class Isa { scalar, avx2 };

Isa active_isa();
std::string_view isa_name(Isa isa);
bool avx2_supported();

// Dispatched entry points.
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> v);
double sum_sq_dev(std::span<const double> v, double mean);

// Scalar reference kernels; the equivalence baseline for the SIMD variants.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* v, std::size_t n);
double sum_sq_dev(const double* v, std::size_t n, double mean);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* v, std::size_t n);
double sum_sq_dev(const double* v, std::size_t n, double mean);
}  // namespace avx2
#endif

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // population (divide by n)
};

MeanStd population_mean_std(std::span<const double> v);

}  // namespace forge::vecops
