#include "forge/vecops.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace forge::vecops {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum(const double* v, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += v[i];
  return acc;
}

double sum_sq_dev(const double* v, std::size_t n, double mean) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = v[i] - mean;
    acc += d * d;
  }
  return acc;
}

}  // namespace scalar

bool avx2_supported() {
#if defined(FORGE_BUILD_AVX2)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

struct Dispatch {
  Isa isa;
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*sum_sq_dev)(const double*, std::size_t, double);
};

Dispatch select() {
  const char* env = std::getenv("IDIOM_FORGE_ISA");
  const std::string want = env ? env : "";
  if (want == "scalar") {
    return {Isa::scalar, scalar::dot, scalar::sum, scalar::sum_sq_dev};
  }
#if defined(FORGE_BUILD_AVX2)
  if (avx2_supported() && (want.empty() || want == "avx2")) {
    return {Isa::avx2, avx2::dot, avx2::sum, avx2::sum_sq_dev};
  }
#endif
  return {Isa::scalar, scalar::dot, scalar::sum, scalar::sum_sq_dev};
}

const Dispatch& dispatch() {
  static const Dispatch d = select();
  return d;
}

}  // namespace

Isa active_isa() { return dispatch().isa; }

std::string_view isa_name(Isa isa) {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("dot: size mismatch " + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()));
  }
  return dispatch().dot(a.data(), b.data(), a.size());
}

double sum(std::span<const double> v) { return dispatch().sum(v.data(), v.size()); }

double sum_sq_dev(std::span<const double> v, double mean) {
  return dispatch().sum_sq_dev(v.data(), v.size(), mean);
}

MeanStd population_mean_std(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("population_mean_std: empty input");
  const double n = static_cast<double>(v.size());
  const double mean = sum(v) / n;
  const double var = sum_sq_dev(v, mean) / n;
  return {mean, std::sqrt(var)};
}

}  // namespace forge::vecops
