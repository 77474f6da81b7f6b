#include <doctest.h>

#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "bmcd/kernels.hpp"
#include "bmcd/parallel.hpp"

using namespace bmcd;

TEST_CASE("combo_defect_min variants are bit-identical") {
  if (!kernels::avx2_supported()) return;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t count : {1u, 3u, 4u, 7u, 16u, 129u, 1000u}) {
    std::vector<double> a(count), b(count), f(count);
    for (std::size_t k = 0; k < count; ++k) {
      a[k] = u(rng);
      b[k] = u(rng);
      f[k] = u(rng);
    }
    auto s = kernels::scalar::combo_defect_min(a.data(), b.data(), f.data(), count, 0.3, 0.7);
    auto v = kernels::avx2::combo_defect_min(a.data(), b.data(), f.data(), count, 0.3, 0.7);
    CHECK(s.value == v.value);
    CHECK(s.index == v.index);
  }
  // ties resolve to the first index
  std::vector<double> z(9, 0.0);
  CHECK(kernels::avx2::combo_defect_min(z.data(), z.data(), z.data(), 9, 1, 1).index == 0);
}

TEST_CASE("weighted_sum variants agree") {
  if (!kernels::avx2_supported()) return;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t count : {0u, 1u, 5u, 64u, 1001u}) {
    std::vector<double> w(count), v(count);
    double ref = 0;
    for (std::size_t k = 0; k < count; ++k) {
      w[k] = u(rng);
      v[k] = u(rng);
      ref += w[k] * v[k];
    }
    const double s = kernels::scalar::weighted_sum(w.data(), v.data(), count);
    const double a = kernels::avx2::weighted_sum(w.data(), v.data(), count);
    CHECK(s == doctest::Approx(ref).epsilon(1e-14));
    CHECK(a == doctest::Approx(s).epsilon(1e-14));
  }
}

TEST_CASE("isa selection") {
  const auto before = kernels::active_isa();
  CHECK(kernels::set_isa(kernels::Isa::Scalar) == kernels::Isa::Scalar);
  CHECK(kernels::active_isa() == kernels::Isa::Scalar);
  kernels::set_isa(before);
  CHECK(std::string(kernels::isa_name(kernels::Isa::Avx2)) == "avx2");
}

TEST_CASE("parallel_for covers every index once") {
  for (int jobs : {1, 3}) {
    set_worker_count(jobs);
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                      if (i == 7) throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
  }
  set_worker_count(1);
  CHECK(worker_count() == 1);
}
