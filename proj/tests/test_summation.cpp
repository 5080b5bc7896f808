#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "vpdisp/parallel.hpp"
#include "vpdisp/summation.hpp"

using namespace vpdisp;

TEST_CASE("pairwise sum of small integers is exact") {
  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(pairwise_sum(v) == 500500.0);
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}

TEST_CASE("compensated sum recovers cancelled terms") {
  CompensatedSum s;
  s.add(1.0);
  s.add(1e100);
  s.add(1.0);
  s.add(-1e100);
  CHECK(s.value() == 2.0);
}

TEST_CASE("pairwise sum is independent of how the input is stored") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::ArrayXd a(4097);
  for (auto& x : a) x = u(rng);
  std::vector<double> v(a.begin(), a.end());
  CHECK(pairwise_sum(a) == pairwise_sum(v));
}

TEST_CASE("parallel_for visits every index once") {
  for (unsigned threads : {1u, 3u, 8u}) {
    std::vector<int> hits(10007, 0);
    parallel_for(hits.size(), threads, [&](std::size_t i) { ++hits[i]; }, 16);
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
}
