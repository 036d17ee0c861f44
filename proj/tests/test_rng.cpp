#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <til/rng.hpp>

using til::PhiloxStream;

TEST_CASE("streams are deterministic and independent") {
  PhiloxStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  bool all_equal = true, any_diff_stream = false, any_diff_seed = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.uniform();
    all_equal = all_equal && (x == b.uniform());
    any_diff_stream = any_diff_stream || (x != c.uniform());
    any_diff_seed = any_diff_seed || (x != d.uniform());
  }
  CHECK(all_equal);
  CHECK(any_diff_stream);
  CHECK(any_diff_seed);
}

TEST_CASE("uniforms stay inside the open unit interval") {
  PhiloxStream rng(1, 0);
  for (int i = 0; i < 200000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("normal moments") {
  PhiloxStream rng(2024, 5);
  const long n = 4000000;
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  for (long i = 0; i < n; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
    s3 += z * z * z;
    s4 += z * z * z * z;
  }
  const double inv = 1.0 / static_cast<double>(n);
  const double se = 1.0 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(s1 * inv) < 5.0 * se);
  CHECK(std::abs(s2 * inv - 1.0) < 5.0 * std::sqrt(2.0) * se);
  CHECK(std::abs(s3 * inv) < 5.0 * std::sqrt(15.0) * se);
  CHECK(std::abs(s4 * inv - 3.0) < 5.0 * std::sqrt(96.0) * se);
}

TEST_CASE("antithetic-free lag correlation is negligible") {
  PhiloxStream rng(9, 1);
  const long n = 1000000;
  double prev = rng.normal();
  double acc = 0.0;
  for (long i = 0; i < n; ++i) {
    const double z = rng.normal();
    acc += prev * z;
    prev = z;
  }
  CHECK(std::abs(acc / n) < 5.0 / std::sqrt(static_cast<double>(n)));
}
