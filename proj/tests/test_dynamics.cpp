#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cotloop/dynamics.hpp"
#include "cotloop/error.hpp"
#include "test_support.hpp"

using namespace cotloop;
using testing_support::random_vector;

namespace {

using Vec = std::vector<double>;

// Householder reflection I - 2 v v^T / (v^T v), applied to x.
Vec reflect(const Vec& v, const Vec& x) {
  double vv = 0, vx = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    vv += v[i] * v[i];
    vx += v[i] * x[i];
  }
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - 2.0 * vx / vv * v[i];
  return out;
}

}  // namespace

TEST_CASE("analytic cases") {
  SUBCASE("identical") {
    const auto s = compute_transition(Vec{1, 0}, Vec{1, 0});
    CHECK(s.delta_mag == 0.0);
    CHECK(s.cos_ang == 1.0);
    CHECK(s.z == 0.0);
  }
  SUBCASE("orthogonal") {
    const auto s = compute_transition(Vec{1, 0}, Vec{0, 1});
    CHECK(s.delta_mag == std::sqrt(2.0));
    CHECK(s.cos_ang == 0.0);
    CHECK(s.z == std::sqrt(2.0));
  }
  SUBCASE("antiparallel") {
    const auto s = compute_transition(Vec{1, 0}, Vec{-2, 0});
    CHECK(s.delta_mag == 3.0);
    CHECK(s.cos_ang == -1.0);
    CHECK(s.z == 6.0);
  }
}

TEST_CASE("matches the scalar-loop oracle on random 64-dim pairs") {
  NormalStream rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec a = random_vector(rng, 64);
    const Vec b = random_vector(rng, 64);
    const auto s = compute_transition(a, b, 5);
    const auto o = oracle::transition(a, b);
    CHECK(s.transition_index == 5);
    CHECK(std::abs(s.delta_mag - o.delta_mag) <= 1e-12);
    CHECK(std::abs(s.cos_ang - o.cos_ang) <= 1e-12);
    CHECK(std::abs(s.z - o.z) <= 1e-12);
  }
}

TEST_CASE("scale covariance") {
  NormalStream rng(3);
  for (double alpha : {1e-3, 0.5, 7.0, 1e3}) {
    const Vec a = random_vector(rng, 16);
    const Vec b = random_vector(rng, 16);
    Vec sa = a, sb = b;
    for (auto& v : sa) v *= alpha;
    for (auto& v : sb) v *= alpha;
    const auto s = compute_transition(a, b);
    const auto t = compute_transition(sa, sb);
    CHECK(t.delta_mag == doctest::Approx(alpha * s.delta_mag).epsilon(1e-12));
    CHECK(std::abs(t.cos_ang - s.cos_ang) <= 1e-12);
    CHECK(t.z == doctest::Approx(alpha * s.z).epsilon(1e-9));
  }
}

TEST_CASE("rotation invariance under Householder reflections") {
  NormalStream rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec a = random_vector(rng, 32);
    const Vec b = random_vector(rng, 32);
    const Vec v = random_vector(rng, 32);
    const auto s = compute_transition(a, b);
    const auto t = compute_transition(reflect(v, a), reflect(v, b));
    CHECK(std::abs(s.delta_mag - t.delta_mag) <= 1e-9);
    CHECK(std::abs(s.cos_ang - t.cos_ang) <= 1e-9);
    CHECK(std::abs(s.z - t.z) <= 1e-9);
  }
}

TEST_CASE("symmetry and z structure") {
  NormalStream rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec a = random_vector(rng, 8);
    const Vec b = random_vector(rng, 8);
    const auto ab = compute_transition(a, b);
    const auto ba = compute_transition(b, a);
    CHECK(ab.delta_mag == doctest::Approx(ba.delta_mag).epsilon(1e-14));
    CHECK(ab.cos_ang == doctest::Approx(ba.cos_ang).epsilon(1e-14));
    CHECK(ab.z == doctest::Approx(ba.z).epsilon(1e-12));
    CHECK(ab.z >= 0.0);
    CHECK(ab.cos_ang >= -1.0);
    CHECK(ab.cos_ang <= 1.0);
    // For a fixed step length, z is largest when the direction reverses.
    CHECK(ab.z <= 2.0 * ab.delta_mag + 1e-12);
  }
  // Parallel vectors of different length: cos = 1, so z = 0 despite motion.
  const auto s = compute_transition(Vec{1, 2, 3}, Vec{2, 4, 6});
  CHECK(s.delta_mag > 0.0);
  CHECK(s.z == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("cosine of near-parallel vectors is clamped") {
  const Vec a{0.1, 0.2, 0.3};
  const auto s = compute_transition(a, a);
  CHECK(s.cos_ang <= 1.0);
  CHECK(s.z >= 0.0);
}

TEST_CASE("errors") {
  CHECK_THROWS_WITH_AS(compute_transition(Vec{1, 0}, Vec{1, 0, 0}), doctest::Contains("DimensionMismatch"),
                       Error);
  CHECK_THROWS_AS(compute_transition(Vec{}, Vec{}), Error);
  try {
    compute_transition(Vec{0, 0}, Vec{1, 0});
    FAIL("expected ZeroNormVector");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroNormVector);
  }
  try {
    compute_transition(Vec{1, 0}, Vec{1e-13, 0});
    FAIL("expected ZeroNormVector");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroNormVector);
  }
}
