#include "linbai/errors.hpp"
#include "linbai/stopping.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace linbai;
using testing_support::basis_vectors;
using testing_support::Rng;
using testing_support::vec;

namespace {

ThresholdParams unit_params(std::size_t d = 2) {
  ThresholdParams p;
  p.d = d;
  p.L = 1.0;
  p.eta = 1.0;
  p.M = 1.0;
  return p;
}

// max_j <theta, a_j - a*> + ||a* - a_j||_{V^-1} sqrt(2 beta), the gap-index form.
double gap_index(const ProblemSpec& spec, const Vector& theta, const Matrix& v, double beta) {
  const auto& arms = spec.arms.arms();
  std::size_t best = 0;
  for (std::size_t k = 1; k < arms.size(); ++k) {
    if (theta.dot(arms[k]) > theta.dot(arms[best])) best = k;
  }
  const Matrix inv = v.inverse();
  double b = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < arms.size(); ++j) {
    if (j == best) continue;
    const Vector dir = arms[best] - arms[j];
    b = std::max(b, -theta.dot(dir) + std::sqrt(dir.dot(inv * dir)) * std::sqrt(2 * beta));
  }
  return b;
}

}  // namespace

TEST_CASE("threshold at t = 0") {
  const auto p = unit_params();
  CHECK(beta_threshold(0, 0.1, p) == doctest::Approx(4.948551119283393).epsilon(1e-12));
  const double expected = std::pow(std::sqrt(std::log(1 / 0.05)) + std::sqrt(0.5), 2);
  CHECK(beta_threshold(0, 0.05, p) == doctest::Approx(expected));
  CHECK_THROWS(beta_threshold(0, 1.0, p));
  CHECK_THROWS(beta_threshold(-1, 0.5, p));
}

TEST_CASE("threshold grows with t and 1/delta") {
  ThresholdParams p = unit_params(3);
  p.eta = 0.7;
  p.M = 2.0;
  p.L = 1.5;
  double prev = -1.0;
  for (int i = 0; i < 100; ++i) {
    const double t = std::pow(1.2, i);
    const double b = beta_threshold(t, 0.01, p);
    CHECK(b > prev);
    CHECK(b >= std::log(100.0));
    prev = b;
  }
  prev = -1.0;
  for (int i = 1; i <= 100; ++i) {
    const double delta = std::pow(0.8, i);
    const double b = beta_threshold(50, delta, p);
    CHECK(b > prev);
    prev = b;
  }
}

TEST_CASE("exploration rate") {
  const auto p = unit_params();
  CHECK(exploration_rate(1, p) == beta_threshold(1, 0.5, p));
  CHECK(exploration_rate(10, p) == doctest::Approx(beta_threshold(10, 1e-3, p)));
  CHECK_THROWS_AS(exploration_rate(0, p), PreconditionError);
  double prev = exploration_rate(2, p);
  for (std::uint64_t t = 3; t < 5000; t += 7) {
    const double h = exploration_rate(t, p);
    CHECK(h >= prev);
    prev = h;
  }
}

TEST_CASE("parameter validation") {
  auto p = unit_params();
  p.alpha_explore = 2.0;
  CHECK_THROWS(p.validate());
  p = unit_params();
  p.eta = 0.0;
  CHECK_THROWS(p.validate());
}

TEST_CASE("GLR statistic on two orthogonal arms") {
  const auto spec = ProblemSpec::bai(ArmSet(basis_vectors(2)));
  const auto p = unit_params();
  for (std::uint64_t n : {1, 4, 40, 400}) {
    const std::vector<std::uint64_t> counts{n, n};
    const auto s = glr_stopping(spec, vec({1, 0}), counts, 0.1, p);
    CHECK(s.statistic == doctest::Approx(static_cast<double>(n) / 4));
    CHECK(s.threshold == doctest::Approx(beta_threshold(2.0 * n, 0.1, p)));
    CHECK(s.stop == (s.statistic > s.threshold));
    CHECK(s.answer.code == 0);
  }
  const std::vector<std::uint64_t> one_sided{100, 0};
  const auto s = glr_stopping(spec, vec({1, 0}), one_sided, 0.1, p);
  CHECK(s.statistic == 0.0);
  CHECK_FALSE(s.stop);

  const std::vector<std::uint64_t> none{0, 0};
  const auto cold = glr_stopping(spec, vec({0, 0}), none, 0.1, p);
  CHECK(cold.degenerate);
  CHECK_FALSE(cold.stop);
  CHECK(cold.statistic == 0.0);
}

TEST_CASE("GLR statistic equals the BAI closed form") {
  Rng rng(51);
  const auto p = unit_params(3);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<Vector> arms;
    for (int i = 0; i < 5; ++i) arms.push_back(rng.normal_vector(3));
    const auto spec = ProblemSpec::bai(ArmSet(arms));
    std::vector<std::uint64_t> counts(5);
    std::vector<double> w(5);
    for (std::size_t i = 0; i < 5; ++i) {
      counts[i] = 1 + rng.index(30);
      w[i] = static_cast<double>(counts[i]);
    }
    const Vector theta = rng.normal_vector(3);
    const Matrix inv = testing_support::naive_design(arms, w).inverse();
    std::size_t best = 0;
    for (std::size_t k = 1; k < 5; ++k) {
      if (theta.dot(arms[k]) > theta.dot(arms[best])) best = k;
    }
    double closed = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < 5; ++i) {
      if (i == best) continue;
      const Vector dir = arms[i] - arms[best];
      const double g = theta.dot(-dir);
      closed = std::min(closed, (g >= 0 ? g * g : 0.0) / (2 * dir.dot(inv * dir)));
    }
    const auto s = glr_stopping(spec, theta, counts, 0.1, p);
    CHECK(s.statistic == doctest::Approx(closed).epsilon(1e-8));

    // more samples never lower the statistic
    auto more = counts;
    more[rng.index(5)] += 5;
    CHECK(glr_stopping(spec, theta, more, 0.1, p).statistic >= s.statistic * (1 - 1e-12));
  }
}

TEST_CASE("GLR stop agrees with the gap-index stop") {
  Rng rng(52);
  const auto p = unit_params(2);
  for (int rep = 0; rep < 300; ++rep) {
    std::vector<Vector> arms;
    for (int i = 0; i < 4; ++i) arms.push_back(rng.normal_vector(2));
    const auto spec = ProblemSpec::bai(ArmSet(arms));
    std::vector<std::uint64_t> counts(4);
    std::vector<double> w(4);
    for (std::size_t i = 0; i < 4; ++i) {
      counts[i] = 1 + rng.index(200);
      w[i] = static_cast<double>(counts[i]);
    }
    const Vector theta = rng.normal_vector(2);
    const auto s = glr_stopping(spec, theta, counts, rng.uniform(0.001, 0.5), p);
    const Matrix v = testing_support::naive_design(arms, w);
    CHECK(s.stop == (gap_index(spec, theta, v, s.threshold) < 0.0));
  }
}

TEST_CASE("GLR on threshold problems") {
  const auto spec = ProblemSpec::threshold(ArmSet(basis_vectors(2)), 1.0);
  const std::vector<std::uint64_t> counts{10, 10};
  const auto s = glr_stopping(spec, vec({2, 0}), counts, 0.1, unit_params());
  // min((2-1)^2 / (2/10), (1-0)^2 / (2/10)) = 5
  CHECK(s.statistic == doctest::Approx(5.0));
  CHECK(s.answer.code == 0b01);
  CHECK_THROWS_AS(glr_stopping(spec, vec({2, 0}), std::vector<std::uint64_t>{1}, 0.1, unit_params()),
                  DimensionError);
}
