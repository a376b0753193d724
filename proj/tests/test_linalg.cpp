#include "linbai/errors.hpp"
#include "linbai/linalg.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace linbai;
using testing_support::Rng;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

ArmSet basis(std::size_t d) {
  std::vector<Vector> arms;
  for (std::size_t i = 0; i < d; ++i) arms.push_back(Vector::Unit(static_cast<Eigen::Index>(d), i));
  return ArmSet(arms);
}

ArmSet random_arms(Rng& rng, std::size_t n, std::size_t d) {
  std::vector<Vector> arms;
  for (std::size_t i = 0; i < n; ++i) arms.push_back(rng.normal_vector(d));
  return ArmSet(arms);
}

Matrix random_pd(Rng& rng, std::size_t d) {
  Matrix b(d, d);
  for (Eigen::Index i = 0; i < b.rows(); ++i) b.col(i) = rng.normal_vector(d);
  return b * b.transpose() + 0.1 * Matrix::Identity(d, d);
}

}  // namespace

TEST_CASE("arm set validation") {
  CHECK_THROWS_AS(ArmSet(std::vector<Vector>{}), PreconditionError);
  CHECK_THROWS_AS(ArmSet({vec({1, 0}), vec({1})}), DimensionError);
  CHECK_THROWS_AS(ArmSet({vec({1, 0}), vec({2, 0})}), PreconditionError);
  const ArmSet arms({vec({3, 4}), vec({0, 1})});
  CHECK(arms.norm_bound() == 5.0);
  CHECK(arms.dim() == 2);
}

TEST_CASE("simplex weights") {
  CHECK_THROWS(SimplexWeights({0.5, 0.6}));
  CHECK_THROWS(SimplexWeights({1.5, -0.5}));
  const auto u = SimplexWeights::uniform(4);
  CHECK(u[3] == doctest::Approx(0.25));
  CHECK(SimplexWeights::point_mass(3, 1)[1] == 1.0);
}

TEST_CASE("design matrix on the basis") {
  const ArmSet arms = basis(2);
  const std::vector<double> w1{1, 0};
  const std::vector<double> w2{0.5, 0.5};
  CHECK(design_matrix(arms, w1).matrix.isApprox(vec({1, 0}).asDiagonal().toDenseMatrix()));
  CHECK(design_matrix(arms, w2).matrix.isApprox(Matrix::Identity(2, 2) * 0.5));
  const std::vector<double> bad{1.0};
  CHECK_THROWS_AS(design_matrix(arms, bad), DimensionError);
}

TEST_CASE("design matrix against the triple loop") {
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const ArmSet arms = random_arms(rng, 5, 3);
    const auto w = rng.simplex(5);
    const Matrix v = design_matrix(arms, w).matrix;
    const Matrix oracle = testing_support::naive_design(arms.arms(), w);
    CHECK((v - oracle).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(v).eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("quad norm examples") {
  const DesignMatrix half{Matrix::Identity(2, 2) * 0.5, 0.0};
  CHECK(quad_norm(half, vec({1, -1}), NormMode::kInverse) == doctest::Approx(4.0));
  CHECK(quad_norm(half, vec({1, -1}), NormMode::kDirect) == doctest::Approx(1.0));
  DesignMatrix singular{Matrix::Zero(2, 2), 0.0};
  singular.matrix(0, 0) = 1.0;
  CHECK(quad_norm(singular, vec({0, 1}), NormMode::kInverse) == kInfiniteNorm);
  CHECK(quad_norm(singular, vec({2, 0}), NormMode::kInverse) == doctest::Approx(4.0));
  DesignMatrix zero{Matrix::Zero(2, 2), 0.0};
  CHECK(quad_norm(zero, vec({1, 0}), NormMode::kInverse) == kInfiniteNorm);
  CHECK(quad_norm(zero, vec({0, 0}), NormMode::kInverse) == 0.0);
  CHECK_THROWS_AS(quad_norm(half, vec({1, 0, 0}), NormMode::kDirect), DimensionError);
}

TEST_CASE("inverse quad norm against an explicit inverse") {
  Rng rng(12);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t d = 1 + rng.index(6);
    const Matrix v = random_pd(rng, d);
    const Vector x = rng.normal_vector(d);
    const double ridge = rep % 2 ? 0.0 : 0.3;
    const DesignMatrix dm{v, ridge};
    const Matrix inv = (v + ridge * Matrix::Identity(d, d)).inverse();
    const double oracle = x.dot(inv * x);
    const double got = quad_norm(dm, x, NormMode::kInverse);
    CHECK(got == doctest::Approx(oracle).epsilon(1e-8));
    // Cauchy-Schwarz: <x,x>^2 <= ||x||_V^2 ||x||_{V^-1}^2
    const double direct = quad_norm(DesignMatrix{v + ridge * Matrix::Identity(d, d), 0.0}, x,
                                    NormMode::kDirect);
    CHECK(direct * got >= x.squaredNorm() * x.squaredNorm() * (1 - 1e-10));
  }
}

TEST_CASE("quad norm properties") {
  Rng rng(13);
  for (int rep = 0; rep < 30; ++rep) {
    const ArmSet arms = random_arms(rng, 6, 3);
    std::vector<double> w = rng.simplex(6);
    const Vector x = rng.normal_vector(3);
    double sum = 0.0;
    for (std::size_t a = 0; a < 6; ++a) sum += w[a] * std::pow(x.dot(arms[a]), 2);
    CHECK(quad_norm(design_matrix(arms, w), x, NormMode::kDirect) ==
          doctest::Approx(sum).epsilon(1e-10));
    const double c = rng.uniform(0.1, 20.0);
    std::vector<double> cw = w;
    for (auto& v : cw) v *= c;
    CHECK(quad_norm(design_matrix(arms, cw), x, NormMode::kInverse) ==
          doctest::Approx(quad_norm(design_matrix(arms, w), x, NormMode::kInverse) / c)
              .epsilon(1e-9));
  }
}

TEST_CASE("regularized least squares") {
  const ArmSet arms = basis(2);
  CHECK(regularized_lse(arms, {}, {}, 1.0).isZero());
  const std::vector<std::size_t> one{0};
  const std::vector<double> y{2.0};
  const Vector th = regularized_lse(arms, one, y, 1.0);
  CHECK(th[0] == doctest::Approx(1.0));
  CHECK(th[1] == 0.0);
  const std::vector<double> y2{2.0, 3.0};
  CHECK_THROWS_AS(regularized_lse(arms, one, y2, 1.0), DimensionError);
  CHECK_THROWS(regularized_lse(arms, one, y, 0.0));
}

TEST_CASE("regularized least squares recovers noiseless parameters") {
  Rng rng(14);
  for (int rep = 0; rep < 10; ++rep) {
    const ArmSet arms = random_arms(rng, 5, 3);
    const Vector theta = rng.normal_vector(3);
    std::vector<std::size_t> pulls;
    std::vector<double> rewards;
    for (int t = 0; t < 40; ++t) {
      const std::size_t a = rng.index(5);
      pulls.push_back(a);
      rewards.push_back(theta.dot(arms[a]));
    }
    CHECK((regularized_lse(arms, pulls, rewards, 1e-12) - theta).norm() <= 1e-6);

    // permutation invariance
    std::vector<std::size_t> order(pulls.size());
    std::iota(order.begin(), order.end(), 0);
    std::reverse(order.begin(), order.end());
    std::vector<std::size_t> p2;
    std::vector<double> r2;
    for (auto i : order) {
      p2.push_back(pulls[i]);
      r2.push_back(rewards[i] + 0.0);
    }
    CHECK((regularized_lse(arms, p2, r2, 0.7) - regularized_lse(arms, pulls, rewards, 0.7)).norm() <=
          1e-10);
  }
}

TEST_CASE("rank one inverse update") {
  const Matrix upd = rank_one_inverse_update(Matrix::Identity(2, 2), vec({1, 0}));
  CHECK(upd(0, 0) == doctest::Approx(0.5));
  CHECK(upd(1, 1) == doctest::Approx(1.0));
  CHECK(upd(0, 1) == 0.0);
  CHECK(rank_one_inverse_update(upd, vec({0, 0})) == upd);

  Rng rng(15);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t d = 2 + rng.index(9);
    Matrix v = random_pd(rng, d);
    Matrix inv = v.inverse();
    const Vector a = rng.normal_vector(d);
    const Matrix fresh = (v + a * a.transpose()).inverse();
    CHECK((rank_one_inverse_update(inv, a) - fresh).cwiseAbs().maxCoeff() <=
          1e-8 * std::max(1.0, fresh.cwiseAbs().maxCoeff()));

    // composed updates against direct inversion
    v = Matrix::Identity(d, d);
    inv = v;
    for (int k = 0; k < 100; ++k) {
      const Vector b = rng.normal_vector(d);
      v += b * b.transpose();
      inv = rank_one_inverse_update(inv, b);
    }
    CHECK((inv - v.inverse()).cwiseAbs().maxCoeff() <= 1e-7);
  }
}
