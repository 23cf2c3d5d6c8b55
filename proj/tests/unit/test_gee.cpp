#include <cmath>
#include <random>

#include "doctest.h"
#include "horizon/gee.hpp"
#include "logit_oracle.hpp"

using namespace horizon;

namespace {

struct Sample {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<std::string> clusters;
  oracle::Mat xm;
  oracle::Vec yv;
};

// Intercept plus `p - 1` standard normal covariates; `per` rows per cluster.
Sample simulate(std::uint64_t seed, std::size_t n, std::size_t per, const std::vector<double>& beta) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> norm;
  std::uniform_real_distribution<double> unif;
  const auto p = beta.size();
  Sample s;
  s.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  s.y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    oracle::Vec row(p, 1.0);
    double eta = beta[0];
    for (std::size_t j = 1; j < p; ++j) {
      row[j] = norm(rng);
      eta += beta[j] * row[j];
    }
    const double yi = unif(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
    for (std::size_t j = 0; j < p; ++j) s.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    s.y(static_cast<Eigen::Index>(i)) = yi;
    s.xm.push_back(row);
    s.yv.push_back(yi);
    s.clusters.push_back("q" + std::to_string(i / per));
  }
  return s;
}

}  // namespace

TEST_SUITE("gee") {
  TEST_CASE("standardize uses the population deviation") {
    const auto z = standardize({1, 2, 3, 4});
    const double sd = std::sqrt(1.25);
    CHECK(z[0] == doctest::Approx(-1.5 / sd).epsilon(1e-12));
    CHECK(z[3] == doctest::Approx(1.5 / sd).epsilon(1e-12));
    CHECK_THROWS_AS(standardize({3, 3, 3}), GeeError);
    CHECK_THROWS_AS(standardize({1}), GeeError);
  }

  TEST_CASE("cluster ids follow first appearance") {
    CHECK(cluster_ids({"b", "a", "b", "c"}) == std::vector<std::size_t>{0, 1, 0, 2});
  }

  TEST_CASE("estimates and robust errors match a plain Newton oracle") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto s = simulate(seed, 400, 4, {0.3, -0.6, 0.8, 0.2});
      const auto fit = fit_clustered_logit(s.x, s.y, s.clusters);
      const auto ref = oracle::fit(s.xm, s.yv, s.clusters);
      CHECK(fit.converged);
      CHECK_FALSE(fit.separation);
      CHECK(fit.clusters == 100);
      for (std::size_t j = 0; j < ref.beta.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        CHECK(std::fabs(fit.beta(jj) - ref.beta[j]) < 1e-6);
        CHECK(std::fabs(fit.std_errors(jj) - ref.se[j]) < 1e-6);
        for (std::size_t k = 0; k < ref.beta.size(); ++k) {
          CHECK(std::fabs(fit.robust_covariance(jj, static_cast<Eigen::Index>(k)) - ref.robust[j][k]) < 1e-8);
        }
      }
    }
  }

  TEST_CASE("z and p are consistent with the robust errors") {
    const auto s = simulate(17, 300, 3, {0.0, 1.0, -0.5});
    const auto fit = fit_clustered_logit(s.x, s.y, s.clusters, {"const", "a", "b"});
    CHECK(fit.names == std::vector<std::string>{"const", "a", "b"});
    for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
      CHECK(fit.z(j) == doctest::Approx(fit.beta(j) / fit.std_errors(j)));
      CHECK(fit.p_values(j) == doctest::Approx(std::erfc(std::fabs(fit.z(j)) / std::sqrt(2.0))));
    }
  }

  TEST_CASE("rescaling a covariate leaves its z unchanged") {
    const auto s = simulate(23, 500, 5, {-0.2, 0.7, 0.4});
    auto scaled = s.x;
    scaled.col(1) *= 37.5;
    const auto a = fit_clustered_logit(s.x, s.y, s.clusters);
    const auto b = fit_clustered_logit(scaled, s.y, s.clusters);
    CHECK(std::fabs(a.z(1) - b.z(1)) < 1e-8);
    CHECK(std::fabs(a.beta(1) - 37.5 * b.beta(1)) < 1e-8);
    CHECK(std::fabs(a.z(2) - b.z(2)) < 1e-8);
  }

  TEST_CASE("singleton clusters reduce to the ordinary sandwich") {
    const auto s = simulate(3, 200, 1, {0.1, 0.5});
    const auto fit = fit_clustered_logit(s.x, s.y, s.clusters);
    const auto ref = oracle::fit(s.xm, s.yv, s.clusters);
    CHECK(std::fabs(fit.std_errors(1) - ref.se[1]) < 1e-8);
    // The naive covariance is the inverse information.
    const auto info_inv = oracle::invert([&] {
      oracle::Mat h(2, oracle::Vec(2, 0.0));
      for (std::size_t i = 0; i < s.xm.size(); ++i) {
        const double eta = ref.beta[0] * s.xm[i][0] + ref.beta[1] * s.xm[i][1];
        const double m = 1 / (1 + std::exp(-eta));
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) h[a][b] += m * (1 - m) * s.xm[i][a] * s.xm[i][b];
      }
      return h;
    }());
    CHECK(std::fabs(fit.naive_covariance(1, 1) - info_inv[1][1]) < 1e-8);
  }

  TEST_CASE("errors: shape, rank deficiency, too few clusters") {
    auto s = simulate(5, 60, 3, {0.0, 0.5});
    Eigen::MatrixXd dup(s.x.rows(), 3);
    dup << s.x, s.x.col(1) * 2.0;
    try {
      fit_clustered_logit(dup, s.y, s.clusters);
      FAIL("expected rank deficiency");
    } catch (const GeeError& e) {
      CHECK(e.kind() == GeeError::Kind::kRankDeficient);
    }
    std::vector<std::string> one(s.clusters.size(), "q");
    try {
      fit_clustered_logit(s.x, s.y, one);
      FAIL("expected too few clusters");
    } catch (const GeeError& e) {
      CHECK(e.kind() == GeeError::Kind::kTooFewClusters);
    }
    Eigen::VectorXd short_y = s.y.head(10);
    try {
      fit_clustered_logit(s.x, short_y, s.clusters);
      FAIL("expected shape error");
    } catch (const GeeError& e) {
      CHECK(e.kind() == GeeError::Kind::kShape);
    }
  }

  TEST_CASE("perfectly separated data is flagged") {
    Eigen::MatrixXd x(40, 2);
    Eigen::VectorXd y(40);
    std::vector<std::string> c;
    for (int i = 0; i < 40; ++i) {
      x(i, 0) = 1;
      x(i, 1) = i - 19.5;
      y(i) = i >= 20 ? 1 : 0;
      c.push_back("q" + std::to_string(i / 2));
    }
    const auto fit = fit_clustered_logit(x, y, c);
    CHECK(fit.separation);
  }

  TEST_CASE("logistic is symmetric and stable") {
    CHECK(logistic(0) == 0.5);
    CHECK(logistic(3) == doctest::Approx(1 - logistic(-3)));
    CHECK(logistic(800) == 1.0);
    CHECK(logistic(-800) == 0.0);
  }
}
