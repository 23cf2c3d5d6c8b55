#include "horizon/gee.hpp"

#include <cmath>
#include <map>

namespace horizon {

std::vector<double> standardize(const std::vector<double>& values) {
  if (values.size() < 2) throw GeeError(GeeError::Kind::kDegenerateFeature, "standardize needs at least two values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  if (!(var > 0.0)) throw GeeError(GeeError::Kind::kDegenerateFeature, "feature is constant");
  const double sd = std::sqrt(var);
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back((v - mean) / sd);
  return out;
}

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<std::size_t> cluster_ids(const std::vector<std::string>& labels) {
  std::map<std::string, std::size_t> ids;
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(ids.emplace(l, ids.size()).first->second);
  return out;
}

Eigen::MatrixXd sandwich_covariance(const Eigen::MatrixXd& x, const Eigen::VectorXd& mu,
                                    const Eigen::VectorXd& residuals, const std::vector<std::size_t>& clusters) {
  const auto p = x.cols();
  const Eigen::VectorXd w = mu.array() * (1.0 - mu.array());
  const Eigen::MatrixXd bread = x.transpose() * w.asDiagonal() * x;
  std::size_t n_clusters = 0;
  for (auto c : clusters) n_clusters = std::max(n_clusters, c + 1);
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_clusters), p);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    scores.row(static_cast<Eigen::Index>(clusters[static_cast<std::size_t>(i)])) += x.row(i) * residuals(i);
  }
  const Eigen::MatrixXd meat = scores.transpose() * scores;
  const Eigen::MatrixXd inv = bread.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  Eigen::MatrixXd cov = inv * meat * inv;
  return (cov + cov.transpose()) / 2.0;
}

GeeFit fit_clustered_logit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& clusters,
                           std::vector<std::string> names, const GeeOptions& options) {
  const auto n = x.rows();
  const auto p = x.cols();
  if (n == 0 || p == 0) throw GeeError(GeeError::Kind::kShape, "empty design matrix");
  if (y.size() != n || static_cast<Eigen::Index>(clusters.size()) != n) {
    throw GeeError(GeeError::Kind::kShape, "design, outcome and cluster lengths differ");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y(i) != 0.0 && y(i) != 1.0) throw GeeError(GeeError::Kind::kShape, "outcomes must be 0 or 1");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < p) {
    throw GeeError(GeeError::Kind::kRankDeficient, "design matrix has rank " + std::to_string(qr.rank()) + " < " +
                                                       std::to_string(p) + " columns");
  }
  const auto ids = cluster_ids(clusters);
  std::size_t n_clusters = 0;
  for (auto c : ids) n_clusters = std::max(n_clusters, c + 1);
  if (n_clusters < 2) throw GeeError(GeeError::Kind::kTooFewClusters, "need at least two clusters");
  if (names.size() != static_cast<std::size_t>(p)) {
    names.clear();
    for (Eigen::Index j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
  }

  GeeFit fit;
  fit.names = std::move(names);
  fit.clusters = n_clusters;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd mu(n);
  for (int it = 1; it <= options.max_iterations; ++it) {
    const Eigen::VectorXd eta = x * beta;
    for (Eigen::Index i = 0; i < n; ++i) mu(i) = logistic(eta(i));
    const Eigen::VectorXd w = (mu.array() * (1.0 - mu.array())).max(1e-300);
    // Newton step on the log-likelihood: (X'WX) delta = X'(y - mu).
    const Eigen::MatrixXd info = x.transpose() * w.asDiagonal() * x;
    const Eigen::VectorXd score = x.transpose() * (y - mu);
    const Eigen::VectorXd delta = info.ldlt().solve(score);
    beta += delta;
    fit.iterations = it;
    if (!delta.allFinite()) break;
    if (delta.cwiseAbs().maxCoeff() < options.tolerance) {
      fit.converged = true;
      break;
    }
  }
  const Eigen::VectorXd eta = x * beta;
  for (Eigen::Index i = 0; i < n; ++i) mu(i) = logistic(eta(i));
  fit.separation = !beta.allFinite() || (eta.cwiseAbs().maxCoeff() > 30.0);
  fit.beta = beta;

  const Eigen::VectorXd w = mu.array() * (1.0 - mu.array());
  const Eigen::MatrixXd info = x.transpose() * w.asDiagonal() * x;
  fit.naive_covariance = info.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  fit.robust_covariance = sandwich_covariance(x, mu, y - mu, ids);
  fit.std_errors = fit.robust_covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.z = beta.cwiseQuotient(fit.std_errors);
  fit.p_values.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) fit.p_values(j) = std::erfc(std::fabs(fit.z(j)) / std::sqrt(2.0));
  return fit;
}

}  // namespace horizon
