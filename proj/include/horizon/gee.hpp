#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace horizon {

class GeeError : public std::runtime_error {
 public:
  enum class Kind { kDegenerateFeature, kRankDeficient, kTooFewClusters, kShape };

  GeeError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// z-scores with the population standard deviation. Throws kDegenerateFeature
// for fewer than two values or zero variance.
std::vector<double> standardize(const std::vector<double>& values);

struct GeeOptions {
  int max_iterations = 100;
  double tolerance = 1e-8;  // on max |beta change|
};

struct GeeFit {
  std::vector<std::string> names;
  Eigen::VectorXd beta;
  Eigen::MatrixXd robust_covariance;  // cluster sandwich
  Eigen::MatrixXd naive_covariance;   // inverse Fisher information
  Eigen::VectorXd std_errors;         // robust
  Eigen::VectorXd z;
  Eigen::VectorXd p_values;  // two-sided, normal reference
  int iterations = 0;
  bool converged = false;
  // Fitted probabilities collapsed onto 0 or 1: the coefficients are running
  // off to infinity and should not be read as estimates.
  bool separation = false;
  std::size_t clusters = 0;
};

double logistic(double x);

// Maps cluster labels to dense ids in first-seen order.
std::vector<std::size_t> cluster_ids(const std::vector<std::string>& labels);

// A^-1 B A^-1 with A = sum x x' mu(1-mu) and B = sum over clusters of the
// outer product of the summed scores x * residual.
Eigen::MatrixXd sandwich_covariance(const Eigen::MatrixXd& x, const Eigen::VectorXd& mu,
                                    const Eigen::VectorXd& residuals, const std::vector<std::size_t>& clusters);

// Logistic regression by IRLS under the independence working correlation, with
// cluster-robust covariance. Throws GeeError for shape problems, rank
// deficiency or fewer than two clusters.
GeeFit fit_clustered_logit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& clusters,
                           std::vector<std::string> names = {}, const GeeOptions& options = {});

}  // namespace horizon
