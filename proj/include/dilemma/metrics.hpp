#ifndef DILEMMA_METRICS_HPP
#define DILEMMA_METRICS_HPP

#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace dilemma {

using Sample = std::vector<double>;

struct PcaResult {
  Eigen::VectorXd mean;
  // Non-increasing, non-negative; at most min(samples - 1, dimension).
  std::vector<double> eigenvalues;
  // One orthonormal direction per column. Each column is oriented so that
  // its coordinates sum to a non-negative value.
  Eigen::MatrixXd components;
  // eigenvalues / total variance (all zero if there is no variance).
  std::vector<double> explained_ratios;
  // Centered inputs expressed in the components, one row per input.
  Eigen::MatrixXd projections;

  Eigen::VectorXd Project(std::span<const double> x) const;
};

// Principal components of the sample covariance (denominator count - 1).
PcaResult Pca(std::span<const Sample> samples);

// Mean Euclidean distance over unordered pairs divided by sqrt(d / 6), the
// root mean squared distance between independent uniform[0,1]^d vectors.
double MeanPairwiseDistance(std::span<const Sample> samples);

class UndefinedSeparation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Distance between the set centroids over sqrt((V_a + V_b) / 2), where V is
// the mean squared distance of a set's members to its centroid. Throws
// UndefinedSeparation when both sets are point masses.
double CohensD(std::span<const Sample> a, std::span<const Sample> b);

// (sum l)^2 / sum l^2.
double ParticipationRatio(std::span<const double> eigenvalues);

}  // namespace dilemma

#endif  // DILEMMA_METRICS_HPP
