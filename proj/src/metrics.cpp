#include "dilemma/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace dilemma {

namespace {

Eigen::Index CheckedDimension(std::span<const Sample> samples) {
  const auto d = static_cast<Eigen::Index>(samples.front().size());
  for (const Sample& s : samples) {
    if (static_cast<Eigen::Index>(s.size()) != d) {
      throw std::invalid_argument("samples have different dimensions (" +
                                  std::to_string(d) + " vs " + std::to_string(s.size()) + ")");
    }
  }
  if (d == 0) throw std::invalid_argument("samples are zero-dimensional");
  return d;
}

Eigen::MatrixXd ToMatrix(std::span<const Sample> samples, Eigen::Index d) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(samples.size()), d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(samples[static_cast<std::size_t>(i)].data(), d);
  }
  return x;
}

Eigen::VectorXd Centroid(std::span<const Sample> set, Eigen::Index d) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
  for (const Sample& s : set) c += Eigen::Map<const Eigen::VectorXd>(s.data(), d);
  return c / static_cast<double>(set.size());
}

double MeanSquaredSpread(std::span<const Sample> set, const Eigen::VectorXd& centroid) {
  double total = 0.0;
  for (const Sample& s : set) {
    total += (Eigen::Map<const Eigen::VectorXd>(s.data(), centroid.size()) - centroid).squaredNorm();
  }
  return total / static_cast<double>(set.size());
}

}  // namespace

Eigen::VectorXd PcaResult::Project(std::span<const double> x) const {
  if (static_cast<Eigen::Index>(x.size()) != mean.size()) {
    throw std::invalid_argument("projection input has the wrong dimension");
  }
  const Eigen::VectorXd centered = Eigen::Map<const Eigen::VectorXd>(x.data(), mean.size()) - mean;
  return components.transpose() * centered;
}

PcaResult Pca(std::span<const Sample> samples) {
  if (samples.size() < 2) throw std::invalid_argument("PCA needs at least 2 samples");
  const Eigen::Index d = CheckedDimension(samples);
  const auto count = static_cast<Eigen::Index>(samples.size());

  Eigen::MatrixXd x = ToMatrix(samples, d);
  PcaResult result;
  result.mean = x.colwise().mean().transpose();
  x.rowwise() -= result.mean.transpose();
  const Eigen::MatrixXd covariance = (x.transpose() * x) / static_cast<double>(count - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");

  // Eigen returns ascending order.
  const Eigen::Index kept = std::min(count - 1, d);
  result.components.resize(d, kept);
  result.eigenvalues.resize(static_cast<std::size_t>(kept));
  for (Eigen::Index i = 0; i < kept; ++i) {
    const Eigen::Index src = d - 1 - i;
    result.eigenvalues[static_cast<std::size_t>(i)] = std::max(0.0, solver.eigenvalues()(src));
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    const double sum = v.sum();
    bool flip = sum < 0.0;
    if (sum == 0.0) {
      for (Eigen::Index k = 0; k < d; ++k) {
        if (v(k) != 0.0) {
          flip = v(k) < 0.0;
          break;
        }
      }
    }
    if (flip) v = -v;
    result.components.col(i) = v;
  }

  const double total = std::max(0.0, covariance.trace());
  result.explained_ratios.resize(result.eigenvalues.size(), 0.0);
  if (total > 0.0) {
    double kept_sum = 0.0;
    for (double l : result.eigenvalues) kept_sum += l;
    // Dropped eigenvalues are zero up to rounding; normalize by the kept sum
    // so the ratios add up to one.
    for (std::size_t i = 0; i < result.eigenvalues.size(); ++i) {
      result.explained_ratios[i] = kept_sum > 0.0 ? result.eigenvalues[i] / kept_sum : 0.0;
    }
  }
  result.projections = x * result.components;
  return result;
}

double MeanPairwiseDistance(std::span<const Sample> samples) {
  if (samples.size() < 2) throw std::invalid_argument("MPD needs at least 2 samples");
  const Eigen::Index d = CheckedDimension(samples);
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMatrix x = ToMatrix(samples, d);
  const Eigen::Index count = x.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < count; ++i) {
    for (Eigen::Index j = i + 1; j < count; ++j) total += (x.row(i) - x.row(j)).norm();
  }
  const double pairs = 0.5 * static_cast<double>(count) * static_cast<double>(count - 1);
  return total / pairs / std::sqrt(static_cast<double>(d) / 6.0);
}

double CohensD(std::span<const Sample> a, std::span<const Sample> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw std::invalid_argument("Cohen's d needs at least 2 samples per set");
  }
  const Eigen::Index d = CheckedDimension(a);
  if (CheckedDimension(b) != d) throw std::invalid_argument("sets have different dimensions");
  const Eigen::VectorXd ca = Centroid(a, d);
  const Eigen::VectorXd cb = Centroid(b, d);
  const double pooled = (MeanSquaredSpread(a, ca) + MeanSquaredSpread(b, cb)) / 2.0;
  if (pooled == 0.0) {
    throw UndefinedSeparation("undefined separation: both sets are point masses");
  }
  return (ca - cb).norm() / std::sqrt(pooled);
}

double ParticipationRatio(std::span<const double> eigenvalues) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double l : eigenvalues) {
    if (l < 0.0) throw std::invalid_argument("participation ratio needs non-negative eigenvalues");
    sum += l;
    sum_sq += l * l;
  }
  if (sum_sq == 0.0) throw std::invalid_argument("participation ratio of all-zero eigenvalues");
  return sum * sum / sum_sq;
}

}  // namespace dilemma
