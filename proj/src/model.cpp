#include "sensel/model.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <sstream>

#include "sensel/errors.hpp"

namespace sensel {

namespace {

// Numerical rank via singular values, threshold max(m,n) * eps * sigma_max.
Eigen::Index numerical_rank(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double threshold = static_cast<double>(std::max(a.rows(), a.cols())) *
                           std::numeric_limits<double>::epsilon() * sv(0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > threshold) ++rank;
  }
  return rank;
}

}  // namespace

MeasurementMatrix::MeasurementMatrix(Eigen::MatrixXd rows, double noise_variance)
    : rows_(std::move(rows)), noise_variance_(noise_variance) {
  const Eigen::Index m = rows_.rows();
  const Eigen::Index n = rows_.cols();
  if (n < 1 || m < n) {
    std::ostringstream msg;
    msg << "measurement matrix must have m >= n >= 1, got " << m << "x" << n;
    throw DimensionMismatch(msg.str());
  }
  if (!(noise_variance_ > 0.0)) {
    throw InvalidArgument("noise variance must be positive");
  }
  if (numerical_rank(rows_) != n) {
    std::ostringstream msg;
    msg << "measurement matrix " << m << "x" << n << " is column-rank deficient";
    throw InvalidArgument(msg.str());
  }
}

Partition::Partition(MeasurementMatrix first, MeasurementMatrix second)
    : a1(std::move(first)), a2(std::move(second)) {
  if (a1.sensor_count() != a2.sensor_count()) {
    throw DimensionMismatch("partition halves must have the same row count");
  }
  if (a1.parameter_count() != a2.parameter_count()) {
    throw DimensionMismatch("partition halves must have the same column count");
  }
  // Rank n of each half is enforced by the MeasurementMatrix constructor.
}

MeasurementMatrix Partition::stacked() const {
  Eigen::MatrixXd full(a1.sensor_count() + a2.sensor_count(), a1.parameter_count());
  full << a1.rows(), a2.rows();
  return MeasurementMatrix(std::move(full), a1.noise_variance());
}

SelectionVector::SelectionVector(Eigen::VectorXd entries, SelectionKind kind, int budget)
    : entries_(std::move(entries)), kind_(kind), budget_(budget) {
  if (budget_ <= 0) {
    throw InvalidArgument("selection budget must be positive");
  }
  if (kind_ == SelectionKind::Boolean) {
    int ones = 0;
    for (Eigen::Index i = 0; i < entries_.size(); ++i) {
      const double v = entries_(i);
      if (v != 0.0 && v != 1.0) {
        throw InvalidArgument("boolean selection entries must be exactly 0 or 1");
      }
      if (v == 1.0) ++ones;
    }
    if (ones != budget_) {
      std::ostringstream msg;
      msg << "boolean selection has " << ones << " active entries, budget is " << budget_;
      throw InvalidArgument(msg.str());
    }
  } else {
    for (Eigen::Index i = 0; i < entries_.size(); ++i) {
      const double v = entries_(i);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw InvalidArgument("relaxed selection entries must lie in [0,1]");
      }
    }
    if (std::abs(entries_.sum() - budget_) > 1e-8) {
      std::ostringstream msg;
      msg << "relaxed selection sums to " << entries_.sum() << ", budget is " << budget_;
      throw InvalidArgument(msg.str());
    }
  }
}

BoundsReport BoundsReport::from_bounds(double upper, double lower) {
  BoundsReport report;
  report.upper = upper;
  report.lower = lower;
  report.gap = upper - lower;
  if (std::abs(upper) > kGapReferenceEpsilon && std::isfinite(lower)) {
    report.relative_gap_percent = relative_gap(upper, lower);
  } else {
    report.relative_gap_percent = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

Eigen::MatrixXd information_matrix(const MeasurementMatrix& a,
                                   const Eigen::VectorXd& weights,
                                   const std::optional<Eigen::MatrixXd>& s) {
  const Eigen::Index m = a.sensor_count();
  const Eigen::Index n = a.parameter_count();
  if (weights.size() != m) {
    std::ostringstream msg;
    msg << "selection has " << weights.size() << " entries for " << m << " sensors";
    throw DimensionMismatch(msg.str());
  }
  if (s && (s->rows() != n || s->cols() != n)) {
    std::ostringstream msg;
    msg << "augmentation is " << s->rows() << "x" << s->cols() << ", expected " << n << "x" << n;
    throw DimensionMismatch(msg.str());
  }
  // A^T diag(z) A, accumulated as a symmetric product.
  Eigen::MatrixXd info = a.rows().transpose() * weights.asDiagonal() * a.rows();
  if (s) info += *s;
  // The product above is symmetric up to roundoff; symmetrize so downstream
  // factorizations see an exactly symmetric matrix.
  info = ((info + info.transpose()) * 0.5).eval();
  return info;
}

Eigen::MatrixXd information_matrix(const MeasurementMatrix& a,
                                   const SelectionVector& z,
                                   const std::optional<Eigen::MatrixXd>& s) {
  return information_matrix(a, z.entries(), s);
}

double log_det_spd(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(n, n);
  double log_det = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = m(j, j) - chol.row(j).head(j).squaredNorm();
    if (!(pivot > 0.0)) {
      std::ostringstream msg;
      msg << "information matrix not positive definite (pivot " << pivot
          << " at column " << j << ")";
      throw SingularInformation(msg.str(), pivot);
    }
    chol(j, j) = std::sqrt(pivot);
    log_det += std::log(pivot);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double sum = chol.row(j).head(j).dot(chol.row(i).head(j));
      chol(i, j) = (m(i, j) - sum) / chol(j, j);
    }
  }
  return log_det;
}

double log_det_objective(const MeasurementMatrix& a,
                         const SelectionVector& z,
                         const std::optional<Eigen::MatrixXd>& s) {
  return log_det_spd(information_matrix(a, z, s));
}

SelectionVector stack_selections(const SelectionVector& z1, const SelectionVector& z2) {
  if (z1.kind() != z2.kind()) {
    throw InvalidArgument("cannot stack selections of different kinds");
  }
  Eigen::VectorXd stacked(z1.size() + z2.size());
  stacked << z1.entries(), z2.entries();
  return SelectionVector(std::move(stacked), z1.kind(), z1.budget() + z2.budget());
}

double relative_gap(double u, double l) {
  if (std::abs(u) <= kGapReferenceEpsilon) {
    std::ostringstream msg;
    msg << "relative gap undefined: reference |" << u << "| below " << kGapReferenceEpsilon;
    throw DegenerateReference(msg.str());
  }
  return 100.0 * std::abs(u - l) / std::abs(u);
}

}  // namespace sensel
