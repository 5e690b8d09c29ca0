#pragma once

#include <Eigen/Dense>
#include <optional>

namespace sensel {

/// Stack of m sensor row-vectors a_i^T in R^n with full column rank.
///
/// The rank condition is checked at construction with the usual numerical
/// rank threshold max(m,n) * eps * sigma_max. noise_variance is carried as
/// metadata only; it shifts the log-volume by a constant and never enters
/// a selection decision.
class MeasurementMatrix {
 public:
  explicit MeasurementMatrix(Eigen::MatrixXd rows, double noise_variance = 1.0);

  const Eigen::MatrixXd& rows() const { return rows_; }
  Eigen::Index sensor_count() const { return rows_.rows(); }  // m
  Eigen::Index parameter_count() const { return rows_.cols(); }  // n
  double noise_variance() const { return noise_variance_; }

  /// Row i as a column vector a_i.
  Eigen::VectorXd row(Eigen::Index i) const { return rows_.row(i).transpose(); }

 private:
  Eigen::MatrixXd rows_;
  double noise_variance_;
};

/// Half/half split of the measurements between the two leader nodes.
/// Both halves must have the same row count and full column rank.
struct Partition {
  MeasurementMatrix a1;
  MeasurementMatrix a2;

  Partition(MeasurementMatrix first, MeasurementMatrix second);

  /// Full matrix [A1; A2] in partition order.
  MeasurementMatrix stacked() const;
};

enum class SelectionKind { Relaxed, Boolean };

/// Length-m selection vector z together with its budget k.
///
/// Relaxed vectors live in [0,1]^m with sum(z) = k up to 1e-8; Boolean
/// vectors have entries exactly 0 or 1 with sum(z) = k exactly.
class SelectionVector {
 public:
  SelectionVector(Eigen::VectorXd entries, SelectionKind kind, int budget);

  const Eigen::VectorXd& entries() const { return entries_; }
  SelectionKind kind() const { return kind_; }
  int budget() const { return budget_; }
  Eigen::Index size() const { return entries_.size(); }

 private:
  Eigen::VectorXd entries_;
  SelectionKind kind_;
  int budget_;
};

/// Upper/lower bound pair on the centralized objective with its gap.
/// relative_gap_percent is NaN when the reference |upper| is below the
/// divide-by-zero guard or the lower bound is -inf.
struct BoundsReport {
  double upper = 0.0;
  double lower = 0.0;
  double gap = 0.0;
  double relative_gap_percent = 0.0;

  static BoundsReport from_bounds(double upper, double lower);
};

/// Guard for relative_gap: references smaller than this are degenerate.
inline constexpr double kGapReferenceEpsilon = 1e-9;

/// Sum_i z_i a_i a_i^T, plus the optional PSD augmentation S. The raw
/// overload accepts any weight vector (the barrier solver and edge cases
/// like all-zero selections work on weights directly).
Eigen::MatrixXd information_matrix(const MeasurementMatrix& a,
                                   const Eigen::VectorXd& weights,
                                   const std::optional<Eigen::MatrixXd>& s = std::nullopt);
Eigen::MatrixXd information_matrix(const MeasurementMatrix& a,
                                   const SelectionVector& z,
                                   const std::optional<Eigen::MatrixXd>& s = std::nullopt);

/// log det of a symmetric positive definite matrix via Cholesky
/// (2 * sum of log pivots). Throws SingularInformation when a pivot
/// is not strictly positive.
double log_det_spd(const Eigen::MatrixXd& m);

/// log det of the information matrix of (a, z, s), in nats.
double log_det_objective(const MeasurementMatrix& a,
                         const SelectionVector& z,
                         const std::optional<Eigen::MatrixXd>& s = std::nullopt);

/// Concatenate two node selections in partition order (A1 rows first).
SelectionVector stack_selections(const SelectionVector& z1, const SelectionVector& z2);

/// 100 * |u - l| / |u|. Throws DegenerateReference when |u| <= 1e-9.
double relative_gap(double u, double l);

}  // namespace sensel
