#pragma once

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <vector>

#include "wavesource/core_model.hpp"

namespace wavesource {

/// Default cap on 2n_x for observability-matrix assembly; W has
/// (2n_x·m)·2n_x entries and is meant for desk-scale diagnostics.
inline constexpr int kObservabilitySizeCap = 200;

/// W = [H; HG; HG²; …; HG^{2n_x−1}] built by iterated row-block
/// multiplication, never forming G^k.
inline Matrix observability_matrix(const DiscreteWaveSystem& sys,
                                   int size_cap = kObservabilitySizeCap) {
  const int n = sys.state_dim();
  if (n > size_cap) throw DimensionError("observability_matrix: 2n_x exceeds size cap");
  const int m = sys.count_m();
  Matrix w(n * m, n);
  Matrix block = Matrix(sys.Hmat());
  for (int k = 0; k < n; ++k) {
    w.middleRows(static_cast<Eigen::Index>(k) * m, m) = block;
    if (k + 1 < n) block = block * sys.G();
  }
  return w;
}

struct ObservabilityReport {
  int n_states{0};
  int m{0};
  int rank_W{0};
  double cond_W{0.0};  // σ_max/σ_min, +inf when rank-deficient
  Vector singular_values;
};

/// Singular-value diagnostics of W. Rank uses the standard cutoff
/// τ = max(rows, cols)·ε·σ_max; cond_W is +inf below full column rank.
inline ObservabilityReport conditioning_report(const DiscreteWaveSystem& sys,
                                               int size_cap = kObservabilitySizeCap) {
  const Matrix w = observability_matrix(sys, size_cap);
  Eigen::BDCSVD<Matrix> svd(w);
  const Vector& sv = svd.singularValues();

  ObservabilityReport report;
  report.n_states = sys.state_dim();
  report.m = sys.count_m();
  report.singular_values = sv;
  const double sigma_max = sv.size() > 0 ? sv[0] : 0.0;
  const double tol = std::max(w.rows(), w.cols()) *
                     std::numeric_limits<double>::epsilon() * sigma_max;
  report.rank_W = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > tol) ++report.rank_W;
  if (report.rank_W == sys.state_dim() && sv[sv.size() - 1] > 0.0)
    report.cond_W = sigma_max / sv[sv.size() - 1];
  else
    report.cond_W = std::numeric_limits<double>::infinity();
  return report;
}

/// One conditioning report per placement, in input order.
inline std::vector<ObservabilityReport> measurement_sweep(
    const Grid& grid, const PhysicalParams& params,
    const std::vector<MeasurementSelection>& placements,
    int size_cap = kObservabilitySizeCap) {
  std::vector<ObservabilityReport> rows;
  rows.reserve(placements.size());
  for (const auto& sel : placements) {
    const auto sys = assemble_system(grid, params, sel);
    rows.push_back(conditioning_report(sys, size_cap));
  }
  return rows;
}

/// sqrt((1/n_x)·Σ (f_i − f̂_i)²)
inline double source_rmse(const SourceField& f_true, const SourceField& f_hat) {
  if (f_true.size() != f_hat.size())
    throw DimensionError("source_rmse: length mismatch");
  if (f_true.size() == 0) return 0.0;
  return std::sqrt((f_true.f - f_hat.f).squaredNorm() / f_true.size());
}

/// Per-step ‖ξ^j − ξ̂^j‖₂.
inline std::vector<double> state_error_series(const std::vector<Vector>& truth,
                                              const std::vector<Vector>& est) {
  if (truth.size() != est.size())
    throw DimensionError("state_error_series: length mismatch");
  std::vector<double> norms;
  norms.reserve(truth.size());
  for (std::size_t j = 0; j < truth.size(); ++j) {
    if (truth[j].size() != est[j].size())
      throw DimensionError("state_error_series: state dimension mismatch");
    norms.push_back((truth[j] - est[j]).norm());
  }
  return norms;
}

struct ErrorMetrics {
  double source_rmse{0.0};
  std::vector<double> state_error_norms;
  double terminal_state_error{0.0};
};

}  // namespace wavesource
