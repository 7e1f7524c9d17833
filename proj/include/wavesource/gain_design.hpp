#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "wavesource/core_model.hpp"

namespace wavesource {

/// Max modulus over all eigenvalues. Full eigen-decomposition up to
/// dimension 1200; growth-rate power iteration above that.
inline double spectral_radius(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("spectral_radius: matrix not square");
  const Eigen::Index n = m.rows();
  if (n == 0) return 0.0;
  if (n <= 1200) {
    Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
  }
  // Growth-rate estimate ‖M^k x‖^{1/k}, robust to complex dominant pairs.
  Vector x = Vector::Ones(n).normalized();
  double log_growth = 0.0;
  int counted = 0;
  for (int k = 0; k < 600; ++k) {
    Vector y = m * x;
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    if (k >= 100) {  // discard transient
      log_growth += std::log(norm);
      ++counted;
    }
    x = y / norm;
  }
  return std::exp(log_growth / counted);
}

enum class GainParameterization { ScalarOnDiag, TwoScalarBlocks, ExplicitValues };

/// Sparsity template for the observer gain. The pattern lists the (row,
/// measurement-column) pairs allowed to be nonzero.
struct GainTemplate {
  GainParameterization parameterization{GainParameterization::ScalarOnDiag};
  std::vector<std::pair<int, int>> pattern;
  Matrix explicit_values;  // ExplicitValues only

  /// γ₁ on the v-row of each measured node, γ₂ on its w-row.
  static GainTemplate scalar_on_diag(const DiscreteWaveSystem& sys) {
    GainTemplate t;
    t.parameterization = GainParameterization::ScalarOnDiag;
    const auto& nodes = sys.measured_nodes();
    for (int c = 0; c < static_cast<int>(nodes.size()); ++c) {
      t.pattern.emplace_back(nodes[c], c);
      t.pattern.emplace_back(nodes[c] + sys.n_x(), c);
    }
    return t;
  }

  /// Two scalars scaling structured blocks built from the Laplacian:
  /// v-rows get γ₁·(Δt·E_SS + 2I), w-rows get γ₂·(E_SS + (1/Δt)·I), with
  /// E_SS restricted to the measured nodes. At (1, 1) with full
  /// measurements this places every eigenvalue of (G − LH) at zero.
  static GainTemplate two_scalar_blocks(const DiscreteWaveSystem& sys) {
    GainTemplate t;
    t.parameterization = GainParameterization::TwoScalarBlocks;
    const auto& nodes = sys.measured_nodes();
    const int m = static_cast<int>(nodes.size());
    for (int a = 0; a < m; ++a) {
      for (int c = 0; c < m; ++c) {
        if (std::abs(nodes[a] - nodes[c]) <= 1) {
          t.pattern.emplace_back(nodes[a], c);
          t.pattern.emplace_back(nodes[a] + sys.n_x(), c);
        }
      }
    }
    return t;
  }

  static GainTemplate from_values(Matrix values) {
    GainTemplate t;
    t.parameterization = GainParameterization::ExplicitValues;
    t.explicit_values = std::move(values);
    for (int r = 0; r < t.explicit_values.rows(); ++r)
      for (int c = 0; c < t.explicit_values.cols(); ++c)
        if (t.explicit_values(r, c) != 0.0) t.pattern.emplace_back(r, c);
    return t;
  }
};

/// Materializes the template at scalar parameters (g1, g2); ignored for
/// ExplicitValues.
inline Matrix build_gain(const DiscreteWaveSystem& sys, const GainTemplate& tmpl,
                         double g1 = 0.0, double g2 = 0.0) {
  const auto& nodes = sys.measured_nodes();
  const int m = static_cast<int>(nodes.size());
  Matrix L = Matrix::Zero(sys.state_dim(), m);
  switch (tmpl.parameterization) {
    case GainParameterization::ScalarOnDiag:
      for (int c = 0; c < m; ++c) {
        L(nodes[c], c) = g1;
        L(nodes[c] + sys.n_x(), c) = g2;
      }
      break;
    case GainParameterization::TwoScalarBlocks: {
      const double dt = sys.grid().dt;
      const double s = sys.params().c_squared * dt / (sys.grid().dx * sys.grid().dx);
      for (int a = 0; a < m; ++a) {
        for (int c = 0; c < m; ++c) {
          double e_ac = 0.0;
          if (nodes[a] == nodes[c]) e_ac = -2.0 * s;
          else if (std::abs(nodes[a] - nodes[c]) == 1) e_ac = s;
          else continue;
          L(nodes[a], c) += g1 * dt * e_ac;
          L(nodes[a] + sys.n_x(), c) += g2 * e_ac;
        }
        L(nodes[a], a) += g1 * 2.0;
        L(nodes[a] + sys.n_x(), a) += g2 / dt;
      }
      break;
    }
    case GainParameterization::ExplicitValues:
      if (tmpl.explicit_values.rows() != sys.state_dim() ||
          tmpl.explicit_values.cols() != m)
        throw DimensionError("explicit gain values dimension mismatch");
      L = tmpl.explicit_values;
      break;
  }
  return L;
}

struct GainDesignResult {
  Matrix L;
  double spectral_radius{0.0};  // of (G − LH) for the returned L
  std::vector<double> params_used;
  bool stable{false};
};

struct GainValidation {
  double radius{0.0};
  bool stable{false};
};

/// radius = spectral_radius(G − LH); stable iff radius < 1 − margin.
inline GainValidation validate_gain(const DiscreteWaveSystem& sys, const Matrix& L,
                                    double margin = 1e-8) {
  if (L.rows() != sys.state_dim() || L.cols() != sys.count_m())
    throw DimensionError("validate_gain: gain dimension mismatch");
  Matrix closed = Matrix(sys.G());
  for (int c = 0; c < sys.count_m(); ++c)
    closed.col(sys.measured_nodes()[c]) -= L.col(c);
  const double radius = spectral_radius(closed);
  return {radius, radius < 1.0 - margin};
}

/// Searches the template's two scalar parameters (coarse grid, then local
/// pattern refinement) minimizing spectral_radius(G − LH). A best radius
/// >= 1 is reported with stable = false rather than as an error.
inline GainDesignResult design_gain(const DiscreteWaveSystem& sys,
                                    const GainTemplate& tmpl, double target_radius) {
  if (!(target_radius > 0.0 && target_radius < 1.0))
    throw DimensionError("design_gain: target_radius must be in (0, 1)");
  if (tmpl.pattern.empty() &&
      tmpl.parameterization != GainParameterization::ExplicitValues)
    throw DimensionError("design_gain: empty gain template");

  GainDesignResult result;
  if (tmpl.parameterization == GainParameterization::ExplicitValues) {
    result.L = build_gain(sys, tmpl);
    const auto val = validate_gain(sys, result.L);
    result.spectral_radius = val.radius;
    result.stable = val.radius < 1.0;
    return result;
  }

  const auto objective = [&](double g1, double g2) {
    return validate_gain(sys, build_gain(sys, tmpl, g1, g2)).radius;
  };

  const std::vector<double> coarse = {0.0, 0.02, 0.05, 0.1, 0.2, 0.3,
                                      0.5, 0.7,  1.0,  1.5, 2.0, 3.0};
  double best_g1 = 0.0, best_g2 = 0.0;
  double best_radius = std::numeric_limits<double>::infinity();
  for (double g1 : coarse) {
    for (double g2 : coarse) {
      const double r = objective(g1, g2);
      if (r < best_radius) {
        best_radius = r;
        best_g1 = g1;
        best_g2 = g2;
      }
    }
  }

  // Compass-pattern refinement with shrinking step.
  double step = 0.25;
  while (step > 1e-5 && best_radius > 1e-12) {
    bool improved = false;
    const double cand[4][2] = {{best_g1 + step, best_g2}, {best_g1 - step, best_g2},
                               {best_g1, best_g2 + step}, {best_g1, best_g2 - step}};
    for (const auto& c : cand) {
      const double r = objective(c[0], c[1]);
      if (r < best_radius) {
        best_radius = r;
        best_g1 = c[0];
        best_g2 = c[1];
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
  }

  result.L = build_gain(sys, tmpl, best_g1, best_g2);
  result.spectral_radius = best_radius;
  result.params_used = {best_g1, best_g2};
  result.stable = best_radius < 1.0;
  return result;
}

}  // namespace wavesource
