#pragma once

#include <Eigen/Sparse>
#include <optional>
#include <utility>

#include "wavesource/types.hpp"

namespace wavesource {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Tridiagonal matrix E of the discrete plant: diagonal −2s, off-diagonals
/// +s, with s = c²Δt/Δx². Interior Dirichlet Laplacian scaled by Δt.
inline SparseMatrix build_laplacian(const Grid& grid, const PhysicalParams& params) {
  if (grid.n_x < 2) throw DimensionError("build_laplacian: n_x must be >= 2");
  const double s = params.c_squared * grid.dt / (grid.dx * grid.dx);
  SparseMatrix e(grid.n_x, grid.n_x);
  e.reserve(Eigen::VectorXi::Constant(grid.n_x, 3));
  for (int i = 0; i < grid.n_x; ++i) {
    if (i > 0) e.insert(i, i - 1) = s;
    e.insert(i, i) = -2.0 * s;
    if (i < grid.n_x - 1) e.insert(i, i + 1) = s;
  }
  e.makeCompressed();
  return e;
}

/// Dirichlet boundary traces at the two ends of the domain; both zero for
/// the homogeneous problem.
struct BoundaryTraces {
  double v_left{0.0};
  double v_right{0.0};
};

/// The assembled discrete plant: ξ^{j+1} = G ξ^j + B f + b, z^j = H ξ^j.
/// G and B are kept sparse; H is kept as the list of measured node indices.
class DiscreteWaveSystem {
 public:
  DiscreteWaveSystem(Grid grid, PhysicalParams params, MeasurementSelection sel,
                     SparseMatrix g, SparseMatrix b_input, Vector boundary)
      : grid_(grid),
        params_(params),
        selection_(sel),
        measured_(sel.nodes(grid.n_x)),
        g_(std::move(g)),
        b_input_(std::move(b_input)),
        boundary_(std::move(boundary)) {}

  const Grid& grid() const { return grid_; }
  const PhysicalParams& params() const { return params_; }
  const MeasurementSelection& selection() const { return selection_; }
  const std::vector<int>& measured_nodes() const { return measured_; }

  int n_x() const { return grid_.n_x; }
  int state_dim() const { return 2 * grid_.n_x; }
  int count_m() const { return static_cast<int>(measured_.size()); }

  const SparseMatrix& G() const { return g_; }
  const SparseMatrix& B() const { return b_input_; }
  const Vector& b() const { return boundary_; }

  /// Whether sqrt(c²)·Δt/Δx >= 1 (flag only; assembly never fails on it).
  bool cfl_exceeded() const { return grid_.cfl(params_) >= 1.0; }

  /// H materialized as a sparse count_m × 2n_x selection matrix.
  SparseMatrix Hmat() const {
    SparseMatrix h(count_m(), state_dim());
    h.reserve(Eigen::VectorXi::Constant(count_m(), 1));
    for (int r = 0; r < count_m(); ++r) h.insert(r, measured_[r]) = 1.0;
    h.makeCompressed();
    return h;
  }

  /// H·x: gather the measured entries of the v block.
  Vector apply_H(const Vector& x) const {
    if (x.size() != state_dim())
      throw DimensionError("apply_H: state dimension mismatch");
    Vector z(count_m());
    for (int r = 0; r < count_m(); ++r) z[r] = x[measured_[r]];
    return z;
  }

  /// Hᵀ·z: scatter a measurement-sized vector into the v rows.
  Vector apply_Ht(const Vector& z) const {
    if (z.size() != count_m())
      throw DimensionError("apply_Ht: measurement dimension mismatch");
    Vector x = Vector::Zero(state_dim());
    for (int r = 0; r < count_m(); ++r) x[measured_[r]] = z[r];
    return x;
  }

  /// Rows of a state-sized matrix at the measured v indices (H·M).
  Matrix gather_rows(const Matrix& m) const {
    if (m.rows() != state_dim())
      throw DimensionError("gather_rows: row dimension mismatch");
    Matrix out(count_m(), m.cols());
    for (int r = 0; r < count_m(); ++r) out.row(r) = m.row(measured_[r]);
    return out;
  }

 private:
  Grid grid_;
  PhysicalParams params_;
  MeasurementSelection selection_;
  std::vector<int> measured_;
  SparseMatrix g_;
  SparseMatrix b_input_;
  Vector boundary_;
};

/// Assembles G = [ΔtE+I, ΔtI; E, I], B = [Δt²I; ΔtI], the boundary vector b
/// (zero for homogeneous traces) and the measurement selection.
inline DiscreteWaveSystem assemble_system(const Grid& grid, const PhysicalParams& params,
                                          const MeasurementSelection& sel,
                                          const BoundaryTraces& traces = {}) {
  grid.validate();
  params.validate();
  sel.validate(grid.n_x);

  const int n = grid.n_x;
  const double dt = grid.dt;
  const SparseMatrix e = build_laplacian(grid, params);

  SparseMatrix g(2 * n, 2 * n);
  {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(8 * n);
    for (int k = 0; k < e.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(e, k); it; ++it) {
        const int i = static_cast<int>(it.row());
        const int j = static_cast<int>(it.col());
        trip.emplace_back(i, j, dt * it.value());  // Δt·E block
        trip.emplace_back(n + i, j, it.value());   // E block
      }
    }
    for (int i = 0; i < n; ++i) {
      trip.emplace_back(i, i, 1.0);          // +I on Δt·E+I
      trip.emplace_back(i, n + i, dt);       // Δt·I
      trip.emplace_back(n + i, n + i, 1.0);  // I
    }
    g.setFromTriplets(trip.begin(), trip.end());
  }

  SparseMatrix b_input(2 * n, n);
  b_input.reserve(Eigen::VectorXi::Constant(n, 2));
  for (int i = 0; i < n; ++i) {
    b_input.insert(i, i) = dt * dt;
    b_input.insert(n + i, i) = dt;
  }
  b_input.makeCompressed();

  // Boundary vector: s·Δt·v at the boundary-adjacent v rows, s·v at the
  // matching w rows, zero elsewhere. Vanishes for homogeneous Dirichlet data.
  Vector boundary = Vector::Zero(2 * n);
  const double s = params.c_squared * dt / (grid.dx * grid.dx);
  boundary[0] = s * dt * traces.v_left;
  boundary[n - 1] = s * dt * traces.v_right;
  boundary[n] = s * traces.v_left;
  boundary[2 * n - 1] = s * traces.v_right;

  return DiscreteWaveSystem(grid, params, sel, std::move(g), std::move(b_input),
                            std::move(boundary));
}

/// One plant step: G·ξ + B·f + b.
inline FullState apply_step(const DiscreteWaveSystem& sys, const FullState& xi,
                            const SourceField& f) {
  if (xi.stacked.size() != sys.state_dim())
    throw DimensionError("apply_step: state dimension mismatch");
  if (f.size() != sys.n_x())
    throw DimensionError("apply_step: source dimension mismatch");
  return FullState(Vector(sys.G() * xi.stacked + sys.B() * f.f + sys.b()));
}

/// z = H·ξ, the selected entries of v.
inline Vector measure(const DiscreteWaveSystem& sys, const FullState& xi) {
  return sys.apply_H(xi.stacked);
}

/// Discrete energy ½‖w‖² + (c²/2)‖Dv‖² with D the scaled first-difference
/// operator including the zero boundary values.
inline double discrete_energy(const DiscreteWaveSystem& sys, const FullState& xi) {
  if (xi.stacked.size() != sys.state_dim())
    throw DimensionError("discrete_energy: state dimension mismatch");
  const int n = sys.n_x();
  const double dx = sys.grid().dx;
  const auto v = xi.v();
  double grad = v[0] * v[0];  // (v_1 - 0)²
  for (int i = 1; i < n; ++i) {
    const double d = v[i] - v[i - 1];
    grad += d * d;
  }
  grad += v[n - 1] * v[n - 1];  // (0 - v_n)²
  grad /= dx * dx;
  return 0.5 * xi.w().squaredNorm() + 0.5 * sys.params().c_squared * grad;
}

}  // namespace wavesource
