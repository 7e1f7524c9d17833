#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavesource {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a configuration value violates an invariant.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised on mismatched dimensions or invalid numeric arguments.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised on file read/write failures.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Physical constants of the wave equation: c², domain length, horizon.
struct PhysicalParams {
  double c_squared{0.9};
  double length_l{2.0};
  double t_final{100.0};

  void validate() const {
    if (!(c_squared > 0.0)) throw ConfigError("c_squared must be > 0");
    if (!(length_l > 0.0)) throw ConfigError("length_l must be > 0");
    if (!(t_final > 0.0)) throw ConfigError("t_final must be > 0");
  }
};

/// Space/time discretization. n_x counts interior nodes only; the two
/// boundary nodes carry the (zero) Dirichlet data and are not part of
/// the state.
struct Grid {
  double dx{0.0};
  double dt{0.0};
  int n_x{0};
  int n_t{0};

  void validate() const {
    if (n_x < 2) throw ConfigError("n_x must be >= 2");
    if (n_t < 2) throw ConfigError("n_t must be >= 2");
    if (!(dx > 0.0)) throw ConfigError("dx must be > 0");
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  }

  /// CFL indicator sqrt(c²)·Δt/Δx. Values >= 1 are flagged, not rejected.
  double cfl(const PhysicalParams& p) const {
    return std::sqrt(p.c_squared) * dt / dx;
  }

  /// Coordinate of interior node i (0-based), x = (i+1)·Δx.
  double node_coord(int i) const { return (i + 1) * dx; }
};

/// Stacked state ξ = [v; w]: field values and field time-derivative at
/// the interior nodes, v first.
struct FullState {
  Vector stacked;

  FullState() = default;
  explicit FullState(Vector s) : stacked(std::move(s)) {
    if (stacked.size() % 2 != 0)
      throw DimensionError("FullState vector length must be even");
  }
  FullState(const Vector& v, const Vector& w) {
    if (v.size() != w.size())
      throw DimensionError("FullState: v and w lengths differ");
    stacked.resize(2 * v.size());
    stacked << v, w;
  }

  static FullState zero(int n_x) { return FullState(Vector::Zero(2 * n_x)); }

  int n_x() const { return static_cast<int>(stacked.size()) / 2; }
  auto v() const { return stacked.head(n_x()); }
  auto w() const { return stacked.tail(n_x()); }
};

/// Spatial source samples at interior nodes; constant in time.
struct SourceField {
  Vector f;

  SourceField() = default;
  explicit SourceField(Vector values) : f(std::move(values)) {}
  static SourceField zero(int n_x) { return SourceField(Vector::Zero(n_x)); }
  int size() const { return static_cast<int>(f.size()); }
};

enum class SelectionKind { Full, Window };

/// Which interior nodes are sensed. Measurements always come from the
/// v block, never from w.
struct MeasurementSelection {
  SelectionKind kind{SelectionKind::Full};
  int start_index{0};
  int count_m{0};

  static MeasurementSelection full() {
    return {SelectionKind::Full, 0, 0};  // count resolved against a grid
  }
  static MeasurementSelection window(int start, int count) {
    return {SelectionKind::Window, start, count};
  }

  void validate(int n_x) const {
    if (kind == SelectionKind::Window) {
      if (count_m < 1 || count_m > n_x)
        throw DimensionError("window count_m out of range");
      if (start_index < 0 || start_index + count_m > n_x)
        throw DimensionError("window exceeds grid");
    }
  }

  int resolved_count(int n_x) const {
    return kind == SelectionKind::Full ? n_x : count_m;
  }

  /// 0-based interior node indices measured, in measurement-row order.
  std::vector<int> nodes(int n_x) const {
    validate(n_x);
    std::vector<int> out;
    const int m = resolved_count(n_x);
    const int s0 = kind == SelectionKind::Full ? 0 : start_index;
    out.reserve(m);
    for (int i = 0; i < m; ++i) out.push_back(s0 + i);
    return out;
  }
};

}  // namespace wavesource
