#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "wavesource/core_model.hpp"

namespace wavesource {

/// Initial field and field-velocity samples at the interior nodes.
struct InitialConditions {
  Vector r1;
  Vector r2;

  static InitialConditions zero(int n_x) {
    return {Vector::Zero(n_x), Vector::Zero(n_x)};
  }
};

/// Additive zero-mean Gaussian noise, i.i.d. across components and steps.
struct NoiseSpec {
  double sigma_state{0.0};
  double sigma_meas{0.0};
  std::uint64_t rng_seed{0};

  void validate() const {
    if (sigma_state < 0.0 || sigma_meas < 0.0)
      throw ConfigError("noise standard deviations must be >= 0");
  }
};

/// Seedable Gaussian stream: mt19937_64 uniforms through the Box-Muller
/// transform. The algorithm is fixed here so identical seeds reproduce
/// identical streams on every platform, unlike std::normal_distribution.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : engine_(seed) {}

  double next(double sigma) {
    if (have_spare_) {
      have_spare_ = false;
      return sigma * spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return sigma * r * std::cos(theta);
  }

  void fill(Eigen::Ref<Vector> out, double sigma) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = next(sigma);
  }

 private:
  double uniform01() {
    // 53-bit mantissa uniform in [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 engine_;
  double spare_{0.0};
  bool have_spare_{false};
};

/// One synthetic experiment: the full state trajectory, the recorded
/// measurement stream and the source that generated them.
struct SyntheticRun {
  std::vector<Vector> states;        // length n_t, each 2n_x
  std::vector<Vector> measurements;  // length n_t, each count_m
  SourceField truth_source;
  std::optional<NoiseSpec> noise;
};

/// Steps the plant n_t times from [r1; r2]. With a NoiseSpec, process noise
/// enters the recursion (the noisy state feeds the next step) and
/// measurement noise corrupts the recorded stream only.
inline SyntheticRun simulate_forward(const DiscreteWaveSystem& sys,
                                     const InitialConditions& ic, const SourceField& f,
                                     const std::optional<NoiseSpec>& noise = {}) {
  if (ic.r1.size() != sys.n_x() || ic.r2.size() != sys.n_x())
    throw DimensionError("simulate_forward: initial condition length mismatch");
  if (f.size() != sys.n_x())
    throw DimensionError("simulate_forward: source length mismatch");
  if (sys.grid().n_t < 1) throw DimensionError("simulate_forward: nonpositive n_t");
  if (noise) noise->validate();

  const int n_t = sys.grid().n_t;
  SyntheticRun run;
  run.truth_source = f;
  run.noise = noise;
  run.states.reserve(n_t);
  run.measurements.reserve(n_t);

  std::optional<GaussianSampler> sampler;
  if (noise) sampler.emplace(noise->rng_seed);
  Vector scratch_state(sys.state_dim());
  Vector scratch_meas(sys.count_m());

  Vector xi(sys.state_dim());
  xi << ic.r1, ic.r2;
  for (int j = 0; j < n_t; ++j) {
    run.states.push_back(xi);
    Vector z = sys.apply_H(xi);
    if (sampler && noise->sigma_meas > 0.0) {
      sampler->fill(scratch_meas, noise->sigma_meas);
      z += scratch_meas;
    }
    run.measurements.push_back(std::move(z));
    if (j + 1 < n_t) {
      xi = sys.G() * xi + sys.B() * f.f + sys.b();
      if (sampler && noise->sigma_state > 0.0) {
        sampler->fill(scratch_state, noise->sigma_state);
        xi += scratch_state;
      }
    }
  }
  return run;
}

/// Closed set of named source profiles plus tabulated values.
struct SourceProfile {
  enum class Kind { Zero, Sine, GaussianBump, PiecewiseConstant, Tabulated };

  Kind kind{Kind::Zero};
  double amplitude{0.0};
  double frequency{0.0};          // Sine: f(x) = amplitude·sin(frequency·x)
  double center{0.0};             // GaussianBump
  double width{1.0};              // GaussianBump
  std::vector<double> breaks;     // PiecewiseConstant: interval right edges
  std::vector<double> values;     // PiecewiseConstant / Tabulated
  // Tabulated values are indexed by interior node, length n_x.

  static SourceProfile zero() { return {}; }
  static SourceProfile sine(double amplitude, double frequency) {
    SourceProfile p;
    p.kind = Kind::Sine;
    p.amplitude = amplitude;
    p.frequency = frequency;
    return p;
  }
  static SourceProfile gaussian_bump(double amplitude, double center, double width) {
    SourceProfile p;
    p.kind = Kind::GaussianBump;
    p.amplitude = amplitude;
    p.center = center;
    p.width = width;
    return p;
  }
};

/// Samples a profile at the interior node coordinates x_i = i·Δx.
inline SourceField sample_source(const SourceProfile& profile, const Grid& grid) {
  Vector f(grid.n_x);
  for (int i = 0; i < grid.n_x; ++i) {
    const double x = grid.node_coord(i);
    switch (profile.kind) {
      case SourceProfile::Kind::Zero:
        f[i] = 0.0;
        break;
      case SourceProfile::Kind::Sine:
        f[i] = profile.amplitude * std::sin(profile.frequency * x);
        break;
      case SourceProfile::Kind::GaussianBump: {
        const double u = (x - profile.center) / profile.width;
        f[i] = profile.amplitude * std::exp(-0.5 * u * u);
        break;
      }
      case SourceProfile::Kind::PiecewiseConstant: {
        if (profile.values.size() != profile.breaks.size() + 1)
          throw ConfigError("piecewise profile needs one more value than breaks");
        std::size_t seg = 0;
        while (seg < profile.breaks.size() && x > profile.breaks[seg]) ++seg;
        f[i] = profile.values[seg];
        break;
      }
      case SourceProfile::Kind::Tabulated:
        if (static_cast<int>(profile.values.size()) != grid.n_x)
          throw DimensionError("tabulated source length must equal n_x");
        f[i] = profile.values[static_cast<std::size_t>(i)];
        break;
    }
  }
  return SourceField(std::move(f));
}

}  // namespace wavesource
