#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "floeda/field_grid.hpp"
#include "floeda/rng.hpp"
#include "floeda/torus.hpp"

namespace floeda {

using Complex = std::complex<double>;

/// Parameters of one complex Ornstein-Uhlenbeck mode
///   du = ((-d + i phi) u + f) dt + sigma dW.
struct ModeParams {
  double damping = 0.5;     ///< d > 0
  double phase_speed = 0.0; ///< phi
  Complex forcing{0.0, 0.0};
  double noise = 0.05;      ///< sigma >= 0

  void validate() const;
};

struct Wavevector {
  int kx = 0;
  int ky = 0;
  double norm() const;
  bool operator==(const Wavevector&) const = default;
};

enum class Truncation { MaxNorm, Euclidean };

/// Truncated set of divergence-free Fourier modes on [0, 2pi)^2.
///
/// Every wavevector k is present together with -k. One member of each pair is
/// the representative (ky > 0, or ky == 0 and kx > 0); the partner's
/// coefficient is always the complex conjugate so reconstructed fields are real.
/// Mode m contributes c_m e_m exp(i k_m . x) with e_m = (i ky, -i kx) / |k|.
class ModeSet {
public:
  int k_max() const { return k_max_; }
  std::size_t size() const { return k_.size(); }
  std::size_t pair_count() const { return representatives_.size(); }

  const Wavevector& wavevector(std::size_t m) const { return k_[m]; }
  std::size_t partner(std::size_t m) const { return partner_[m]; }
  const std::array<Complex, 2>& eigenvector(std::size_t m) const { return eigenvectors_[m]; }
  const std::vector<std::size_t>& representatives() const { return representatives_; }
  bool is_representative(std::size_t m) const { return rep_slot_[m] >= 0; }

  /// Index of the mode with wavevector k, or size() if absent.
  std::size_t find(Wavevector k) const;

private:
  friend ModeSet build_mode_set(int k_max, Truncation truncation);

  int k_max_ = 0;
  std::vector<Wavevector> k_;
  std::vector<std::size_t> partner_;
  std::vector<std::array<Complex, 2>> eigenvectors_;
  std::vector<std::size_t> representatives_;
  std::vector<long> rep_slot_;
};

ModeSet build_mode_set(int k_max, Truncation truncation = Truncation::MaxNorm);

struct ModeState {
  std::vector<Complex> coeffs; ///< one per mode of the owning ModeSet
  double time = 0.0;
};

ModeState zero_state(const ModeSet& modes);

/// Overwrites every non-representative coefficient with the conjugate of its partner.
void enforce_conjugate_symmetry(const ModeSet& modes, ModeState& state);

/// max_k |c(-k) - conj(c(k))|
double conjugate_symmetry_defect(const ModeSet& modes, const ModeState& state);

/// Exact one-step OU transition for a fixed dt, precomputed once per mode.
struct OuPropagator {
  Complex decay;        ///< exp((-d + i phi) dt)
  Complex forced_shift; ///< f / (d - i phi) * (1 - decay)
  double noise_scale;   ///< sigma * sqrt((1 - exp(-2 d dt)) / (2 d))
};

OuPropagator make_propagator(const ModeParams& params, double dt);

std::vector<OuPropagator> make_propagators(std::span<const ModeParams> params, double dt);

/// Advances the representatives by the exact OU update with the supplied
/// standard complex normal draws (one per pair, in representative order) and
/// rewrites partners by conjugation. `propagators` is indexed by mode.
void advance_modes(const ModeSet& modes, std::span<const OuPropagator> propagators, double dt,
                   std::span<const Complex> noise, ModeState& state);

/// Value-returning form of advance_modes; `params` is indexed by mode.
ModeState step_modes(const ModeSet& modes, const ModeState& state,
                     std::span<const ModeParams> params, double dt,
                     std::span<const Complex> noise);

/// Draws one standard complex normal per conjugate pair.
void draw_mode_noise(Rng& rng, std::span<Complex> noise);

/// Samples every representative from its stationary law
/// N_C(f / (d - i phi), sigma^2 / (2 d)) and conjugates partners.
ModeState sample_stationary(const ModeSet& modes, std::span<const ModeParams> params, Rng& rng);

/// Reference reconstruction by full complex summation over all modes.
/// Throws NumericalError when the imaginary residual exceeds 1e-10 of the
/// field magnitude (state not conjugate-symmetric).
std::vector<Vec2> eval_velocity(const ModeSet& modes, const ModeState& state,
                                std::span<const Vec2> points);

/// Fast real-valued reconstruction at one point using conjugate pairs.
/// `coeffs` is indexed by mode; only representatives are read.
class PointEvaluator {
public:
  explicit PointEvaluator(const ModeSet& modes);
  Vec2 operator()(std::span<const Complex> coeffs, const Vec2& x) const;

private:
  struct Term {
    std::size_t mode;
    int kx;
    int ky;
    Vec2 direction; ///< -2 (ky, -kx) / |k|
  };
  int k_max_;
  std::vector<Term> terms_;
};

/// Samples the field on the n x n node grid with an inverse 2D FFT.
FieldGrid eval_velocity_grid(const ModeSet& modes, const ModeState& state, int n);

/// Same grid by direct summation at every node; cross-check for the FFT path.
FieldGrid eval_velocity_grid_direct(const ModeSet& modes, const ModeState& state, int n);

} // namespace floeda
