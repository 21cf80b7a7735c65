#pragma once

#include "fractalqw/fractal_pattern.hpp"

#include <algorithm>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace fqw {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg_to_rad(double deg) noexcept { return deg * (kPi / 180.0); }
constexpr double rad_to_deg(double rad) noexcept { return rad * (180.0 / kPi); }

/// Coin angles in radians.
struct CoinParams {
    double theta_h = kPi / 4;
    double theta_f = kPi / 4;

    static CoinParams from_degrees(double theta_h_deg, double theta_f_deg) noexcept {
        return {deg_to_rad(theta_h_deg), deg_to_rad(theta_f_deg)};
    }
};

/// Entries of a 2x2 coin in the {U, D} basis: uu maps U->U, du maps U->D, and so on.
struct CoinMatrix {
    cplx uu, ud, du, dd;
};

/// Hadamard kind: [[cos, sin], [sin, -cos]](theta_h).
/// Fourier kind:  [[cos, i sin], [i sin, cos]](theta_f).
CoinMatrix coin_matrix(CoinKind kind, const CoinParams& params) noexcept;

enum class WalkMode { Fractal, UniformHadamard, UniformFourier };

std::string_view to_string(WalkMode mode) noexcept;
std::optional<WalkMode> parse_walk_mode(std::string_view text) noexcept;

/// Coin applied at site x at step t. `row` is the carpet row for step t and is
/// only consulted in Fractal mode, where the carpet seed sits at the walker origin.
inline CoinKind coin_kind_for(WalkMode mode, const FractalRow* row, std::int64_t x, std::int64_t x0) noexcept {
    switch (mode) {
        case WalkMode::UniformHadamard: return CoinKind::Hadamard;
        case WalkMode::UniformFourier: return CoinKind::Fourier;
        case WalkMode::Fractal: break;
    }
    return coin_kind_at(*row, x - x0);
}

/// Spinor field (psi_U(x), psi_D(x)) over an inclusive lattice window.
/// Amplitudes outside the window read as zero.
class WalkerState {
  public:
    WalkerState(std::int64_t x0, std::int64_t x_min, std::int64_t x_max, std::int64_t t = 0);

    std::int64_t step() const noexcept { return t_; }
    std::int64_t origin() const noexcept { return x0_; }
    std::int64_t x_min() const noexcept { return x_min_; }
    std::int64_t x_max() const noexcept { return x_min_ + static_cast<std::int64_t>(up_.size()) - 1; }
    std::size_t width() const noexcept { return up_.size(); }

    bool in_window(std::int64_t x) const noexcept { return x >= x_min_ && x <= x_max(); }

    cplx up(std::int64_t x) const noexcept { return in_window(x) ? up_[index(x)] : cplx{}; }
    cplx down(std::int64_t x) const noexcept { return in_window(x) ? down_[index(x)] : cplx{}; }

    /// Writable access; x must lie in the window.
    cplx& up_at(std::int64_t x) { return up_[checked_index(x)]; }
    cplx& down_at(std::int64_t x) { return down_[checked_index(x)]; }

    std::span<const cplx> up_amplitudes() const noexcept { return up_; }
    std::span<const cplx> down_amplitudes() const noexcept { return down_; }
    std::span<cplx> up_amplitudes() noexcept { return up_; }
    std::span<cplx> down_amplitudes() noexcept { return down_; }

    /// Sites [x0 - t, x0 + t] clipped to the window.
    std::int64_t cone_min() const noexcept { return std::max(x_min_, x0_ - t_); }
    std::int64_t cone_max() const noexcept { return std::min(x_max(), x0_ + t_); }

    double norm() const noexcept;

    void set_step(std::int64_t t) noexcept { t_ = t; }

  private:
    std::size_t index(std::int64_t x) const noexcept { return static_cast<std::size_t>(x - x_min_); }
    std::size_t checked_index(std::int64_t x) const;

    std::int64_t t_;
    std::int64_t x0_;
    std::int64_t x_min_;
    std::vector<cplx> up_;
    std::vector<cplx> down_;
};

/// Walker localized at x0 with coin state cos(gamma/2)|U> + e^{i phi} sin(gamma/2)|D>.
/// `half_width` reserves [x0 - half_width, x0 + half_width].
WalkerState initial_state(double gamma, double phi, std::int64_t x0, std::int64_t half_width = 0);

/// One coin-then-shift step. Returns the state at t+1, widening the window
/// when the cone would leave it. In Fractal mode `row` must be the carpet row
/// for state.step(); passing nullptr, or a row for another step, throws UsageError.
WalkerState step(const WalkerState& state, const FractalRow* row, const CoinParams& params, WalkMode mode);

namespace detail {

/// Low-level stepping kernel used by step() and the evolution engine.
///
/// Writes state t+1 into `out`, which must share the window of `in` and hold
/// zeros at every site of the parity of t inside the new cone (a zeroed buffer,
/// or the state at t-1, both qualify). The cone of t+1 must fit in the window.
void step_into(const WalkerState& in, WalkerState& out, const FractalRow* row, const CoinParams& params,
               WalkMode mode);

}  // namespace detail

}  // namespace fqw
