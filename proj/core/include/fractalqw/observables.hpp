#pragma once

#include "fractalqw/fractal_pattern.hpp"
#include "fractalqw/walker.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace fqw {

/// P_t(x) = |psi_U(x)|^2 + |psi_D(x)|^2 over the state's window.
struct PositionDistribution {
    std::int64_t t = 0;
    std::int64_t origin = 0;
    std::int64_t x_min = 0;
    std::vector<double> values;
    double max_value = 0.0;

    double at(std::int64_t x) const noexcept {
        if (x < x_min || x >= x_min + static_cast<std::int64_t>(values.size())) return 0.0;
        return values[static_cast<std::size_t>(x - x_min)];
    }
    double total() const noexcept;
};

PositionDistribution position_distribution(const WalkerState& state);

/// sum_x (x - x0)^2 P(x), x0 being the walker origin.
double second_moment(const PositionDistribution& p) noexcept;
/// Same value computed straight from the amplitudes, without a temporary.
double second_moment(const WalkerState& state) noexcept;

/// 2x2 coin density matrix, entries m[row][col] in the {U, D} basis.
class DensityMatrix2 {
  public:
    DensityMatrix2() = default;
    DensityMatrix2(cplx uu, cplx ud, cplx du, cplx dd) : m_{{{uu, ud}, {du, dd}}} {}

    const cplx& operator()(int r, int c) const noexcept { return m_[r][c]; }
    cplx& operator()(int r, int c) noexcept { return m_[r][c]; }

    cplx trace() const noexcept { return m_[0][0] + m_[1][1]; }
    cplx determinant() const noexcept { return m_[0][0] * m_[1][1] - m_[0][1] * m_[1][0]; }
    bool is_hermitian(double tol) const noexcept;

    /// Eigenvalues of the Hermitian part, ascending.
    std::array<double, 2> eigenvalues() const noexcept;

    /// Throws InvariantViolation unless Hermitian, unit-trace and PSD within tol.
    void validate(double tol = 1e-10) const;

  private:
    std::array<std::array<cplx, 2>, 2> m_{};
};

/// Partial trace over position: rho_c = sum_x psi(x) psi(x)^dagger.
DensityMatrix2 coin_density_matrix(const WalkerState& state) noexcept;

/// Base-2 von Neumann entropy in [0, 1]. Throws InvariantViolation when an
/// eigenvalue falls outside [-1e-10, 1 + 1e-10].
double entanglement_entropy(const DensityMatrix2& rho);

/// Half the trace norm of rho - sigma, via the closed-form 2x2 spectrum.
double trace_distance(const DensityMatrix2& rho, const DensityMatrix2& sigma) noexcept;

/// mu(x, t) over [x_min, x_min + size).
struct InterferenceField {
    std::int64_t t = 0;
    std::int64_t x_min = 0;
    std::vector<double> values;

    double at(std::int64_t x) const noexcept {
        if (x < x_min || x >= x_min + static_cast<std::int64_t>(values.size())) return 0.0;
        return values[static_cast<std::size_t>(x - x_min)];
    }
};

/// Two same-site probability branches at step t: P = common +- |f + f*|.
struct InterferenceBranches {
    double common = 0.0;  // the four |R c|^2 intensity terms
    cplx f{};             // cross term f(x, t)

    double cross() const noexcept { return std::abs(2.0 * f.real()); }
    double p_max() const noexcept { return common + cross(); }
    double p_min() const noexcept { return common - cross(); }
    /// mu = P_max - P_min = |4 Re f|.
    double degree() const noexcept { return 2.0 * cross(); }
};

/// Branches at site x of step prev.step() + 1, built from the state and coins of the previous step.
InterferenceBranches interference_branches(const WalkerState& prev, const FractalRow* prev_row,
                                           const CoinParams& params, WalkMode mode, std::int64_t x);

/// mu(x, t) at t = prev.step() + 1 over the cone of t. In Fractal mode prev_row
/// must be the row of prev.step(); a mismatch throws UsageError.
InterferenceField interference_degree(const WalkerState& prev, const FractalRow* prev_row, const CoinParams& params,
                                      WalkMode mode = WalkMode::Fractal);

/// The t = 0 convention: 1 at the origin, 0 elsewhere.
InterferenceField initial_interference(std::int64_t x0);

/// (P_max - P_min) / (P_max + P_min); nullopt when there is no flux at the site.
std::optional<double> visibility(double p_max, double p_min) noexcept;

/// Sentinel written in place of an undefined visibility.
inline constexpr double kUndefinedVisibility = -1.0;

/// Closed-form mu(x, t) for t <= 5 with the Fourier coin at identity
/// (theta_F = 0) and the balanced real start (gamma = pi/2, phi = 0).
/// Throws UsageError for t outside [0, 5].
InterferenceField analytic_interference_oracle(double theta_h, std::int64_t t);

}  // namespace fqw
