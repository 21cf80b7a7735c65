#include "fractalqw/observables.hpp"

#include "fractalqw/errors.hpp"

#include <cmath>
#include <string>

namespace fqw {

double PositionDistribution::total() const noexcept {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum;
}

PositionDistribution position_distribution(const WalkerState& state) {
    PositionDistribution p;
    p.t = state.step();
    p.origin = state.origin();
    p.x_min = state.x_min();
    const auto up = state.up_amplitudes();
    const auto down = state.down_amplitudes();
    p.values.resize(up.size());
    for (std::size_t i = 0; i < up.size(); ++i) {
        p.values[i] = std::norm(up[i]) + std::norm(down[i]);
        p.max_value = std::max(p.max_value, p.values[i]);
    }
    return p;
}

double second_moment(const PositionDistribution& p) noexcept {
    double m2 = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        const double dx = static_cast<double>(p.x_min + static_cast<std::int64_t>(i) - p.origin);
        m2 += dx * dx * p.values[i];
    }
    return m2;
}

double second_moment(const WalkerState& state) noexcept {
    const auto up = state.up_amplitudes();
    const auto down = state.down_amplitudes();
    double m2 = 0.0;
    for (std::int64_t x = state.cone_min(); x <= state.cone_max(); ++x) {
        const auto i = static_cast<std::size_t>(x - state.x_min());
        const double dx = static_cast<double>(x - state.origin());
        m2 += dx * dx * (std::norm(up[i]) + std::norm(down[i]));
    }
    return m2;
}

bool DensityMatrix2::is_hermitian(double tol) const noexcept {
    return std::abs(m_[0][0].imag()) <= tol && std::abs(m_[1][1].imag()) <= tol &&
           std::abs(m_[0][1] - std::conj(m_[1][0])) <= tol;
}

std::array<double, 2> DensityMatrix2::eigenvalues() const noexcept {
    const double a = m_[0][0].real();
    const double d = m_[1][1].real();
    const cplx b = 0.5 * (m_[0][1] + std::conj(m_[1][0]));
    const double mean = 0.5 * (a + d);
    const double radius = std::hypot(0.5 * (a - d), std::abs(b));
    return {mean - radius, mean + radius};
}

void DensityMatrix2::validate(double tol) const {
    if (!is_hermitian(tol)) throw InvariantViolation("density matrix is not Hermitian");
    if (std::abs(trace() - cplx{1.0, 0.0}) > tol) {
        throw InvariantViolation("density matrix trace " + std::to_string(trace().real()) + " != 1");
    }
    const auto ev = eigenvalues();
    if (ev[0] < -tol || ev[1] > 1.0 + tol) throw InvariantViolation("density matrix eigenvalues outside [0, 1]");
}

DensityMatrix2 coin_density_matrix(const WalkerState& state) noexcept {
    const auto up = state.up_amplitudes();
    const auto down = state.down_amplitudes();
    double uu = 0.0;
    double dd = 0.0;
    cplx ud{};
    for (std::int64_t x = state.cone_min(); x <= state.cone_max(); ++x) {
        const auto i = static_cast<std::size_t>(x - state.x_min());
        uu += std::norm(up[i]);
        dd += std::norm(down[i]);
        ud += up[i] * std::conj(down[i]);
    }
    return {uu, ud, std::conj(ud), dd};
}

double entanglement_entropy(const DensityMatrix2& rho) {
    constexpr double tol = 1e-10;
    double entropy = 0.0;
    for (double lambda : rho.eigenvalues()) {
        if (lambda < -tol || lambda > 1.0 + tol) {
            throw InvariantViolation("entanglement_entropy: eigenvalue " + std::to_string(lambda) +
                                     " outside [0, 1]");
        }
        if (lambda > 0.0 && lambda < 1.0) entropy -= lambda * std::log2(lambda);
    }
    return std::clamp(entropy, 0.0, 1.0);
}

double trace_distance(const DensityMatrix2& rho, const DensityMatrix2& sigma) noexcept {
    // Delta Hermitian with eigenvalues mean +- radius; D = (|l+| + |l-|) / 2.
    const double a = rho(0, 0).real() - sigma(0, 0).real();
    const double d = rho(1, 1).real() - sigma(1, 1).real();
    const cplx b = rho(0, 1) - sigma(0, 1);
    const double mean = 0.5 * (a + d);
    const double radius = std::hypot(0.5 * (a - d), std::abs(b));
    return 0.5 * (std::abs(mean + radius) + std::abs(mean - radius));
}

InterferenceBranches interference_branches(const WalkerState& prev, const FractalRow* prev_row,
                                           const CoinParams& params, WalkMode mode, std::int64_t x) {
    const std::int64_t x0 = prev.origin();
    const CoinMatrix left = coin_matrix(coin_kind_for(mode, prev_row, x - 1, x0), params);
    const CoinMatrix right = coin_matrix(coin_kind_for(mode, prev_row, x + 1, x0), params);
    const cplx ul = prev.up(x - 1);
    const cplx dl = prev.down(x - 1);
    const cplx ur = prev.up(x + 1);
    const cplx dr = prev.down(x + 1);

    InterferenceBranches b;
    b.common = std::norm(left.uu * ul) + std::norm(left.ud * dl) + std::norm(right.du * ur) + std::norm(right.dd * dr);
    b.f = left.uu * std::conj(left.ud) * ul * std::conj(dl) + right.du * std::conj(right.dd) * ur * std::conj(dr);
    return b;
}

InterferenceField interference_degree(const WalkerState& prev, const FractalRow* prev_row, const CoinParams& params,
                                      WalkMode mode) {
    const std::int64_t t = prev.step();
    if (mode == WalkMode::Fractal && (prev_row == nullptr || prev_row->step() != t)) {
        throw UsageError("interference_degree: carpet row must be for step " + std::to_string(t));
    }
    InterferenceField field;
    field.t = t + 1;
    field.x_min = prev.origin() - (t + 1);
    field.values.assign(static_cast<std::size_t>(2 * (t + 1) + 1), 0.0);
    for (std::int64_t x = field.x_min; x <= prev.origin() + t + 1; ++x) {
        field.values[static_cast<std::size_t>(x - field.x_min)] =
            interference_branches(prev, prev_row, params, mode, x).degree();
    }
    return field;
}

InterferenceField initial_interference(std::int64_t x0) {
    return {0, x0, {1.0}};
}

std::optional<double> visibility(double p_max, double p_min) noexcept {
    const double flux = p_max + p_min;
    if (!(flux > 0.0)) return std::nullopt;
    return (p_max - p_min) / flux;
}

InterferenceField analytic_interference_oracle(double theta_h, std::int64_t t) {
    if (t < 0 || t > 5) {
        throw UsageError("analytic_interference_oracle: closed forms exist for 0 <= t <= 5, got " + std::to_string(t));
    }
    InterferenceField field;
    field.t = t;
    field.x_min = -t;
    field.values.assign(static_cast<std::size_t>(2 * t + 1), 0.0);
    auto set = [&](std::int64_t x, double v) { field.values[static_cast<std::size_t>(x + t)] = std::abs(v); };

    const double s = std::sin(theta_h);
    const double c = std::cos(theta_h);
    switch (t) {
        case 0: set(0, 1.0); break;
        case 1:
            set(-1, 2 * s * c);
            set(1, 2 * s * c);
            break;
        case 4: {
            const double centre = 4 * c * c * s * s * s * std::cos(2 * theta_h);
            set(0, centre);
            set(-2, centre / 2);
            set(2, centre / 2);
            break;
        }
        default: break;  // t = 2, 3, 5 vanish everywhere
    }
    return field;
}

}  // namespace fqw
