#include "fractalqw/walker.hpp"

#include "fractalqw/errors.hpp"

#include <cmath>
#include <string>

namespace fqw {

namespace {

// Exact zeros at multiples of pi/2, so those angles give permutation or diagonal coins.
double snapped(double v) noexcept { return std::abs(v) < 1e-15 ? 0.0 : v; }

}  // namespace

CoinMatrix coin_matrix(CoinKind kind, const CoinParams& params) noexcept {
    if (kind == CoinKind::Hadamard) {
        const double c = snapped(std::cos(params.theta_h));
        const double s = snapped(std::sin(params.theta_h));
        return {{c, 0.0}, {s, 0.0}, {s, 0.0}, {-c, 0.0}};
    }
    const double c = snapped(std::cos(params.theta_f));
    const double s = snapped(std::sin(params.theta_f));
    return {{c, 0.0}, {0.0, s}, {0.0, s}, {c, 0.0}};
}

std::string_view to_string(WalkMode mode) noexcept {
    switch (mode) {
        case WalkMode::Fractal: return "fractal";
        case WalkMode::UniformHadamard: return "uniform-hadamard";
        case WalkMode::UniformFourier: return "uniform-fourier";
    }
    return "fractal";
}

std::optional<WalkMode> parse_walk_mode(std::string_view text) noexcept {
    if (text == "fractal") return WalkMode::Fractal;
    if (text == "uniform-hadamard" || text == "hadamard") return WalkMode::UniformHadamard;
    if (text == "uniform-fourier" || text == "fourier") return WalkMode::UniformFourier;
    return std::nullopt;
}

WalkerState::WalkerState(std::int64_t x0, std::int64_t x_min, std::int64_t x_max, std::int64_t t)
    : t_(t), x0_(x0), x_min_(x_min) {
    if (x_max < x_min) throw UsageError("WalkerState: empty window");
    const auto n = static_cast<std::size_t>(x_max - x_min + 1);
    up_.assign(n, cplx{});
    down_.assign(n, cplx{});
}

std::size_t WalkerState::checked_index(std::int64_t x) const {
    if (!in_window(x)) {
        throw UsageError("WalkerState: site " + std::to_string(x) + " outside window [" +
                         std::to_string(x_min_) + ", " + std::to_string(x_max()) + "]");
    }
    return index(x);
}

double WalkerState::norm() const noexcept {
    double total = 0.0;
    for (std::size_t i = 0; i < up_.size(); ++i) total += std::norm(up_[i]) + std::norm(down_[i]);
    return total;
}

WalkerState initial_state(double gamma, double phi, std::int64_t x0, std::int64_t half_width) {
    if (half_width < 0) throw UsageError("initial_state: negative half width");
    WalkerState state(x0, x0 - half_width, x0 + half_width);
    state.up_at(x0) = cplx{std::cos(gamma / 2), 0.0};
    state.down_at(x0) = std::polar(std::sin(gamma / 2), phi);
    return state;
}

namespace detail {

void step_into(const WalkerState& in, WalkerState& out, const FractalRow* row, const CoinParams& params,
               WalkMode mode) {
    const std::int64_t t = in.step();
    const std::int64_t x0 = in.origin();
    if (mode == WalkMode::Fractal && (row == nullptr || row->step() != t)) {
        throw UsageError("step: fractal mode needs the carpet row for step " + std::to_string(t));
    }
    if (x0 - t - 1 < in.x_min() || x0 + t + 1 > in.x_max()) {
        throw UsageError("step: window too small for the light cone at t = " + std::to_string(t + 1));
    }

    const auto up = in.up_amplitudes();
    const auto down = in.down_amplitudes();
    auto up_out = out.up_amplitudes();
    auto down_out = out.down_amplitudes();

    // Sources: parity-t sites of the cone. U moves to s+1, D to s-1.
    const auto first = static_cast<std::size_t>(x0 - t - in.x_min());
    const auto last = static_cast<std::size_t>(x0 + t - in.x_min());

    // Both coin families have real c and real or imaginary s; spelling out the
    // real arithmetic halves the multiplications of a general 2x2 complex product.
    const double ch = snapped(std::cos(params.theta_h));
    const double sh = snapped(std::sin(params.theta_h));
    const double cf = snapped(std::cos(params.theta_f));
    const double sf = snapped(std::sin(params.theta_f));
    auto hadamard = [&](std::size_t i) {
        const cplx u = up[i];
        const cplx d = down[i];
        up_out[i + 1] = {ch * u.real() + sh * d.real(), ch * u.imag() + sh * d.imag()};
        down_out[i - 1] = {sh * u.real() - ch * d.real(), sh * u.imag() - ch * d.imag()};
    };
    auto fourier = [&](std::size_t i) {
        const cplx u = up[i];
        const cplx d = down[i];
        up_out[i + 1] = {cf * u.real() - sf * d.imag(), cf * u.imag() + sf * d.real()};
        down_out[i - 1] = {cf * d.real() - sf * u.imag(), cf * d.imag() + sf * u.real()};
    };

    switch (mode) {
        case WalkMode::Fractal: {
            const auto bits = row->bits();  // bits[k] is b_t(k - t), i.e. site x0 - t + k
            for (std::size_t i = first, k = 0; i <= last; i += 2, k += 2) {
                if (bits[k]) {
                    hadamard(i);
                } else {
                    fourier(i);
                }
            }
            break;
        }
        case WalkMode::UniformHadamard:
            for (std::size_t i = first; i <= last; i += 2) hadamard(i);
            break;
        case WalkMode::UniformFourier:
            for (std::size_t i = first; i <= last; i += 2) fourier(i);
            break;
    }
    // The two edge targets not covered by the loop are outside the previous cone.
    up_out[first - 1] = cplx{};
    down_out[last + 1] = cplx{};
    out.set_step(t + 1);
}

}  // namespace detail

WalkerState step(const WalkerState& state, const FractalRow* row, const CoinParams& params, WalkMode mode) {
    const std::int64_t t = state.step();
    const std::int64_t x0 = state.origin();
    const std::int64_t lo = std::min(state.x_min(), x0 - t - 1);
    const std::int64_t hi = std::max(state.x_max(), x0 + t + 1);

    const WalkerState* source = &state;
    WalkerState widened(x0, lo, hi, t);
    if (lo != state.x_min() || hi != state.x_max()) {
        for (std::int64_t x = state.x_min(); x <= state.x_max(); ++x) {
            widened.up_at(x) = state.up(x);
            widened.down_at(x) = state.down(x);
        }
        source = &widened;
    }

    WalkerState next(x0, lo, hi, t);
    detail::step_into(*source, next, row, params, mode);
    return next;
}

}  // namespace fqw
