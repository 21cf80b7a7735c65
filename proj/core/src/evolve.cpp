#include "fractalqw/evolve.hpp"

#include "fractalqw/errors.hpp"
#include "fractalqw/observables.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#if defined(__SSE__) || defined(_M_X64)
#include <xmmintrin.h>
#define FRACTALQW_HAS_MXCSR 1
#endif

namespace fqw {

SampleSchedule SampleSchedule::every(std::int64_t k) {
    if (k < 1) throw UsageError("SampleSchedule::every: stride must be >= 1");
    SampleSchedule s;
    s.stride_ = k;
    return s;
}

SampleSchedule SampleSchedule::at(std::vector<std::int64_t> times) {
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    SampleSchedule s;
    s.times_ = std::move(times);
    return s;
}

SampleSchedule SampleSchedule::log_spaced(std::int64_t lo, std::int64_t hi, std::size_t n) {
    if (lo < 1 || hi < lo) throw UsageError("SampleSchedule::log_spaced: need 1 <= lo <= hi");
    if (n < 2 || lo == hi) return at({lo, hi});
    std::vector<std::int64_t> times;
    times.reserve(n);
    const double a = std::log(static_cast<double>(lo));
    const double b = std::log(static_cast<double>(hi));
    for (std::size_t i = 0; i < n; ++i) {
        const double u = static_cast<double>(i) / static_cast<double>(n - 1);
        times.push_back(std::llround(std::exp(a + (b - a) * u)));
    }
    times.front() = lo;
    times.back() = hi;
    return at(std::move(times));
}

std::vector<std::int64_t> SampleSchedule::resolve(std::int64_t t_max) const {
    std::vector<std::int64_t> out;
    if (stride_ > 0) {
        for (std::int64_t t = 0; t <= t_max; t += stride_) out.push_back(t);
        if (out.back() != t_max) out.push_back(t_max);
        return out;
    }
    for (auto t : times_) {
        if (t >= 0 && t <= t_max) out.push_back(t);
    }
    return out;
}

namespace {

// Cursor over a resolved schedule; steps arrive in increasing order.
struct ScheduleCursor {
    std::vector<std::int64_t> times;
    std::size_t next = 0;

    bool fires(std::int64_t t) {
        if (next < times.size() && times[next] == t) {
            ++next;
            return true;
        }
        return false;
    }
};

// Amplitudes near the cone edge decay like cos(theta)^t and sink into the
// subnormal range, where arithmetic is an order of magnitude slower. Flushing
// them to zero only touches values below 2.2e-308.
class FlushDenormals {
  public:
#ifdef FRACTALQW_HAS_MXCSR
    FlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040); }  // FTZ | DAZ
    ~FlushDenormals() { _mm_setcsr(saved_); }

  private:
    unsigned saved_;
#endif
};

void check_edges(const WalkerState& state) {
    const auto up = state.up_amplitudes();
    const auto down = state.down_amplitudes();
    const std::size_t last = up.size() - 1;
    if (up[0] != cplx{} || down[0] != cplx{} || up[last] != cplx{} || down[last] != cplx{}) {
        throw InvariantViolation("evolve: amplitude reached the lattice edge at t = " +
                                 std::to_string(state.step()));
    }
}

}  // namespace

std::vector<ObservableSeries> evolve(const EvolveConfig& config, std::span<const Observer> observers,
                                     std::span<const SnapshotHook> snapshots) {
    if (config.t_max < 1) throw UsageError("evolve: t_max must be >= 1");
    if (config.t_max > config.t_max_cap) {
        throw UsageError("evolve: t_max = " + std::to_string(config.t_max) + " exceeds the window cap of " +
                         std::to_string(config.t_max_cap) + " (needs " +
                         std::to_string((2 * config.t_max + 3) * 2 * 16 / (1 << 20)) + " MiB of amplitudes)");
    }

    std::vector<ObservableSeries> series(observers.size());
    std::vector<ScheduleCursor> observer_cursors;
    std::vector<ScheduleCursor> snapshot_cursors;
    for (std::size_t i = 0; i < observers.size(); ++i) {
        series[i].name = observers[i].name;
        observer_cursors.push_back({observers[i].schedule.resolve(config.t_max)});
        series[i].t.reserve(observer_cursors.back().times.size());
        series[i].values.reserve(observer_cursors.back().times.size());
    }
    for (const auto& hook : snapshots) snapshot_cursors.push_back({hook.schedule.resolve(config.t_max)});

    const std::int64_t half = config.t_max + 1;
    WalkerState current = initial_state(config.gamma, config.phi, config.x0, half);
    WalkerState previous(config.x0, current.x_min(), current.x_max());

    const FlushDenormals flush_guard;
    const bool fractal = config.mode == WalkMode::Fractal;
    FractalRow row;           // carpet row for current.step()
    FractalRow previous_row;  // carpet row for current.step() - 1
    bool has_previous = false;

    auto notify = [&](std::int64_t t) {
        const StepContext ctx{t, current, has_previous ? &previous : nullptr,
                              (has_previous && fractal) ? &previous_row : nullptr, config};
        for (std::size_t i = 0; i < observers.size(); ++i) {
            if (observer_cursors[i].fires(t)) {
                series[i].t.push_back(t);
                series[i].values.push_back(observers[i].measure(ctx));
            }
        }
        for (std::size_t i = 0; i < snapshots.size(); ++i) {
            if (snapshot_cursors[i].fires(t)) snapshots[i].visit(ctx);
        }
    };

    notify(0);
    for (std::int64_t t = 0; t < config.t_max; ++t) {
        // `previous` holds state t-1 (or zeros), which satisfies step_into's precondition.
        detail::step_into(current, previous, fractal ? &row : nullptr, config.coins, config.mode);
        std::swap(current, previous);
        has_previous = true;
        if (fractal) {
            row.advance_into(previous_row);
            std::swap(row, previous_row);
        }
        notify(t + 1);
    }
    check_edges(current);
    return series;
}

Observer norm_observer(SampleSchedule schedule) {
    return {"norm", std::move(schedule), [](const StepContext& ctx) { return ctx.state.norm(); }};
}

Observer second_moment_observer(SampleSchedule schedule) {
    return {"m2", std::move(schedule), [](const StepContext& ctx) { return second_moment(ctx.state); }};
}

Observer entropy_observer(SampleSchedule schedule) {
    return {"entropy", std::move(schedule),
            [](const StepContext& ctx) { return entanglement_entropy(coin_density_matrix(ctx.state)); }};
}

Observer trace_distance_observer(SampleSchedule schedule) {
    return {"trace_distance", std::move(schedule), [](const StepContext& ctx) {
                if (ctx.previous == nullptr) return 0.0;
                return trace_distance(coin_density_matrix(ctx.state), coin_density_matrix(*ctx.previous));
            }};
}

}  // namespace fqw
