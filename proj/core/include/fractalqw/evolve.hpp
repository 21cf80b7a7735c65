#pragma once

#include "fractalqw/fractal_pattern.hpp"
#include "fractalqw/walker.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fqw {

struct EvolveConfig {
    WalkMode mode = WalkMode::Fractal;
    CoinParams coins{};
    double gamma = kPi / 2;  // initial coin state, Bloch polar angle
    double phi = kPi / 2;    // initial coin state, Bloch phase
    std::int64_t x0 = 0;
    std::int64_t t_max = 100;
    /// Largest t_max the engine accepts; the lattice holds 2 t_max + 3 sites.
    std::int64_t t_max_cap = 5'000'000;
};

/// Which steps an observer or snapshot hook fires at. Always sorted, unique.
class SampleSchedule {
  public:
    /// t = 0, k, 2k, ... and always t_max.
    static SampleSchedule every(std::int64_t k);
    static SampleSchedule at(std::vector<std::int64_t> times);
    /// n log-spaced integer times in [lo, hi] (duplicates after rounding removed).
    static SampleSchedule log_spaced(std::int64_t lo, std::int64_t hi, std::size_t n);

    /// Concrete sorted times for a run of length t_max.
    std::vector<std::int64_t> resolve(std::int64_t t_max) const;

  private:
    std::int64_t stride_ = 0;
    std::vector<std::int64_t> times_;
};

/// What a hook sees at step t. `previous` and `previous_row` describe the step
/// t-1 -> t and are null at t = 0; `previous_row` is also null outside Fractal mode.
struct StepContext {
    std::int64_t t;
    const WalkerState& state;
    const WalkerState* previous;
    const FractalRow* previous_row;
    const EvolveConfig& config;
};

struct Observer {
    std::string name;
    SampleSchedule schedule;
    std::function<double(const StepContext&)> measure;
};

struct SnapshotHook {
    SampleSchedule schedule;
    std::function<void(const StepContext&)> visit;
};

struct ObservableSeries {
    std::string name;
    std::vector<std::int64_t> t;
    std::vector<double> values;
};

/// Runs t_max steps from initial_state(gamma, phi, x0) on a fixed window
/// [x0 - t_max - 1, x0 + t_max + 1]. Returns one series per observer, in order.
///
/// Throws UsageError for t_max < 1 or t_max above t_max_cap, and
/// InvariantViolation if probability ever reaches the window edge.
std::vector<ObservableSeries> evolve(const EvolveConfig& config, std::span<const Observer> observers,
                                     std::span<const SnapshotHook> snapshots = {});

// Stock observers.
Observer norm_observer(SampleSchedule schedule);
Observer second_moment_observer(SampleSchedule schedule);
Observer entropy_observer(SampleSchedule schedule);
/// D(rho_c(t), rho_c(t-1)); reports 0 at t = 0.
Observer trace_distance_observer(SampleSchedule schedule);

}  // namespace fqw
