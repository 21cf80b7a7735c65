#pragma once

#include "fractalqw/evolve.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fqw {

struct FitWindow {
    std::int64_t lo = 1;
    std::int64_t hi = 1;
};

/// [t_max / 100, t_max], clamped so lo >= 1.
FitWindow default_fit_window(std::int64_t t_max) noexcept;

/// Growth fits report +slope (alpha of m2 ~ t^alpha); decay fits report
/// -slope (beta of D ~ t^-beta).
enum class FitSign { Growth, Decay };

struct PowerLawFit {
    double exponent = 0.0;
    double intercept = 0.0;  // of ln y = slope ln t + intercept
    double exponent_stderr = 0.0;
    double intercept_stderr = 0.0;
    FitWindow window{};
    std::vector<std::int64_t> sample_times;
};

/// Ordinary least squares of ln y on ln t over the samples whose t lies in
/// `window`. Throws FitError when fewer than `min_samples` fall inside, or
/// when any of them is <= 0 (callers drop zeros first, see drop_zeros).
PowerLawFit loglog_fit(std::span<const std::int64_t> t, std::span<const double> y, FitWindow window,
                       FitSign sign = FitSign::Growth, std::size_t min_samples = 10);

struct FilteredSeries {
    std::vector<std::int64_t> t;
    std::vector<double> y;
    std::size_t excluded = 0;
};

/// Keeps samples with y > zero_tol.
FilteredSeries drop_zeros(std::span<const std::int64_t> t, std::span<const double> y, double zero_tol);

struct FitOptions {
    std::optional<FitWindow> window;  // default_fit_window(t_max) when unset
    std::size_t samples = 50;         // log-spaced sample times inside the window
    double zero_tol = 1e-12;
    std::size_t min_samples = 10;
};

FitWindow resolve_window(const FitOptions& options, std::int64_t t_max);

/// Arithmetic mean of S_E over samples with t >= t0. Throws UsageError when
/// no sample qualifies.
double asymptotic_mean_entropy(std::span<const std::int64_t> t, std::span<const double> entropy, std::int64_t t0);

/// Runs job(i) for i in [0, n) on up to `workers` threads. Each index runs
/// exactly once; results land wherever the job writes them.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& job);

unsigned default_workers() noexcept;

// ---------------------------------------------------------------------------
// Experiments built on evolve().

struct SpreadResult {
    ObservableSeries m2;  // on the output schedule
    std::optional<PowerLawFit> fit;
    std::string fit_error;
    std::size_t zero_samples = 0;
    bool bounded = false;  // theta_h at an odd multiple of pi/2 in Fractal mode
};

/// m2 on `output_points` log-spaced times over [1, t_max] plus the fit samples,
/// then a growth fit.
SpreadResult spread_analysis(const EvolveConfig& config, const FitOptions& fit, std::size_t output_points = 200);

struct AlphaRow {
    double theta_deg = 0.0;
    double alpha = 0.0;
    double alpha_stderr = 0.0;
    double intercept = 0.0;
    bool bounded = false;
    std::string error;  // non-empty when the grid point failed
};

/// One Fractal-mode run per theta with theta_h = theta_f = theta; rows follow
/// the grid order regardless of `workers`. A failing point records its error
/// and the sweep continues.
std::vector<AlphaRow> alpha_diagram(std::span<const double> theta_grid_deg, std::int64_t t_max,
                                    const EvolveConfig& base, const FitOptions& fit, unsigned workers);

bool is_odd_multiple_of_right_angle(double theta_deg) noexcept;

struct TraceDistanceResult {
    ObservableSeries distance;  // every step, t = 0 .. t_max (0 at t = 0)
    std::optional<PowerLawFit> fit;  // decay exponent beta
    std::string fit_error;
    std::size_t zero_samples = 0;  // values <= zero_tol among t >= 1
};

TraceDistanceResult trace_distance_analysis(const EvolveConfig& config, const FitOptions& fit);

/// Number of times the series rises from one step to the next, ignoring
/// changes smaller than `tol`.
std::size_t count_increases(std::span<const double> values, double tol = 1e-15) noexcept;

struct EntropyPoint {
    double theta_h_deg = 0.0;
    double theta_f_deg = 0.0;
    double gamma_deg = 0.0;
    double phi_deg = 0.0;
    double mean_entropy = 0.0;
    std::string error;
};

struct EntropyGrid {
    std::vector<double> theta_h_deg;
    std::vector<double> theta_f_deg;
    std::vector<double> gamma_deg;
    std::vector<double> phi_deg;
};

/// <S_E> over t >= t0 for every grid combination, ordered theta_h, theta_f,
/// gamma, phi (phi fastest).
std::vector<EntropyPoint> entropy_map(const EntropyGrid& grid, const EvolveConfig& base, std::int64_t t0,
                                      unsigned workers);

}  // namespace fqw
