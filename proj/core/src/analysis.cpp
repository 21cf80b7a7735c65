#include "fractalqw/analysis.hpp"

#include "fractalqw/errors.hpp"
#include "fractalqw/observables.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace fqw {

FitWindow default_fit_window(std::int64_t t_max) noexcept {
    return {std::max<std::int64_t>(1, t_max / 100), std::max<std::int64_t>(1, t_max)};
}

FitWindow resolve_window(const FitOptions& options, std::int64_t t_max) {
    const FitWindow w = options.window.value_or(default_fit_window(t_max));
    if (w.lo < 1 || w.hi < w.lo) throw UsageError("fit window must satisfy 1 <= lo <= hi");
    if (w.hi > t_max) throw UsageError("fit window upper bound exceeds t_max");
    return w;
}

PowerLawFit loglog_fit(std::span<const std::int64_t> t, std::span<const double> y, FitWindow window, FitSign sign,
                       std::size_t min_samples) {
    if (t.size() != y.size()) throw UsageError("loglog_fit: t and y differ in length");
    if (window.lo < 1) throw UsageError("loglog_fit: window must start at t >= 1");

    PowerLawFit fit;
    fit.window = window;
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < window.lo || t[i] > window.hi) continue;
        if (!(y[i] > 0.0) || !std::isfinite(y[i])) {
            throw FitError(FitError::Kind::NonPositiveValues,
                           "loglog_fit: non-positive value at t = " + std::to_string(t[i]));
        }
        fit.sample_times.push_back(t[i]);
        lx.push_back(std::log(static_cast<double>(t[i])));
        ly.push_back(std::log(y[i]));
    }
    const std::size_t n = lx.size();
    if (n < std::max<std::size_t>(min_samples, 3)) {
        throw FitError(FitError::Kind::InsufficientSamples,
                       "loglog_fit: " + std::to_string(n) + " samples in window, need " +
                           std::to_string(std::max<std::size_t>(min_samples, 3)));
    }

    const double nn = static_cast<double>(n);
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= nn;
    my /= nn;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) {
        throw FitError(FitError::Kind::InsufficientSamples, "loglog_fit: all samples share one time");
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - (intercept + slope * lx[i]);
        rss += r * r;
    }
    const double s2 = rss / (nn - 2.0);

    fit.exponent = sign == FitSign::Growth ? slope : -slope;
    fit.intercept = intercept;
    fit.exponent_stderr = std::sqrt(s2 / sxx);
    fit.intercept_stderr = std::sqrt(s2 * (1.0 / nn + mx * mx / sxx));
    return fit;
}

FilteredSeries drop_zeros(std::span<const std::int64_t> t, std::span<const double> y, double zero_tol) {
    FilteredSeries out;
    for (std::size_t i = 0; i < t.size() && i < y.size(); ++i) {
        if (y[i] > zero_tol) {
            out.t.push_back(t[i]);
            out.y.push_back(y[i]);
        } else {
            ++out.excluded;
        }
    }
    return out;
}

double asymptotic_mean_entropy(std::span<const std::int64_t> t, std::span<const double> entropy, std::int64_t t0) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < t.size() && i < entropy.size(); ++i) {
        if (t[i] >= t0) {
            sum += entropy[i];
            ++count;
        }
    }
    if (count == 0) throw UsageError("asymptotic_mean_entropy: no samples with t >= " + std::to_string(t0));
    return sum / static_cast<double>(count);
}

unsigned default_workers() noexcept { return std::max(1u, std::thread::hardware_concurrency()); }

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& job) {
    if (n == 0) return;
    workers = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(std::min<std::size_t>(n, 1024)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        job(i);
                    } catch (...) {
                        if (!failed.exchange(true)) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

bool is_odd_multiple_of_right_angle(double theta_deg) noexcept {
    const double k = theta_deg / 90.0;
    const double nearest = std::round(k);
    return std::abs(k - nearest) < 1e-9 && std::fmod(std::abs(nearest), 2.0) == 1.0;
}

SpreadResult spread_analysis(const EvolveConfig& config, const FitOptions& fit, std::size_t output_points) {
    const FitWindow window = resolve_window(fit, config.t_max);
    const auto fit_times = SampleSchedule::log_spaced(window.lo, window.hi, fit.samples).resolve(config.t_max);
    auto times = SampleSchedule::log_spaced(1, config.t_max, output_points).resolve(config.t_max);
    times.insert(times.end(), fit_times.begin(), fit_times.end());
    times.push_back(0);

    const Observer observers[] = {second_moment_observer(SampleSchedule::at(times))};
    auto series = evolve(config, observers);

    SpreadResult result;
    result.m2 = std::move(series.front());
    result.bounded =
        config.mode == WalkMode::Fractal && is_odd_multiple_of_right_angle(rad_to_deg(config.coins.theta_h));

    // fit only on the log-spaced fit samples, with zeros dropped
    std::vector<std::int64_t> ft;
    std::vector<double> fy;
    for (std::size_t i = 0; i < result.m2.t.size(); ++i) {
        if (std::binary_search(fit_times.begin(), fit_times.end(), result.m2.t[i])) {
            ft.push_back(result.m2.t[i]);
            fy.push_back(result.m2.values[i]);
        }
    }
    const auto kept = drop_zeros(ft, fy, fit.zero_tol);
    result.zero_samples = kept.excluded;
    try {
        result.fit = loglog_fit(kept.t, kept.y, window, FitSign::Growth, fit.min_samples);
    } catch (const FitError& e) {
        result.fit_error = e.what();
    }
    return result;
}

std::vector<AlphaRow> alpha_diagram(std::span<const double> theta_grid_deg, std::int64_t t_max,
                                    const EvolveConfig& base, const FitOptions& fit, unsigned workers) {
    std::vector<AlphaRow> rows(theta_grid_deg.size());
    parallel_for(rows.size(), workers, [&](std::size_t i) {
        AlphaRow& row = rows[i];
        row.theta_deg = theta_grid_deg[i];
        row.bounded = is_odd_multiple_of_right_angle(row.theta_deg);
        try {
            EvolveConfig config = base;
            config.mode = WalkMode::Fractal;
            config.t_max = t_max;
            config.coins = CoinParams::from_degrees(row.theta_deg, row.theta_deg);
            const auto spread = spread_analysis(config, fit, 2);
            if (spread.fit) {
                row.alpha = spread.fit->exponent;
                row.alpha_stderr = spread.fit->exponent_stderr;
                row.intercept = spread.fit->intercept;
            } else {
                row.error = spread.fit_error;
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });
    return rows;
}

TraceDistanceResult trace_distance_analysis(const EvolveConfig& config, const FitOptions& fit) {
    const FitWindow window = resolve_window(fit, config.t_max);
    const Observer observers[] = {trace_distance_observer(SampleSchedule::every(1))};
    auto series = evolve(config, observers);

    TraceDistanceResult result;
    result.distance = std::move(series.front());

    const auto fit_times = SampleSchedule::log_spaced(window.lo, window.hi, fit.samples).resolve(config.t_max);
    std::vector<std::int64_t> ft;
    std::vector<double> fy;
    for (auto t : fit_times) {
        ft.push_back(t);
        fy.push_back(result.distance.values[static_cast<std::size_t>(t)]);
    }
    for (std::size_t i = 1; i < result.distance.values.size(); ++i) {
        if (!(result.distance.values[i] > fit.zero_tol)) ++result.zero_samples;
    }
    const auto kept = drop_zeros(ft, fy, fit.zero_tol);
    try {
        result.fit = loglog_fit(kept.t, kept.y, window, FitSign::Decay, fit.min_samples);
    } catch (const FitError& e) {
        result.fit_error = e.what();
    }
    return result;
}

std::size_t count_increases(std::span<const double> values, double tol) noexcept {
    std::size_t n = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] - values[i - 1] > tol) ++n;
    }
    return n;
}

std::vector<EntropyPoint> entropy_map(const EntropyGrid& grid, const EvolveConfig& base, std::int64_t t0,
                                      unsigned workers) {
    std::vector<EntropyPoint> points;
    for (double th : grid.theta_h_deg)
        for (double tf : grid.theta_f_deg)
            for (double g : grid.gamma_deg)
                for (double p : grid.phi_deg) points.push_back({th, tf, g, p, 0.0, {}});

    if (t0 > base.t_max) throw UsageError("entropy_map: t0 exceeds t_max");
    std::vector<std::int64_t> times;
    for (std::int64_t t = std::max<std::int64_t>(0, t0); t <= base.t_max; ++t) times.push_back(t);
    const auto schedule = SampleSchedule::at(std::move(times));

    parallel_for(points.size(), workers, [&](std::size_t i) {
        EntropyPoint& point = points[i];
        try {
            EvolveConfig config = base;
            config.coins = CoinParams::from_degrees(point.theta_h_deg, point.theta_f_deg);
            config.gamma = deg_to_rad(point.gamma_deg);
            config.phi = deg_to_rad(point.phi_deg);
            const Observer observers[] = {entropy_observer(schedule)};
            const auto series = evolve(config, observers);
            point.mean_entropy = asymptotic_mean_entropy(series[0].t, series[0].values, t0);
        } catch (const std::exception& e) {
            point.error = e.what();
        }
    });
    return points;
}

}  // namespace fqw
