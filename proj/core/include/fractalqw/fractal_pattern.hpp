#pragma once

// Space-time Sierpinski carpet produced by b_{t+1}(x) = b_t(x-1) XOR b_t(x+1),
// seeded with a single 1 at x = 0. A 1-bit selects the Hadamard coin, a 0-bit
// the Fourier coin.

#include <cstdint>
#include <span>
#include <vector>

namespace fqw {

enum class CoinKind : std::uint8_t { Hadamard, Fourier };

/// One time slice b_t(x) of the carpet, stored over the cone [-t, t].
/// Reads outside the cone return 0.
class FractalRow {
  public:
    /// The t = 0 seed row.
    FractalRow();

    std::int64_t step() const noexcept { return t_; }
    std::int64_t x_min() const noexcept { return -t_; }
    std::int64_t x_max() const noexcept { return t_; }

    std::uint8_t bit(std::int64_t x) const noexcept {
        if (x < -t_ || x > t_) return 0;
        return bits_[static_cast<std::size_t>(x + t_)];
    }

    /// bits()[i] is b_t(i - t).
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    std::int64_t count_ones() const noexcept;

    /// Replaces *this with the next row; `scratch` is reused storage.
    void advance(std::vector<std::uint8_t>& scratch);

    /// Writes the next row into `next`, reusing its storage.
    void advance_into(FractalRow& next) const;

    friend bool operator==(const FractalRow&, const FractalRow&) = default;

  private:
    std::int64_t t_ = 0;
    std::vector<std::uint8_t> bits_;
};

FractalRow seed_row();
FractalRow next_row(const FractalRow& row);

CoinKind coin_kind_at(const FractalRow& row, std::int64_t x) noexcept;

/// Total number of 1-bits over rows t = 0 .. n_rows-1.
std::uint64_t ones_in_rows(std::int64_t n_rows);

/// Rows 0..t_max, materialized. Only meant for carpet export.
std::vector<FractalRow> materialize_carpet(std::int64_t t_max);

/// Mean gap between coin-change events at a fixed site.
///
/// A change happens at step t when b_t(x) != b_{t-1}(x), counted for
/// t in (|x|, t_max]. The mean gap is (last - first) / (count - 1).
/// Returns +infinity when fewer than two changes occur. Throws DomainError
/// when t_max < |x|.
double coin_change_interval(std::int64_t x, std::int64_t t_max);

/// Same estimator for several sites, sharing one pass over the carpet.
std::vector<double> coin_change_intervals(std::span<const std::int64_t> sites, std::int64_t t_max);

}  // namespace fqw
