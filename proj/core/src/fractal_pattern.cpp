#include "fractalqw/fractal_pattern.hpp"

#include "fractalqw/errors.hpp"

#include <cstdlib>
#include <limits>
#include <numeric>
#include <string>

namespace fqw {

FractalRow::FractalRow() : t_(0), bits_{1} {}

std::int64_t FractalRow::count_ones() const noexcept {
    return std::accumulate(bits_.begin(), bits_.end(), std::int64_t{0});
}

void FractalRow::advance(std::vector<std::uint8_t>& scratch) {
    FractalRow next;
    next.bits_ = std::move(scratch);
    advance_into(next);
    scratch = std::move(bits_);
    *this = std::move(next);
}

void FractalRow::advance_into(FractalRow& next) const {
    // next[j] = old[j] ^ old[j-2], each term zero when out of range
    const std::size_t width = bits_.size();  // 2t + 1
    auto& out = next.bits_;
    out.assign(width + 2, 0);
    for (std::size_t j = 0; j < width; ++j) out[j] = bits_[j];
    for (std::size_t j = 2; j < width + 2; ++j) out[j] ^= bits_[j - 2];
    next.t_ = t_ + 1;
}

FractalRow seed_row() { return FractalRow{}; }

FractalRow next_row(const FractalRow& row) {
    FractalRow next = row;
    std::vector<std::uint8_t> scratch;
    next.advance(scratch);
    return next;
}

CoinKind coin_kind_at(const FractalRow& row, std::int64_t x) noexcept {
    return row.bit(x) ? CoinKind::Hadamard : CoinKind::Fourier;
}

std::uint64_t ones_in_rows(std::int64_t n_rows) {
    if (n_rows < 1) throw DomainError("ones_in_rows: n_rows must be >= 1");
    FractalRow row;
    std::vector<std::uint8_t> scratch;
    std::uint64_t total = static_cast<std::uint64_t>(row.count_ones());
    for (std::int64_t t = 1; t < n_rows; ++t) {
        row.advance(scratch);
        total += static_cast<std::uint64_t>(row.count_ones());
    }
    return total;
}

std::vector<FractalRow> materialize_carpet(std::int64_t t_max) {
    if (t_max < 0) throw DomainError("materialize_carpet: t_max must be >= 0");
    std::vector<FractalRow> rows;
    rows.reserve(static_cast<std::size_t>(t_max) + 1);
    rows.emplace_back();
    for (std::int64_t t = 1; t <= t_max; ++t) rows.push_back(next_row(rows.back()));
    return rows;
}

namespace {

struct ChangeTally {
    std::int64_t first = -1;
    std::int64_t last = -1;
    std::int64_t count = 0;
    std::uint8_t previous = 0;

    double mean_gap() const {
        if (count < 2) return std::numeric_limits<double>::infinity();
        return static_cast<double>(last - first) / static_cast<double>(count - 1);
    }
};

}  // namespace

std::vector<double> coin_change_intervals(std::span<const std::int64_t> sites, std::int64_t t_max) {
    for (auto x : sites) {
        if (t_max < std::llabs(x)) {
            throw DomainError("coin_change_interval: t_max (" + std::to_string(t_max) +
                              ") is smaller than |x| = " + std::to_string(std::llabs(x)));
        }
    }

    std::vector<ChangeTally> tallies(sites.size());
    FractalRow row;
    std::vector<std::uint8_t> scratch;
    for (std::size_t i = 0; i < sites.size(); ++i) tallies[i].previous = row.bit(sites[i]);

    for (std::int64_t t = 1; t <= t_max; ++t) {
        row.advance(scratch);
        for (std::size_t i = 0; i < sites.size(); ++i) {
            auto& tally = tallies[i];
            const std::uint8_t b = row.bit(sites[i]);
            if (t > std::llabs(sites[i]) && b != tally.previous) {
                if (tally.first < 0) tally.first = t;
                tally.last = t;
                ++tally.count;
            }
            tally.previous = b;
        }
    }

    std::vector<double> out;
    out.reserve(tallies.size());
    for (const auto& tally : tallies) out.push_back(tally.mean_gap());
    return out;
}

double coin_change_interval(std::int64_t x, std::int64_t t_max) {
    const std::int64_t sites[] = {x};
    return coin_change_intervals(sites, t_max).front();
}

}  // namespace fqw
