#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace stm {

/// Brownian increments dW_n on a uniform grid of `steps` intervals over [0, T],
/// stored row-major as steps x dim_noise.
class PathBundle {
public:
    PathBundle(std::uint64_t seed, std::uint64_t path_index, double horizon, std::size_t steps,
               std::size_t dim_noise, std::size_t coarsening, std::vector<double> increments);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t path_index() const noexcept { return path_index_; }
    double horizon() const noexcept { return horizon_; }
    std::size_t steps() const noexcept { return steps_; }
    std::size_t dim_noise() const noexcept { return dim_noise_; }
    /// Product of coarsening factors applied since generation (1 when fresh).
    std::size_t coarsening() const noexcept { return coarsening_; }
    double stepsize() const noexcept { return horizon_ / static_cast<double>(steps_); }

    std::span<const double> row(std::size_t n) const noexcept {
        return {increments_.data() + n * dim_noise_, dim_noise_};
    }
    const std::vector<double>& increments() const noexcept { return increments_; }

    friend bool operator==(const PathBundle&, const PathBundle&) = default;

private:
    std::uint64_t seed_;
    std::uint64_t path_index_;
    double horizon_;
    std::size_t steps_;
    std::size_t dim_noise_;
    std::size_t coarsening_;
    std::vector<double> increments_;
};

/// Standard normal variate number `index` of stream (seed, path_index).
/// Random access: the value does not depend on which other variates were drawn.
double standard_normal(std::uint64_t seed, std::uint64_t path_index, std::uint64_t index) noexcept;

/// Fills `out` with variates first_index, first_index + 1, ... of stream (seed, path_index).
void fill_standard_normal(std::uint64_t seed, std::uint64_t path_index, std::uint64_t first_index,
                          std::span<double> out) noexcept;

/// Increments N(0, T/steps) per component; pure function of (seed, path_index).
PathBundle generate_paths(std::uint64_t seed, std::uint64_t path_index, std::size_t steps,
                          std::size_t dim_noise, double horizon);

/// Sums consecutive blocks of `factor` rows. `factor` must divide steps().
PathBundle coarsen(const PathBundle& bundle, std::size_t factor);

/// Binary dump: 32-byte little-endian header
///   "STMLPATH" | u64 seed | u32 steps | u32 dim_noise | f64 horizon
/// followed by steps * dim_noise little-endian f64 values, row-major.
/// Path index and coarsening are not part of the format and read back as 0 and 1.
void write_bundle(const PathBundle& bundle, const std::filesystem::path& file);
PathBundle read_bundle(const std::filesystem::path& file);

std::vector<unsigned char> encode_bundle(const PathBundle& bundle);
PathBundle decode_bundle(std::span<const unsigned char> bytes);

}  // namespace stm
