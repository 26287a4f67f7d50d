#include "stm/rng_paths.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "stm/errors.hpp"
#include "stm/philox.hpp"

namespace stm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Open interval (0, 1) from the top 53 bits.
double to_unit_open(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Two Box-Muller variates from Philox block `block` of stream (seed, path).
std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t path,
                                      std::uint64_t block) noexcept {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block),
                                  static_cast<std::uint32_t>(block >> 32),
                                  static_cast<std::uint32_t>(path),
                                  static_cast<std::uint32_t>(path >> 32)};
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed),
                              static_cast<std::uint32_t>(seed >> 32)};
    const auto out = Philox4x32::generate(ctr, key);
    const std::uint64_t a = (std::uint64_t{out[0]} << 32) | out[1];
    const std::uint64_t b = (std::uint64_t{out[2]} << 32) | out[3];
    const double radius = std::sqrt(-2.0 * std::log(to_unit_open(a)));
    const double angle = kTwoPi * to_unit_open(b);
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

void put_u32(unsigned char* p, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}
void put_u64(unsigned char* p, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}
std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{p[i]} << (8 * i);
    return v;
}
std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{p[i]} << (8 * i);
    return v;
}

constexpr char kMagic[8] = {'S', 'T', 'M', 'L', 'P', 'A', 'T', 'H'};
constexpr std::size_t kHeaderBytes = 32;

}  // namespace

PathBundle::PathBundle(std::uint64_t seed, std::uint64_t path_index, double horizon,
                       std::size_t steps, std::size_t dim_noise, std::size_t coarsening,
                       std::vector<double> increments)
    : seed_(seed),
      path_index_(path_index),
      horizon_(horizon),
      steps_(steps),
      dim_noise_(dim_noise),
      coarsening_(coarsening),
      increments_(std::move(increments)) {
    if (steps_ == 0) throw ParameterError("path bundle needs at least one step");
    if (dim_noise_ == 0) throw ParameterError("path bundle needs dim_noise >= 1");
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_))
        throw ParameterError("path bundle horizon must be positive and finite");
    if (increments_.size() != steps_ * dim_noise_)
        throw ParameterError("increment matrix has wrong size");
}

double standard_normal(std::uint64_t seed, std::uint64_t path_index, std::uint64_t index) noexcept {
    const auto [z0, z1] = normal_pair(seed, path_index, index / 2);
    return (index % 2 == 0) ? z0 : z1;
}

void fill_standard_normal(std::uint64_t seed, std::uint64_t path_index, std::uint64_t first_index,
                          std::span<double> out) noexcept {
    std::size_t i = 0;
    std::uint64_t index = first_index;
    if (index % 2 == 1 && i < out.size()) {
        out[i++] = standard_normal(seed, path_index, index++);
    }
    for (; i + 1 < out.size(); i += 2, index += 2) {
        const auto [z0, z1] = normal_pair(seed, path_index, index / 2);
        out[i] = z0;
        out[i + 1] = z1;
    }
    if (i < out.size()) out[i] = standard_normal(seed, path_index, index);
}

PathBundle generate_paths(std::uint64_t seed, std::uint64_t path_index, std::size_t steps,
                          std::size_t dim_noise, double horizon) {
    if (steps == 0) throw ParameterError("steps_fine must be >= 1");
    if (dim_noise == 0) throw ParameterError("dim_noise must be >= 1");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ParameterError("horizon must be positive and finite");
    std::vector<double> dw(steps * dim_noise);
    fill_standard_normal(seed, path_index, 0, dw);
    const double scale = std::sqrt(horizon / static_cast<double>(steps));
    for (double& v : dw) v *= scale;
    return PathBundle(seed, path_index, horizon, steps, dim_noise, 1, std::move(dw));
}

PathBundle coarsen(const PathBundle& bundle, std::size_t factor) {
    if (factor == 0 || bundle.steps() % factor != 0) {
        std::ostringstream msg;
        msg << "coarsening factor " << factor << " does not divide " << bundle.steps() << " steps";
        throw ParameterError(msg.str());
    }
    const std::size_t m = bundle.dim_noise();
    const std::size_t steps = bundle.steps() / factor;
    std::vector<double> dw(steps * m, 0.0);
    for (std::size_t k = 0; k < steps; ++k) {
        for (std::size_t r = 0; r < factor; ++r) {
            const auto fine = bundle.row(k * factor + r);
            for (std::size_t j = 0; j < m; ++j) dw[k * m + j] += fine[j];
        }
    }
    return PathBundle(bundle.seed(), bundle.path_index(), bundle.horizon(), steps, m,
                      bundle.coarsening() * factor, std::move(dw));
}

std::vector<unsigned char> encode_bundle(const PathBundle& bundle) {
    if (bundle.steps() > 0xFFFFFFFFu || bundle.dim_noise() > 0xFFFFFFFFu)
        throw ParameterError("bundle too large for the binary format");
    std::vector<unsigned char> bytes(kHeaderBytes + 8 * bundle.increments().size());
    unsigned char* p = bytes.data();
    std::memcpy(p, kMagic, 8);
    put_u64(p + 8, bundle.seed());
    put_u32(p + 16, static_cast<std::uint32_t>(bundle.steps()));
    put_u32(p + 20, static_cast<std::uint32_t>(bundle.dim_noise()));
    put_u64(p + 24, std::bit_cast<std::uint64_t>(bundle.horizon()));
    p += kHeaderBytes;
    for (double v : bundle.increments()) {
        put_u64(p, std::bit_cast<std::uint64_t>(v));
        p += 8;
    }
    return bytes;
}

PathBundle decode_bundle(std::span<const unsigned char> bytes) {
    if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 8) != 0)
        throw ParameterError("not a path bundle dump (bad magic)");
    const unsigned char* p = bytes.data();
    const std::uint64_t seed = get_u64(p + 8);
    const std::size_t steps = get_u32(p + 16);
    const std::size_t m = get_u32(p + 20);
    const double horizon = std::bit_cast<double>(get_u64(p + 24));
    if (bytes.size() != kHeaderBytes + 8 * steps * m)
        throw ParameterError("path bundle dump has wrong length");
    std::vector<double> dw(steps * m);
    p += kHeaderBytes;
    for (double& v : dw) {
        v = std::bit_cast<double>(get_u64(p));
        p += 8;
    }
    return PathBundle(seed, 0, horizon, steps, m, 1, std::move(dw));
}

void write_bundle(const PathBundle& bundle, const std::filesystem::path& file) {
    const auto bytes = encode_bundle(bundle);
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + file.string());
}

PathBundle read_bundle(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return decode_bundle(bytes);
}

}  // namespace stm
