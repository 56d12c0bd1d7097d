#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace purcorr {

/// splitmix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
	x += 0x9E3779B97F4A7C15ull;
	x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
	x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
	return x ^ (x >> 31);
}

/// Seed for stream `index` of a campaign seeded with `seed`. Order-independent.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
	return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ull));
}

/// Seedable generator whose output depends only on the seed, never on the
/// standard library: raw mt19937_64 words are converted to doubles here rather
/// than through <random> distributions (whose algorithms are implementation-defined).
class Rng {
public:
	static constexpr std::string_view kAlgorithm = "mt19937_64 (53-bit uniforms, Box-Muller normals)";

	explicit Rng(std::uint64_t seed) : engine_(seed) {}

	/// Uniform on [0, 1).
	double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

	/// Standard normal N(0, 1).
	double normal() {
		if (has_spare_) {
			has_spare_ = false;
			return spare_;
		}
		const double u1 = 1.0 - uniform(); // (0, 1]
		const double u2 = uniform();
		const double radius = std::sqrt(-2.0 * std::log(u1));
		const double angle = 2.0 * std::numbers::pi * u2;
		spare_ = radius * std::sin(angle);
		has_spare_ = true;
		return radius * std::cos(angle);
	}

	/// Standard complex Gaussian: E|z|^2 = 1.
	std::complex<double> complex_normal() {
		const double re = normal();
		const double im = normal();
		return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
	}

private:
	std::mt19937_64 engine_;
	double spare_ = 0.0;
	bool has_spare_ = false;
};

} // namespace purcorr
