#include "qcollapse/rng.hpp"

#include <cmath>

namespace qcollapse {

namespace {

std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::string_view name)
    : seed_(name.empty() ? seed : splitmix64(seed ^ fnv1a(name))), engine_(splitmix64(seed_)) {}

RngStream RngStream::split(std::string_view name) const { return RngStream(seed_, name); }

RngStream RngStream::split(std::uint64_t index) const {
  return RngStream(splitmix64(seed_ + 0x632be59bd9b4e019ULL * (index + 1)));
}

double RngStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RngStream::normal() { return normal_(engine_); }

double RngStream::exponential(double rate) {
  // 1 - u lies in (0, 1], so the log is finite.
  return -std::log1p(-uniform()) / rate;
}

}  // namespace qcollapse
