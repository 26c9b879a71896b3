#include "snn/types.hpp"

#include <algorithm>

#include "snn/error.hpp"

namespace snn {

SpikeTrain::SpikeTrain(TimeUnit duration)
    : duration_(duration), fires_(static_cast<size_t>(duration) + 1, 0) {
  if (duration < 0) throw DomainError("spike train duration must be >= 0");
}

int SpikeTrain::count() const {
  return static_cast<int>(std::count(fires_.begin(), fires_.end(), uint8_t{1}));
}

std::vector<TimeUnit> SpikeTrain::times() const {
  std::vector<TimeUnit> out;
  for (size_t t = 0; t < fires_.size(); ++t)
    if (fires_[t]) out.push_back(static_cast<TimeUnit>(t));
  return out;
}

SpikeField::SpikeField(int neurons, TimeUnit duration)
    : width_(neurons), height_(1), duration_(duration),
      trains_(static_cast<size_t>(neurons), SpikeTrain(duration)) {}

SpikeField::SpikeField(int width, int height, TimeUnit duration)
    : width_(width), height_(height), duration_(duration),
      trains_(static_cast<size_t>(width) * static_cast<size_t>(height),
              SpikeTrain(duration)) {}

std::vector<std::vector<int>> SpikeField::schedule() const {
  std::vector<std::vector<int>> at(static_cast<size_t>(duration_) + 1);
  for (int i = 0; i < size(); ++i) {
    const auto& train = trains_[static_cast<size_t>(i)];
    for (TimeUnit t = 0; t <= duration_; ++t)
      if (train.fired(t)) at[static_cast<size_t>(t)].push_back(i);
  }
  return at;
}

long SpikeField::total_spikes() const {
  long total = 0;
  for (const auto& train : trains_) total += train.count();
  return total;
}

namespace {
uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

std::mt19937_64 derive_stream(uint64_t seed, uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace snn
