#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "mcjesp/rng.hpp"
#include "mcjesp/types.hpp"

namespace mcjesp {

/// Empirical distribution of a particle multiset: sorted (state, count) bins.
template <class State>
struct Histogram {
  std::vector<std::pair<State, std::size_t>> bins;
  std::size_t total = 0;

  double probability(const State& s) const {
    auto it = std::lower_bound(bins.begin(), bins.end(), s,
                               [](const auto& bin, const State& x) { return bin.first < x; });
    if (it == bins.end() || !(it->first == s) || total == 0) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(total);
  }
};

/// Multiset of sampled states approximating a belief.
template <class State>
class ParticleBelief {
 public:
  ParticleBelief() = default;
  explicit ParticleBelief(std::vector<State> particles) : particles_(std::move(particles)) {}

  void add(State s) { particles_.push_back(std::move(s)); }
  void reserve(std::size_t n) { particles_.reserve(n); }
  std::size_t size() const { return particles_.size(); }
  bool empty() const { return particles_.empty(); }
  const std::vector<State>& particles() const { return particles_; }

  const State& sample(Rng& rng) const { return particles_[rng.below(particles_.size())]; }

  Histogram<State> histogram() const {
    std::vector<State> sorted(particles_);
    std::sort(sorted.begin(), sorted.end());
    Histogram<State> h;
    h.total = sorted.size();
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      h.bins.emplace_back(sorted[i], j - i);
      i = j;
    }
    return h;
  }

 private:
  std::vector<State> particles_;
};

/// L1 distance between two empirical distributions, in [0, 2].
template <class State>
double belief_distance(const Histogram<State>& a, const Histogram<State>& b) {
  if (a.total == 0 || b.total == 0) throw Error("belief_distance on an empty belief");
  const double na = static_cast<double>(a.total);
  const double nb = static_cast<double>(b.total);
  double d = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.bins.size() || j < b.bins.size()) {
    if (j == b.bins.size() || (i < a.bins.size() && a.bins[i].first < b.bins[j].first)) {
      d += static_cast<double>(a.bins[i++].second) / na;
    } else if (i == a.bins.size() || b.bins[j].first < a.bins[i].first) {
      d += static_cast<double>(b.bins[j++].second) / nb;
    } else {
      d += std::abs(static_cast<double>(a.bins[i++].second) / na - static_cast<double>(b.bins[j++].second) / nb);
    }
  }
  return std::min(d, 2.0);
}

template <class State>
double belief_distance(const ParticleBelief<State>& a, const ParticleBelief<State>& b) {
  return belief_distance(a.histogram(), b.histogram());
}

}  // namespace mcjesp
