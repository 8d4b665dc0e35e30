#pragma once

// Exact uniform sampling by unranking through the counting sweep, single-site
// heat-bath (Glauber) dynamics, and field output as CSV and PPM.

#include "heightlab/enumeration.hpp"
#include "heightlab/height_function.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace heightlab {

/// Counter-based generator: the word for (seed, stream, counter) is a fixed
/// function of the triple, so draws do not depend on scheduling.
class CounterRng {
 public:
  static constexpr const char* algorithm = "splitmix64-counter/1";

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t word(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return mix(mix(mix(seed) ^ stream) ^ counter);
  }

  std::uint64_t next() { return word(seed_, stream_, counter_++); }

  /// Uniform in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (std::numeric_limits<std::uint64_t>::max() / bound);
    for (;;) {
      std::uint64_t x = next();
      if (x < limit) return x % bound;
    }
  }

  /// Uniform big integer in [0, bound) by rejection on the bit length.
  BigInt below(const BigInt& bound) {
    const std::size_t bits = boost::multiprecision::msb(bound) + 1;
    for (;;) {
      BigInt x = 0;
      std::size_t have = 0;
      while (have < bits) {
        x <<= 64;
        x |= next();
        have += 64;
      }
      x >>= (have - bits);
      if (x < bound) return x;
    }
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

/// Forward layers of the counting sweep kept with predecessor lists; each draw
/// unranks one uniform integer below the total count.
class ExactSampler {
 public:
  ExactSampler(DomainPtr d, const SiteConstraint& c, const CountOptions& opts = {}) : domain_(std::move(d)) {
    windows_ = tighten_windows(*domain_, c);
    if (windows_.empty) throw Error(ErrorKind::EmptySet, "no height function meets the constraint");
    detail::check_key_range(windows_);
    const auto plan = detail::make_plan(*domain_);
    std::vector<detail::StateKey> keys{detail::StateKey{}};
    std::vector<BigInt> counts{BigInt(1)};
    std::size_t stored = 0;
    for (std::size_t i = 0; i < domain_->size(); ++i) {
      std::map<detail::StateKey, std::size_t> index;
      Layer layer;
      for (std::size_t k = 0; k < keys.size(); ++k) {
        detail::for_each_candidate(plan.steps[i], plan.frontier_before[i], keys[k], windows_, i, [&](std::int64_t v) {
          auto key = detail::next_key(plan.steps[i], keys[k], v, windows_.lo[i]);
          index.emplace(std::move(key), 0);
        });
      }
      // number states in key order so the layout is independent of hashing
      std::size_t pos = 0;
      for (auto& [key, idx] : index) idx = pos++;
      layer.preds.assign(index.size(), {});
      for (std::size_t k = 0; k < keys.size(); ++k) {
        detail::for_each_candidate(plan.steps[i], plan.frontier_before[i], keys[k], windows_, i, [&](std::int64_t v) {
          layer.preds[index.at(detail::next_key(plan.steps[i], keys[k], v, windows_.lo[i]))].push_back({k, v});
        });
      }
      std::vector<detail::StateKey> next_keys(index.size());
      for (auto& [key, idx] : index) next_keys[idx] = key;
      std::vector<BigInt> next_counts(index.size(), BigInt(0));
      for (std::size_t s = 0; s < layer.preds.size(); ++s)
        for (const auto& p : layer.preds[s]) next_counts[s] += counts[p.state];
      stored += index.size();
      if (index.size() > opts.state_budget || stored > 8 * opts.state_budget)
        throw Error(ErrorKind::InstanceTooLarge, "sampler layers exceed the state budget");
      layer.counts = std::move(counts);
      layers_.push_back(std::move(layer));
      keys = std::move(next_keys);
      counts = std::move(next_counts);
    }
    final_counts_ = std::move(counts);
    total_ = 0;
    for (const auto& c : final_counts_) total_ += c;
    if (total_ == 0) throw Error(ErrorKind::EmptySet, "no height function meets the constraint");
  }

  const BigInt& total() const { return total_; }
  const DomainPtr& domain() const { return domain_; }

  /// The height function of the given rank in [0, total).
  HeightFunction unrank(BigInt r) const {
    HeightFunction h{domain_, std::vector<std::int64_t>(domain_->size())};
    std::size_t state = pick(final_counts_, r);
    for (std::size_t i = layers_.size(); i-- > 0;) {
      const auto& layer = layers_[i];
      const auto& preds = layer.preds[state];
      std::size_t chosen = preds.size();
      for (std::size_t k = 0; k < preds.size(); ++k) {
        const auto& c = layer.counts[preds[k].state];
        if (r < c) {
          chosen = k;
          break;
        }
        r -= c;
      }
      h.values[i] = preds[chosen].value;
      state = preds[chosen].state;
    }
    return h;
  }

  HeightFunction sample(std::uint64_t seed) const {
    CounterRng rng(seed, 0);
    return unrank(rng.below(total_));
  }

 private:
  struct Pred {
    std::size_t state;  // index in the previous layer
    std::int64_t value;  // value taken at this layer's site
  };
  struct Layer {
    std::vector<BigInt> counts;  // counts of the previous layer's states
    std::vector<std::vector<Pred>> preds;
  };

  static std::size_t pick(const std::vector<BigInt>& counts, BigInt& r) {
    for (std::size_t s = 0; s < counts.size(); ++s) {
      if (r < counts[s]) return s;
      r -= counts[s];
    }
    throw std::logic_error("rank out of range");
  }

  DomainPtr domain_;
  TightWindows windows_;
  std::vector<Layer> layers_;
  std::vector<BigInt> final_counts_;
  BigInt total_;
};

inline HeightFunction sample_exact(DomainPtr d, const SiteConstraint& c, std::uint64_t seed, const CountOptions& opts = {}) {
  return ExactSampler(std::move(d), c, opts).sample(seed);
}

/// Values allowed at site i given its neighbours and window.
inline std::vector<std::int64_t> heat_bath_choices(const DiscreteDomain& d, const TightWindows& w, const std::vector<std::int64_t>& h, std::size_t i) {
  const auto& nb = d.neighbors(i);
  std::vector<std::int64_t> out;
  auto admissible = [&](std::int64_t v) {
    if (v < w.lo[i] || v > w.hi[i]) return false;
    for (auto j : nb)
      if (v - h[j] != 1 && h[j] - v != 1) return false;
    return true;
  };
  if (nb.empty()) {
    for (std::int64_t v = w.lo[i]; v <= w.hi[i]; v += 2) out.push_back(v);
    return out;
  }
  for (std::int64_t v : {h[nb[0]] - 1, h[nb[0]] + 1})
    if (admissible(v)) out.push_back(v);
  return out;
}

/// Checkerboard heat-bath dynamics. The start is the least element of the
/// constrained set (the propagated lower window). Site i in sweep t, colour c
/// draws from stream i at counter 2t + c, so any thread split gives the same path.
inline HeightFunction sample_glauber(DomainPtr d, const SiteConstraint& c, std::uint64_t seed, std::size_t sweeps, unsigned threads = 1) {
  const auto w = tighten_windows(*d, c);
  if (w.empty) throw Error(ErrorKind::EmptySet, "no height function meets the constraint");
  HeightFunction h{d, w.lo};
  std::array<std::vector<std::size_t>, 2> colour;
  for (std::size_t i = 0; i < d->size(); ++i) colour[static_cast<std::size_t>(parity(d->point(i)))].push_back(i);
  threads = std::max(1u, resolve_threads(threads));
  auto update = [&](const std::vector<std::size_t>& sites, std::size_t b, std::size_t e, std::uint64_t counter) {
    for (std::size_t k = b; k < e; ++k) {
      const std::size_t i = sites[k];
      auto choices = heat_bath_choices(*d, w, h.values, i);
      if (choices.size() > 1) h.values[i] = choices[CounterRng::word(seed, i, counter) % choices.size()];
    }
  };
  for (std::size_t t = 0; t < sweeps; ++t) {
    for (std::size_t col = 0; col < 2; ++col) {
      const auto& sites = colour[col];
      const std::uint64_t counter = 2 * t + col;
      if (threads == 1 || sites.size() < 4096) {
        update(sites, 0, sites.size(), counter);
        continue;
      }
      std::vector<std::thread> pool;
      const std::size_t chunk = (sites.size() + threads - 1) / threads;
      for (unsigned th = 0; th < threads; ++th) {
        std::size_t b = std::min(sites.size(), th * chunk), e = std::min(sites.size(), b + chunk);
        pool.emplace_back(update, std::cref(sites), b, e, counter);
      }
      for (auto& th : pool) th.join();
    }
  }
  return h;
}

/// "z1,...,zm,h" rows after a metadata comment line.
inline void write_field_csv(std::ostream& out, const HeightFunction& h, const std::string& meta = "") {
  const auto& d = *h.domain;
  out << "# heightlab/1 field" << (meta.empty() ? "" : " " + meta) << "\n";
  for (int i = 0; i < d.dim(); ++i) out << "z" << (i + 1) << ",";
  out << "h\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (auto c : d.point(i)) out << c << ",";
    out << h.values[i] << "\n";
  }
}

/// Diverging blue-white-red palette, t in [0, 1].
inline std::array<std::uint8_t, 3> coolwarm(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops{{{59, 76, 192}, {144, 178, 254}, {221, 221, 221}, {245, 156, 125}, {180, 4, 38}}};
  t = std::clamp(t, 0.0, 1.0) * 4;
  const auto k = std::min<std::size_t>(3, static_cast<std::size_t>(t));
  const double f = t - static_cast<double>(k);
  std::array<std::uint8_t, 3> rgb{};
  for (std::size_t c = 0; c < 3; ++c) rgb[c] = static_cast<std::uint8_t>(std::lround(stops[k][c] + f * (stops[k + 1][c] - stops[k][c])));
  return rgb;
}

/// Binary P6 heatmap of a 2D field: x to the right, y upward; sites outside
/// the domain are black; a constant field maps to the middle of the palette.
inline void write_field_ppm(std::ostream& out, const HeightFunction& h) {
  const auto& d = *h.domain;
  if (d.dim() != 2) throw Error(ErrorKind::UnsupportedDimension, "image output needs a 2D field");
  std::int64_t x0 = d.point(0)[0], x1 = x0, y0 = d.point(0)[1], y1 = y0;
  for (const auto& z : d.points()) {
    x0 = std::min(x0, z[0]);
    x1 = std::max(x1, z[0]);
    y0 = std::min(y0, z[1]);
    y1 = std::max(y1, z[1]);
  }
  const auto [lo, hi] = std::minmax_element(h.values.begin(), h.values.end());
  const std::int64_t width = x1 - x0 + 1, height = y1 - y0 + 1;
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width * height * 3), 0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& z = d.point(i);
    const double t = *hi == *lo ? 0.5 : static_cast<double>(h.values[i] - *lo) / static_cast<double>(*hi - *lo);
    const auto rgb = coolwarm(t);
    const auto row = static_cast<std::size_t>(y1 - z[1]), col = static_cast<std::size_t>(z[0] - x0);
    std::copy(rgb.begin(), rgb.end(), pixels.begin() + static_cast<std::ptrdiff_t>((row * static_cast<std::size_t>(width) + col) * 3));
  }
  out << "P6\n# heightlab/1 field range " << *lo << " " << *hi << "\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

}  // namespace heightlab
