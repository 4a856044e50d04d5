#pragma once

#include <cstdint>

#include "rcgd/rng.hpp"

namespace rcgd {

// Two-sided sequence of coordinate indices, indexed by t in Z.  The index at
// time t is a hash of (seed, t), so negative times, shifts and random access
// need no storage.  Indices are 0-based in {0, ..., dim-1}.
class CoordinateStream {
 public:
  CoordinateStream(std::uint64_t seed, int dim);

  int dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  long long offset() const { return offset_; }

  // i_t for any signed t.
  int at(long long t) const {
    const std::uint64_t u = avalanche(
        seed_ + kGolden * static_cast<std::uint64_t>(t + offset_));
    return static_cast<int>((static_cast<unsigned __int128>(u) *
                             static_cast<unsigned __int128>(dim_)) >>
                            64);
  }

  // The shifted sample: shifted(s).at(t) == at(t + s).
  CoordinateStream shifted(long long s) const {
    CoordinateStream out = *this;
    out.offset_ += s;
    return out;
  }

 private:
  std::uint64_t seed_;
  int dim_;
  long long offset_ = 0;
};

}  // namespace rcgd
