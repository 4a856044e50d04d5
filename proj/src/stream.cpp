#include "rcgd/stream.hpp"

#include <stdexcept>

namespace rcgd {

CoordinateStream::CoordinateStream(std::uint64_t seed, int dim)
    : seed_(seed), dim_(dim) {
  if (dim < 1) throw std::invalid_argument("CoordinateStream: dim must be >= 1");
}

}  // namespace rcgd
