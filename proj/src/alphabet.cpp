#include "tcrsc/alphabet.hpp"

#include "tcrsc/hash.hpp"

namespace tcrsc {

Alphabet::Alphabet() {
  index_.fill(-1);
  for (int i = 0; i < kSize; ++i) {
    index_[static_cast<unsigned char>(kSymbols[static_cast<std::size_t>(i)])] = i;
  }
}

const Alphabet& Alphabet::standard() {
  static const Alphabet instance;
  return instance;
}

std::uint64_t Alphabet::hash() const { return fnv1a64(kSymbols); }

}  // namespace tcrsc
