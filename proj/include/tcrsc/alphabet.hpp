#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace tcrsc {

// The 20 standard amino acids in ascending one-letter order, followed by X
// (index 20) for ambiguous or nonstandard residues. 21 symbols total.
class Alphabet {
 public:
  static constexpr int kSize = 21;
  static constexpr std::string_view kSymbols = "ACDEFGHIKLMNPQRSTVWYX";

  static const Alphabet& standard();

  // 0-based position, or -1 if the character is not in the alphabet.
  int index(char c) const { return index_[static_cast<unsigned char>(c)]; }
  bool contains(char c) const { return index(c) >= 0; }
  char symbol(int i) const { return kSymbols[static_cast<std::size_t>(i)]; }

  std::uint64_t hash() const;

 private:
  Alphabet();
  std::array<int, 256> index_;
};

}  // namespace tcrsc
