#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ccssp {

// Opaque canonical encoding of a domain state. The library imposes only
// hash/equality; domains supply compact encodings (packed grid coordinates,
// interned augmented states, ...).
using StateId = std::uint64_t;

// Index into the problem's action set, 0 <= a < num_actions.
using ActionId = std::uint32_t;

enum class Sense { Maximize, Minimize };

inline const char* to_string(Sense s) {
  return s == Sense::Maximize ? "max" : "min";
}

// (state, step) key used by policies and per-layer lookups.
struct NodeKey {
  StateId state;
  int step;
  bool operator==(const NodeKey& o) const {
    return state == o.state && step == o.step;
  }
};

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const {
    std::uint64_t h = k.state * 0x9e3779b97f4a7c15ull;
    h ^= static_cast<std::uint64_t>(k.step) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

}  // namespace ccssp
