#pragma once

#include <stdexcept>
#include <string>

namespace ccssp {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Problem definition violates a type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Reachable expansion exceeded the configured state-node cap.
class NodeCapExceeded : public Error {
 public:
  using Error::Error;
};

// r^j(s0) > Delta^j: the risk constraint's right-hand side would be negative.
class InfeasibleAtRoot : public Error {
 public:
  using Error::Error;
};

// Exact-run enumeration would exceed the run cap.
class RunCapExceeded : public Error {
 public:
  using Error::Error;
};

// Brute-force policy space exceeds the enumeration cap.
class PolicySpaceCapExceeded : public Error {
 public:
  using Error::Error;
};

// Exact GCC augmentation grew past the node cap; use the discretized mode.
class AugmentationBlowup : public Error {
 public:
  using Error::Error;
};

// Policy queried outside its (state, step) domain.
class PolicyGraphMismatch : public Error {
 public:
  using Error::Error;
};

// Flow assignment violates conservation beyond tolerance.
class FlowInconsistency : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ccssp
