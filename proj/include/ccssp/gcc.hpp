#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ccssp/policy.hpp"
#include "ccssp/problem.hpp"

namespace ccssp {

using Rational = boost::multiprecision::cpp_rational;

// Doubles are dyadic rationals; this conversion is exact.
Rational to_rational(double v);

// Interned augmented states <base, g> where g accumulates one entry per
// global criterion (exact rationals in exact mode, integer tick counts in
// discretized mode). Thread-safe; fresh ids are sequential.
class AugmentedStateTable {
 public:
  struct Decoded {
    StateId base;
    std::vector<Rational> g_exact;      // exact mode
    std::vector<std::int64_t> g_ticks;  // discretized mode
  };

  virtual ~AugmentedStateTable() = default;
  virtual Decoded decode(StateId augmented) const = 0;
  virtual std::size_t size() const = 0;
};

struct ReducedProblem {
  ProblemSpec spec;  // a CC-SSP: GlobalChance criteria became RiskCriteria
  std::shared_ptr<const AugmentedStateTable> states;
};

struct ReduceOptions {
  // Cap on distinct augmented states interned; exceeding it throws
  // AugmentationBlowup pointing at the discretized mode.
  std::uint64_t state_cap = 10'000'000;
};

// Lemma-2 reduction: T' moves <s,g> to <s', g + C(s,a)> with probability
// T(s,a,s'); r(<s,g>) = 1 iff some g^j > P^j. Exact rational accumulation.
ReducedProblem reduce_exact(const ProblemSpec& spec,
                            const ReduceOptions& opts = {});

struct DiscretizationPlan {
  struct PerCriterion {
    int criterion_index = 0;
    double epsilon = 0.0;
    double c_max = 0.0;            // max reachable |C|
    Rational tick_size;            // K = eps * C_max / h
    std::int64_t tick_cap = 0;     // h * ceil(h / eps)
    bool negative_costs = false;   // widens tick range to +-cap
  };
  std::vector<PerCriterion> entries;
};

// K^j = eps * C^j_max / h per GlobalChance criterion; throws ValidationError
// for eps outside (0,1). C_max is taken over states reachable within h steps.
DiscretizationPlan make_plan(const ProblemSpec& spec, double epsilon,
                             const ReduceOptions& opts = {});

// Resource-augmented reduction: augmented states carry integer tick vectors
// g^ accumulated from C^(s,a) = ceil(C(s,a)/K); r = 1 iff K g^ > (1+eps) P.
// Requires C_max <= P for non-negative costs (Theorem-2 normalization,
// asserted with a diagnostic).
ReducedProblem reduce_discretized(const ProblemSpec& spec,
                                  const DiscretizationPlan& plan,
                                  const ReduceOptions& opts = {});

struct AugmentationReport {
  struct InstanceResult {
    std::uint64_t instance_seed = 0;
    double exact_optimum = 0.0;        // brute force over base policies
    double discretized_optimum = 0.0;  // MILP on the discretized reduction
    double violation_probability = 0.0;  // Pr(sum C > (1+eps) P) of that policy
    double delta = 0.0;
    bool super_optimal = false;
    bool augmented_feasible = false;
  };
  int instances = 0;
  std::vector<InstanceResult> results;
  std::vector<std::string> violations;  // expected empty
};

// Checks the resource-augmentation guarantee on `spec` plus n_random seeded
// random tiny GCC instances: (a) the discretized optimum is super-optimal
// w.r.t. the exact GCC optimum, (b) the discretized-optimal policy satisfies
// Pr(sum C > (1+eps) P) <= Delta by exact run enumeration.
AugmentationReport verify_augmentation_guarantee(const ProblemSpec& tiny_spec,
                                                 double epsilon, int n_random,
                                                 std::uint64_t seed);

}  // namespace ccssp
