#pragma once

#include "simcert/composition.hpp"
#include "simcert/labeling.hpp"
#include "simcert/systems.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace simcert {

/// Counter-based stream: splitmix64 over (seed, counter). Identical seeds
/// replay identical sequences; trial streams are derived as seed xor trial
/// index so a batch is reproducible regardless of execution order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  static RngStream for_trial(std::uint64_t seed, std::uint64_t trial_index) {
    return RngStream(seed ^ trial_index);
  }

  std::uint64_t next_u64();
  double uniform();  // (0, 1]
  double normal();   // one Box-Muller draw (consumes a pair of uniforms)
  Vector standard_normal(Index dim);

 private:
  std::uint64_t state_;
};

struct EmptyWaypointListError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PolicySaturationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Externally scripted abstract controller; the stand-in for a synthesized
/// one. All kinds clamp their output to the declared saturation box.
struct AbstractPolicy {
  enum class Kind { Constant, Waypoint, LookupTable };
  Kind kind = Kind::Constant;
  double saturation = 0.0;  // |nuhat_i| <= saturation
  Vector constant;
  std::vector<Vector> waypoints;  // Waypoint
  double advance_tol = 0.5;       // inf-norm advancement radius
  std::vector<Vector> table;      // LookupTable, indexed by time (last entry repeats)

  void validate(Index input_dim) const;
};

AbstractPolicy constant_policy(Vector value, double saturation);
AbstractPolicy waypoint_policy(std::vector<Vector> waypoints, double saturation,
                               double advance_tol = 0.5);
AbstractPolicy lookup_table_policy(std::vector<Vector> table, double saturation);

/// Stateful evaluation of a policy along one trajectory (the waypoint kind
/// tracks its active target).
class PolicyRuntime {
 public:
  explicit PolicyRuntime(const AbstractPolicy& policy) : policy_(&policy) {}

  /// nuhat at time k given the abstract state and the predicted internal
  /// input what = Mhat hhat2(xhat).
  Vector operator()(const Vector& xhat, long k, const Vector& what);

 private:
  const AbstractPolicy* policy_;
  std::size_t active_ = 0;
};

/// Does no leg of the piecewise-linear route intersect the box?
bool route_avoids(const std::vector<Vector>& waypoints, const Box& box);
bool segment_intersects_box(const Vector& a, const Vector& b, const Box& box);

struct PairedTrajectory {
  std::vector<Vector> y;     // concrete outputs, k = 0..Td
  std::vector<Vector> yhat;  // abstract outputs
  double sup_error = 0.0;    // max_k ||y(k) - yhat(k)||
};

struct SimSetup {
  Network concrete;
  Network abstracted;
  std::vector<StorageCertificate> certs;
  Matrix Mhat;
  AbstractPolicy policy;
  Vector x0, xhat0;
  long Td = 0;

  void validate() const;
};

/// One closed-loop rollout: nuhat from the policy, what = Mhat hhat2(xhat),
/// nu from the interface blockwise, w = M h2(x); concrete and abstract noise
/// streams are independent (and the abstract one is skipped entirely for a
/// noiseless abstraction).
PairedTrajectory simulate_pair(const SimSetup& setup, RngStream& rng);

struct TrajectoryBatch {
  long trials = 0;
  long Td = 0;
  std::uint64_t seed = 0;
  std::vector<PairedTrajectory> runs;
};

struct EmptyBatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

TrajectoryBatch run_batch(const SimSetup& setup, long trials, std::uint64_t seed);

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Two-sided Clopper-Pearson interval for a binomial proportion.
ConfidenceInterval clopper_pearson(long successes, long trials, double confidence = 0.95);

struct EstimateResult {
  double p = 0.0;
  ConfidenceInterval ci;
  long count = 0;
  long trials = 0;
};

EstimateResult estimate_sup_error(const TrajectoryBatch& batch, double epsilon);

enum class TrajectorySide { Concrete, Abstract };

/// Fraction of trials whose labeled word has an accepted prefix of length
/// <= Td + 1.
EstimateResult estimate_satisfaction(const TrajectoryBatch& batch, const Dfa& dfa,
                                     const LabeledPartition& labeling, long Td,
                                     TrajectorySide side);

/// Existential variant under a multi-valued labeling.
EstimateResult estimate_satisfaction_multi(const TrajectoryBatch& batch, const Dfa& dfa,
                                           const InflatedLabeling& labeling, long Td,
                                           TrajectorySide side);

double empirical_quantile(std::vector<double> values, double q);

std::vector<double> sup_errors(const TrajectoryBatch& batch);

struct SupermartingaleSample {
  double v = 0.0;            // V(x, xhat)
  double mean_v_next = 0.0;  // Monte Carlo mean of V(x+, xhat+)
  double bound = 0.0;        // V - kappa V + rho ||nuhat||^2 + psi
  double std_error = 0.0;
  double margin_se = 0.0;    // (bound - mean) / se
  double analytic_mean = 0.0;
  bool passed = false;       // mean <= bound + 3 se
};

struct SupermartingaleReport {
  std::vector<SupermartingaleSample> samples;
  bool passed = false;
  double worst_margin_se = 0.0;
};

/// Monte Carlo check of the one-step decrease condition for the composed
/// storage function at the given state/input samples; `draws` noise samples
/// per point. The deterministic part of the step is computed once per point
/// and only the noise contribution is redrawn.
SupermartingaleReport check_supermartingale(const SimSetup& setup,
                                            const SsfParams& composed,
                                            const std::vector<double>& mu,
                                            const std::vector<Vector>& xs,
                                            const std::vector<Vector>& xhats,
                                            const std::vector<Vector>& nuhats,
                                            long draws, RngStream& rng);

}  // namespace simcert
