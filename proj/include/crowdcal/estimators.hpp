#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "crowdcal/dual.hpp"
#include "crowdcal/trace.hpp"

namespace crowdcal {

enum class EstimatorKind { kIpa, kDgo, kHybrid, kPgo };

inline const char* to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::kIpa: return "ipa";
    case EstimatorKind::kDgo: return "dgo";
    case EstimatorKind::kHybrid: return "hybrid";
    case EstimatorKind::kPgo: return "pgo";
  }
  return "?";
}

// An instrumented stochastic program: same (theta, omega) must yield the
// same output value in every mode.
struct ProgramHandle {
  int param_dim;
  std::function<Dual(std::span<const Dual>, uint64_t omega_seed, TraceContext&)> run;
};

enum class BandwidthRule { kSilverman, kFixed };

struct KdeConfig {
  BandwidthRule rule = BandwidthRule::kSilverman;
  double fixed_bandwidth = 1.0;
};

struct KdeResult {
  double density = 0.0;
  bool degenerate = false;  // zero sample spread
};

// Gaussian-kernel density estimate at the origin. Silverman bandwidth
// h = 1.06 * sd * m^(-1/5) unless a fixed bandwidth is forced.
KdeResult kde_at_zero(std::span<const double> values, const KdeConfig& kde = {});

struct EstimatorConfig {
  int samples = 1;
  double sigma = 0.0;  // parameter smoothing; must be > 0 for PGO
  EstimatorKind mode = EstimatorKind::kIpa;
  KdeConfig kde;
  uint64_t seed = 0;
  std::size_t registry_cap = 10000;
};

// One branch key's additive term in the DGO sum.
struct JumpContribution {
  BranchKey key;
  double delta_p;            // P(omega+) - P(omega-)
  double lambda;             // reach proportion in (0, 1]
  double density_at_zero;    // KDE of the condition realizations at 0
  Eigen::VectorXd condition_tangent;  // mean tangent of the boundary pair
  Eigen::VectorXd contribution;       // delta_p * lambda * density * tangent
};

struct GradientEstimate {
  Eigen::VectorXd gradient;
  Eigen::VectorXd pathwise_mean;  // the gradient before jump corrections
  double mean_output = 0.0;
  std::vector<JumpContribution> jumps;
  int samples_used = 0;
  long evaluations_used = 0;
  bool registry_truncated = false;
  int degenerate_density_count = 0;
  int skipped_branch_keys = 0;  // fewer than 2 observations or single-signed
};

GradientEstimate estimate_ipa(const ProgramHandle& prog, const Eigen::VectorXd& theta,
                              const EstimatorConfig& cfg);

// Randomized finite differences with Gaussian parameter perturbations;
// each sample shares omega between the perturbed and unperturbed run.
// Costs 2S evaluations.
GradientEstimate estimate_pgo(const ProgramHandle& prog, const Eigen::VectorXd& theta,
                              const EstimatorConfig& cfg);

// Pathwise mean plus per-branch jump corrections gathered from the
// branch registry; handles both the full and the hybrid mode.
GradientEstimate estimate_dgo(const ProgramHandle& prog, const Eigen::VectorXd& theta,
                              const EstimatorConfig& cfg);

// Dispatch on cfg.mode.
GradientEstimate estimate(const ProgramHandle& prog, const Eigen::VectorXd& theta,
                          const EstimatorConfig& cfg);

// High-evaluation PGO estimate used as ground truth in fidelity studies.
// `evaluations` counts function evaluations, so S = evaluations / 2.
Eigen::VectorXd reference_gradient(const ProgramHandle& prog, const Eigen::VectorXd& theta,
                                   long evaluations, double sigma, uint64_t seed);

// Mean absolute error between two sweeps of a single gradient coordinate.
double gradient_mae(std::span<const double> estimates, std::span<const double> reference);

}  // namespace crowdcal
