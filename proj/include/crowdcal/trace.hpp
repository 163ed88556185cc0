#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "crowdcal/dual.hpp"
#include "crowdcal/errors.hpp"
#include "crowdcal/rng.hpp"

namespace crowdcal {

// Execution mode of an instrumented program run.
//  kPlain  - values only, no tangents required, no branch records.
//  kIpa    - tangents propagate, branches stay invisible.
//  kDgo    - tangents propagate, every traced site records.
//  kHybrid - tangents propagate, only sites flagged kTracked record;
//            kPassthrough sites behave as plain comparisons.
enum class Mode { kPlain, kIpa, kDgo, kHybrid };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::kPlain: return "plain";
    case Mode::kIpa: return "ipa";
    case Mode::kDgo: return "dgo";
    case Mode::kHybrid: return "hybrid";
  }
  return "?";
}

enum class SiteKind { kTracked, kPassthrough };

// Static identity of one branch site, assigned at instrumentation time.
struct BranchSite {
  uint32_t id;
  SiteKind kind;
};

// Order-sensitive running digest of (site id, sign) pairs. Two samples
// with identical sign sequences at identical sites collide on purpose;
// anything else collides only with digest probability.
struct PathKey {
  uint64_t digest = kRoot;

  static constexpr uint64_t kRoot = 0x9e3779b97f4a7c15ULL;

  void extend(uint32_t site_id, bool taken) {
    digest = hash_combine(digest, (static_cast<uint64_t>(site_id) << 1) | (taken ? 1u : 0u));
  }
  friend bool operator==(PathKey a, PathKey b) { return a.digest == b.digest; }
};

struct BranchKey {
  uint64_t path;
  uint32_t site;
  friend auto operator<=>(const BranchKey&, const BranchKey&) = default;
};

struct BranchObservation {
  uint64_t sample_id;
  double condition;
  TangentVec condition_tangent;  // length n
  bool taken;
};

// All condition realizations gathered at one (path, site) pair across
// the samples of one estimate.
struct BranchRecord {
  std::vector<BranchObservation> observations;
  int reach_count = 0;
};

class BranchRegistry {
 public:
  explicit BranchRegistry(std::size_t max_keys = 10000) : max_keys_(max_keys) {}

  // Appends an observation; new keys beyond the cap are dropped and the
  // truncation diagnostic is raised instead.
  void observe(BranchKey key, BranchObservation obs) {
    auto it = records_.find(key);
    if (it == records_.end()) {
      if (records_.size() >= max_keys_) {
        truncated_ = true;
        return;
      }
      it = records_.emplace(key, BranchRecord{}).first;
    }
    it->second.reach_count += 1;
    it->second.observations.push_back(std::move(obs));
  }

  // Merge after parallel sample execution; ordering of observations
  // follows merge order and only affects floating-point summation order.
  void merge(const BranchRegistry& other) {
    for (const auto& [key, rec] : other.records_) {
      for (const auto& obs : rec.observations) observe(key, obs);
    }
    truncated_ = truncated_ || other.truncated_;
  }

  const std::map<BranchKey, BranchRecord>& records() const { return records_; }
  bool truncated() const { return truncated_; }
  std::size_t size() const { return records_.size(); }

 private:
  std::map<BranchKey, BranchRecord> records_;
  std::size_t max_keys_;
  bool truncated_ = false;
};

// Per-sample tracing state. The registry is shared across the samples
// of one estimate; everything else is owned by the sample.
class TraceContext {
 public:
  TraceContext(Mode mode, int param_dim, BranchRegistry* registry = nullptr,
               uint64_t sample_id = 0)
      : mode_(mode), param_dim_(param_dim), registry_(registry), sample_id_(sample_id) {}

  Mode mode() const { return mode_; }
  int param_dim() const { return param_dim_; }
  uint64_t sample_id() const { return sample_id_; }
  const PathKey& path() const { return path_; }
  BranchRegistry* registry() const { return registry_; }

  bool records_at(SiteKind kind) const {
    if (registry_ == nullptr) return false;
    if (mode_ == Mode::kDgo) return true;
    if (mode_ == Mode::kHybrid) return kind == SiteKind::kTracked;
    return false;
  }

  // Restarts the running path from a tag-derived root so that
  // structurally aligned program regions (e.g. the i-th coefficient
  // draw) share branch keys across samples regardless of earlier
  // control flow.
  void rescope_path(uint64_t tag) { path_.digest = hash_combine(kScopeRoot, tag); }

  void extend_path(uint32_t site_id, bool taken) { path_.extend(site_id, taken); }

 private:
  static constexpr uint64_t kScopeRoot = 0x73636f7065726f6fULL;

  Mode mode_;
  int param_dim_;
  BranchRegistry* registry_;
  uint64_t sample_id_;
  PathKey path_;
};

// The instrumented branching primitive: returns (condition < 0), and in
// recording modes appends (sample, C, dC/dtheta, taken) to the record
// keyed by the current path and site before extending the path.
inline bool traced_less_than(TraceContext& ctx, const Dual& condition, BranchSite site) {
  if (!isfinite(condition))
    throw TraceError("non-finite branch condition at sample " +
                     std::to_string(ctx.sample_id()) + ", site " + std::to_string(site.id));
  const bool taken = condition.value() < 0.0;
  if (ctx.records_at(site.kind)) {
    ctx.registry()->observe(
        BranchKey{ctx.path().digest, site.id},
        BranchObservation{ctx.sample_id(), condition.value(),
                          condition.tangent(ctx.param_dim()), taken});
  }
  ctx.extend_path(site.id, taken);
  return taken;
}

// Plain-scalar instantiations route through here; recording modes never
// run them with double conditions, so the tangent is genuinely zero.
inline bool traced_less_than(TraceContext& ctx, double condition, BranchSite site) {
  if (!std::isfinite(condition))
    throw TraceError("non-finite branch condition at sample " +
                     std::to_string(ctx.sample_id()) + ", site " + std::to_string(site.id));
  const bool taken = condition < 0.0;
  if (ctx.records_at(site.kind)) {
    ctx.registry()->observe(BranchKey{ctx.path().digest, site.id},
                            BranchObservation{ctx.sample_id(), condition,
                                              TangentVec::Zero(ctx.param_dim()), taken});
  }
  ctx.extend_path(site.id, taken);
  return taken;
}

}  // namespace crowdcal
