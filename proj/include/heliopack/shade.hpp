#pragma once

// Panel-to-panel shadow projection and the sparse time-sampled shadow matrix.

#include "heliopack/layout.hpp"
#include "heliopack/solar.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace heliopack {

/// Caster corners swept along the anti-sun direction.
struct ShadowPrism {
  std::array<Point3, 4> base;
  Point3 direction;  // unit, away from the sun
};

/// Plane through `origin` with unit `normal`.
struct Plane {
  Point3 origin;
  Point3 normal;
};

ShadowPrism make_prism(const CandidatePanel& caster, const SunVector& sun);

/// Projects the part of the caster whose distance to the plane along the
/// prism direction is at least `min_distance` onto the plane. Empty when the
/// sun is at or below the horizon, the direction is parallel to the plane,
/// or no part of the caster is far enough upstream.
std::vector<Point3> shadow_on_plane(const ShadowPrism& prism, const Plane& plane, double min_distance = 0.0);

/// Plane of a receiver panel, oriented with an upward normal.
Plane panel_plane(const CandidatePanel& panel);

/// Fraction of the receiver's area covered by the caster's shadow, in [0, 1].
double shaded_fraction(const CandidatePanel& caster, const CandidatePanel& receiver, const SunVector& sun);

struct ShadowEntry {
  std::uint32_t other = 0;  // caster in the receiver view, receiver in the caster view
  std::uint16_t k = 0;
  float fraction = 0.0f;
};

struct ShadowTriplet {
  std::uint32_t receiver = 0;
  std::uint32_t caster = 0;
  std::uint16_t k = 0;
  float fraction = 0.0f;

  friend bool operator==(const ShadowTriplet&, const ShadowTriplet&) = default;
};

/// Sparse pairwise terms S(i, j, k) (receiver i, caster j) plus the dense
/// fixed-shading diagonal. Entries are indexed both by receiver and by caster.
class ShadowMatrix {
 public:
  ShadowMatrix() = default;
  ShadowMatrix(int num_candidates, int num_samples, std::vector<ShadowTriplet> triplets);

  int num_candidates() const { return n_; }
  int num_samples() const { return k_; }
  std::size_t num_entries() const { return by_receiver_.size(); }

  /// Entries shading receiver i, sorted by (caster, k).
  std::span<const ShadowEntry> by_receiver(int i) const { return slice(by_receiver_, recv_offset_, i); }
  /// Entries cast by caster j, sorted by (receiver, k).
  std::span<const ShadowEntry> by_caster(int j) const { return slice(by_caster_, cast_offset_, j); }

  /// S(i, j, k); the diagonal when i == j.
  double get(int i, int j, int k) const;

  /// All off-diagonal entries sorted by (receiver, caster, k).
  std::vector<ShadowTriplet> triplets() const;

  Eigen::MatrixXd diagonal;  // N x K, in [0, 1]

 private:
  static std::span<const ShadowEntry> slice(const std::vector<ShadowEntry>& v, const std::vector<std::size_t>& off,
                                            int i) {
    return {v.data() + off[i], off[i + 1] - off[i]};
  }

  int n_ = 0;
  int k_ = 0;
  std::vector<ShadowEntry> by_receiver_;
  std::vector<std::size_t> recv_offset_{0};
  std::vector<ShadowEntry> by_caster_;
  std::vector<std::size_t> cast_offset_{0};
};

struct ShadowOptions {
  double cull_distance = 30.0;  // m, between anchors
  double min_elevation = 3.0;   // deg
  /// Pairs that can never be selected together; their terms are not stored.
  const ConflictGraph* skip_pairs = nullptr;
};

/// Fractions below this are treated as no shading.
inline constexpr double kMinShadowFraction = 1e-6;

ShadowMatrix build_shadow_matrix(const std::vector<CandidatePanel>& candidates, const TimeSampleSet& samples,
                                 const ShadowOptions& options = {});

/// Row t is min(1, sum over placed j of shaded_fraction(j, targets[t], sun_k)),
/// culled like the matrix build. Conflict skipping does not apply.
Eigen::MatrixXd fixed_shading(const std::vector<CandidatePanel>& candidates, const std::vector<int>& placed,
                              const std::vector<int>& targets, const TimeSampleSet& samples,
                              const ShadowOptions& options = {});

/// Overwrites diagonal rows of the targets with their fixed shading.
void apply_fixed_shading(ShadowMatrix& matrix, const std::vector<CandidatePanel>& candidates,
                         const std::vector<int>& placed, const std::vector<int>& targets,
                         const TimeSampleSet& samples, const ShadowOptions& options = {});

/// Hash of candidate geometry, sun vectors and options, used as cache key.
std::uint64_t shadow_cache_key(const std::vector<CandidatePanel>& candidates, const TimeSampleSet& samples,
                               const ShadowOptions& options);

/// Little-endian cache: u64 key, u32 N, u32 K, u64 count, then count records
/// of (u32 receiver, u32 caster, u16 k, f32 fraction). Diagonal not stored.
void write_shadow_cache(const std::filesystem::path& path, const ShadowMatrix& matrix, std::uint64_t key);

/// Returns nullopt when the file is missing or its key or sizes differ;
/// throws DataError when the file is truncated or malformed.
std::optional<ShadowMatrix> read_shadow_cache(const std::filesystem::path& path, std::uint64_t key, int n, int k);

}  // namespace heliopack
