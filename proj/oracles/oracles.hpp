#pragma once

// Brute-force reference implementations. Each oracle re-derives its answer
// from first principles (sampling, enumeration, sweeps) and shares no code
// path with the routine it checks beyond the plain data types.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace heliopack::oracle {

using P2 = Eigen::Vector2d;
using P3 = Eigen::Vector3d;
using Poly = std::vector<P2>;

// --- planar geometry -------------------------------------------------------

bool inside_ring(const P2& p, const Poly& ring);
double min_distance_to_rings(const P2& p, const std::vector<Poly>& rings);

/// Area of a ∩ b by counting cell centers on a `cell`-spaced lattice.
double raster_overlap_area(const Poly& a, const Poly& b, double cell);

/// Number of 4-connected components left after eroding the polygon (with
/// holes) by `distance`, sampled at `cell` resolution.
int eroded_components(const Poly& exterior, const std::vector<Poly>& holes, double distance, double cell);

/// Minimum enclosing-rectangle area over an exhaustive angle sweep.
double min_box_area_sweep(const std::vector<P2>& points, double step_deg);

/// (max width, min width) over an exhaustive projection-direction sweep.
std::pair<double, double> width_sweep(const std::vector<P2>& points, double step_deg);

/// Segment visibility by dense sampling: every sample inside the exterior
/// (with tolerance) and outside every hole.
bool visible_by_sampling(const P2& a, const P2& b, const Poly& exterior, const std::vector<Poly>& holes,
                         double step);

// --- sun ---------------------------------------------------------------------

/// Sun (azimuth compass deg, elevation deg) from the low-precision almanac
/// formulas (mean anomaly, ecliptic longitude, sidereal time) at a UTC instant.
std::pair<double, double> almanac_sun(int year, int month, int day, double utc_hours, double latitude,
                                      double longitude);

// --- shading -----------------------------------------------------------------

/// Fraction of the receiver quad whose sun ray hits the caster quad, by
/// Monte Carlo sampling of uniformly distributed points on the receiver.
double monte_carlo_shaded_fraction(const std::vector<P3>& caster, const std::vector<P3>& receiver,
                                   const P3& to_sun, int rays, std::uint64_t seed);

// --- optimization ------------------------------------------------------------

/// Small dense instance of the shading-aware independent-set objective.
struct Instance {
  int n = 0;
  int k = 0;
  std::vector<double> cost;                          // C_i
  std::vector<double> tariff;                        // T(k)
  std::vector<std::vector<double>> gen;              // G_i(k)
  std::vector<std::vector<double>> diag;             // S_ii(k)
  std::vector<std::vector<std::vector<double>>> s;   // S_ij(k), s[i][j][k], zero diagonal
  std::vector<std::pair<int, int>> edges;
};

Instance random_instance(int n, int k, double edge_prob, double shade_prob, std::mt19937_64& rng);

/// Objective value evaluated term by term.
double evaluate(const Instance& inst, const std::vector<int>& x);

struct Enumeration {
  double best = 0.0;
  std::vector<int> x;
};

/// Exhaustive enumeration of all independent sets (n <= 20).
Enumeration enumerate_independent_sets(const Instance& inst);

// --- graphs ------------------------------------------------------------------

/// Newman modularity of a node labelling on an unweighted graph, by direct
/// summation over all node pairs.
double modularity(int n, const std::vector<std::pair<int, int>>& edges, const std::vector<int>& label);

// --- raster --------------------------------------------------------------------

/// Direct (dilation - erosion) per band at one pixel.
using Grid = std::vector<std::vector<double>>;
Grid direct_gradient(const std::vector<Grid>& bands, int radius);

/// Fills pixels not reachable from the border through background pixels
/// (8-connected background).
std::vector<std::vector<int>> border_fill(const std::vector<std::vector<int>>& mask);

/// Black top-hat averaged over 0/45/90/135 degree lines of the given length,
/// with edge pixels replicated beyond the border.
Grid black_tophat_lines(const Grid& image, int length);

// --- documents -----------------------------------------------------------------

/// Minimal XML well-formedness check: balanced tags, quoted attributes,
/// a single root element.
bool xml_well_formed(const std::string& text, std::string* why = nullptr);

}  // namespace heliopack::oracle
