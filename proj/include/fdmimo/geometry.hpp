#pragma once

#include <cstddef>
#include <vector>

#include "fdmimo/random.hpp"

namespace fdmimo {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Hexagonal multi-cell layout. Position 0 is the measured (center) cell.
struct CellLayout {
  std::vector<Vec2> bs_positions;
  double r_cell = 0.0;  // hexagon circumradius [m]
  double h_bs = 0.0;    // BS antenna height [m]

  std::size_t num_cells() const { return bs_positions.size(); }
};

struct UserPlacement {
  std::size_t cell_index = 0;
  Vec2 xy;
};

/// Geometry of one BS-user link. `theta` is measured from the vertical array
/// axis, so a user below the BS has theta in (pi/2, pi).
struct LinkGeometry {
  double d = 0.0;      // horizontal distance [m]
  double phi = 0.0;    // azimuth [rad], (-pi, pi]
  double theta = 0.0;  // elevation [rad]
  double rho = 0.0;    // linear path gain
};

/// Seven sites: the origin plus six neighbours at sqrt(3) r_cell.
CellLayout build_hex_layout(double r_cell, double h_bs);

/// Layout with only the center cell (no interferers).
CellLayout build_single_cell_layout(double r_cell, double h_bs);

/// True if `p` lies inside the hexagon of circumradius `r_cell` centred at
/// `center` (edges normal to 0, 60, 120 degrees).
bool inside_hexagon(Vec2 p, Vec2 center, double r_cell);

/// Uniform rejection sampling inside every hexagon, excluding the disc of
/// radius d_min around each BS. Returns pool_per_cell users per cell, grouped
/// by cell in layout order.
std::vector<UserPlacement> drop_users(const CellLayout& layout, std::size_t pool_per_cell,
                                      double d_min, Rng& rng);

/// Same as drop_users for a single cell.
std::vector<UserPlacement> drop_users_in_cell(const CellLayout& layout, std::size_t cell,
                                              std::size_t count, double d_min, Rng& rng);

/// Path gain rho = (max(d3, d_ref) / d_ref)^(-exponent) with d3 the 3D
/// distance. Throws DegenerateGeometry if the user sits under the BS.
LinkGeometry link_geometry(Vec2 bs, double h_bs, Vec2 user, double pl_exponent, double d_ref);

/// Largest distance for which the layer-1 filter provably leaves the user's
/// own elevation subspace intact:
///   h_bs * tan(atan(r_cell / h_bs) - 2 delta_e).
/// Throws InvalidParameter unless 2 delta_e < atan(r_cell / h_bs).
double d_max(double h_bs, double r_cell, double delta_e);

/// Azimuth spread seen from the BS for a scattering ring of the given radius.
double ring_spread(double ring_radius, double d);

/// Circular distance between two azimuths, in [0, pi].
double azimuth_gap(double phi_a, double phi_b);

/// Azimuth as resolved by a planar array with broadside along +x: angles
/// behind the array fold onto their mirror image (asin(sin(phi))).
double folded_azimuth(double phi);

/// True iff the azimuth gap is at least 2 delta_a or the elevation gap is
/// at least 2 delta_e.
bool angular_separation_ok(const LinkGeometry& a, const LinkGeometry& b, double delta_a,
                           double delta_e);

}  // namespace fdmimo
