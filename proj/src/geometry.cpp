#include "fdmimo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fdmimo/error.hpp"

namespace fdmimo {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAngleSlack = 1e-12;

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidParameter, std::string(name) + " must be positive, got " +
                                                 std::to_string(v));
  }
}

}  // namespace

CellLayout build_hex_layout(double r_cell, double h_bs) {
  require_positive(r_cell, "r_cell");
  require_positive(h_bs, "h_bs");
  CellLayout layout;
  layout.r_cell = r_cell;
  layout.h_bs = h_bs;
  layout.bs_positions.push_back({0.0, 0.0});
  const double isd = std::sqrt(3.0) * r_cell;
  for (int i = 0; i < 6; ++i) {
    const double a = i * kPi / 3.0;
    layout.bs_positions.push_back({isd * std::cos(a), isd * std::sin(a)});
  }
  return layout;
}

CellLayout build_single_cell_layout(double r_cell, double h_bs) {
  require_positive(r_cell, "r_cell");
  require_positive(h_bs, "h_bs");
  return CellLayout{{{0.0, 0.0}}, r_cell, h_bs};
}

bool inside_hexagon(Vec2 p, Vec2 center, double r_cell) {
  const double dx = p.x - center.x;
  const double dy = p.y - center.y;
  const double apothem = 0.5 * std::sqrt(3.0) * r_cell;
  for (int i = 0; i < 3; ++i) {
    const double a = i * kPi / 3.0;
    if (std::abs(dx * std::cos(a) + dy * std::sin(a)) > apothem) return false;
  }
  return true;
}

std::vector<UserPlacement> drop_users_in_cell(const CellLayout& layout, std::size_t cell,
                                              std::size_t count, double d_min, Rng& rng) {
  if (!(d_min >= 0.0 && d_min < layout.r_cell)) {
    throw Error(ErrorCode::InvalidParameter, "d_min must lie in [0, r_cell)");
  }
  const Vec2 c = layout.bs_positions.at(cell);
  const double r = layout.r_cell;
  const double half_width = 0.5 * std::sqrt(3.0) * r;
  std::vector<UserPlacement> out;
  out.reserve(count);
  while (out.size() < count) {
    const Vec2 p{c.x + uniform(rng, -half_width, half_width), c.y + uniform(rng, -r, r)};
    if (!inside_hexagon(p, c, r)) continue;
    if (std::hypot(p.x - c.x, p.y - c.y) < d_min) continue;
    out.push_back({cell, p});
  }
  return out;
}

std::vector<UserPlacement> drop_users(const CellLayout& layout, std::size_t pool_per_cell,
                                      double d_min, Rng& rng) {
  if (pool_per_cell < 1) throw Error(ErrorCode::InvalidParameter, "pool_per_cell must be >= 1");
  std::vector<UserPlacement> out;
  out.reserve(layout.num_cells() * pool_per_cell);
  for (std::size_t c = 0; c < layout.num_cells(); ++c) {
    auto cell_users = drop_users_in_cell(layout, c, pool_per_cell, d_min, rng);
    out.insert(out.end(), cell_users.begin(), cell_users.end());
  }
  return out;
}

LinkGeometry link_geometry(Vec2 bs, double h_bs, Vec2 user, double pl_exponent, double d_ref) {
  require_positive(h_bs, "h_bs");
  require_positive(d_ref, "d_ref");
  const double dx = user.x - bs.x;
  const double dy = user.y - bs.y;
  const double d = std::hypot(dx, dy);
  if (!(d > 0.0)) {
    throw Error(ErrorCode::DegenerateGeometry, "user at zero horizontal distance from BS");
  }
  LinkGeometry g;
  g.d = d;
  g.phi = std::atan2(dy, dx);
  if (g.phi <= -kPi) g.phi = kPi;
  g.theta = 0.5 * kPi + std::atan(h_bs / d);
  const double d3 = std::hypot(d, h_bs);
  g.rho = std::pow(std::max(d3, d_ref) / d_ref, -pl_exponent);
  return g;
}

double d_max(double h_bs, double r_cell, double delta_e) {
  require_positive(h_bs, "h_bs");
  require_positive(r_cell, "r_cell");
  if (!(delta_e >= 0.0)) throw Error(ErrorCode::InvalidParameter, "delta_e must be >= 0");
  const double edge = std::atan(r_cell / h_bs);
  if (!(2.0 * delta_e < edge)) {
    throw Error(ErrorCode::InvalidParameter,
                "2*delta_e must be below atan(r_cell/h_bs) = " + std::to_string(edge));
  }
  if (delta_e == 0.0) return r_cell;
  return h_bs * std::tan(edge - 2.0 * delta_e);
}

double ring_spread(double ring_radius, double d) {
  if (!(ring_radius >= 0.0)) throw Error(ErrorCode::InvalidParameter, "ring_radius must be >= 0");
  require_positive(d, "d");
  return std::atan(ring_radius / d);
}

double azimuth_gap(double phi_a, double phi_b) {
  double gap = std::fmod(std::abs(phi_a - phi_b), 2.0 * kPi);
  return std::min(gap, 2.0 * kPi - gap);
}

double folded_azimuth(double phi) { return std::asin(std::clamp(std::sin(phi), -1.0, 1.0)); }

bool angular_separation_ok(const LinkGeometry& a, const LinkGeometry& b, double delta_a,
                           double delta_e) {
  if (azimuth_gap(a.phi, b.phi) + kAngleSlack >= 2.0 * delta_a) return true;
  return std::abs(a.theta - b.theta) + kAngleSlack >= 2.0 * delta_e;
}

}  // namespace fdmimo
