// Direct simulation of the Schroedinger map T_t = T ^ T_xx on a uniform
// grid, started from (mollified) polygonal lines, with the curve chi
// recovered from T and the motion of the point x = 0.
#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "riemannlab/frame_evolution.hpp"
#include "riemannlab/theta_sums.hpp"

namespace riemannlab {

// Corners at x = j * n^{-mu} for |j| <= floor(n^nu), all with angle theta.
struct PolygonalLineSpec {
  long long n = 8;
  double nu = 1.0;
  double theta = kPi - 1.0 / 8.0;
  RationalTorsion torsion;
  double mu = 0.0;
  double L = 0.0;             // half extent in edge units, 0 picks floor(n^nu) + 8
  int cells_per_edge = 64;

  long long corners() const;  // floor(n^nu)
  double edge() const;        // n^{-mu}
  double total_turning() const { return (kPi - theta) * double(2 * corners() + 1); }
};

struct GridCurve {
  double x0 = 0.0;   // first node
  double h = 0.0;
  bool periodic = false;
  Eigen::Index anchor = 0;      // node tracked by the anchor ODE (x = 0)
  Eigen::Matrix3Xd chi, T;      // one column per node
  std::vector<double> corners;  // corner positions, for mollify

  Eigen::Index size() const { return T.cols(); }
  double x(Eigen::Index i) const { return x0 + double(i) * h; }
};

// Unit-speed polygonal line: at each corner the frame turns by pi - theta
// about the current binormal, then twists by omega_0 about the new tangent.
// chi(0) = 0, one-sided tangents (sin theta/2, +-cos theta/2, 0) at x = 0.
// Nodes on a corner take the outgoing tangent; chi is exact at every node.
GridCurve build_polygonal_line(const PolygonalLineSpec& spec);

// Great-circle interpolation of T over w cells centred on every corner,
// then chi re-integrated (trapezoid) and pinned to the input curve on both
// sides of the window nearest the anchor. The anchor moves off the vertex
// by the corner cut, about w h (pi - theta)/8; points beyond a smoothed
// turn slip along it by O(w h (pi - theta)^2).
GridCurve mollify(const GridCurve& curve, int w);

// Periodic circle of radius r with N nodes, anchor at node 0.
GridCurve make_circle(double r, int N);

// Total turning of a grid tangent field, sum of the angles between
// consecutive tangents.
double discrete_turning(const GridCurve& curve);

// Reconstructs chi by the trapezoid rule from chi_anchor.
void integrate_chi(GridCurve& curve, const Vec3& chi_anchor);

class BlowUp : public std::runtime_error {
 public:
  BlowUp(const std::string& what, double t) : std::runtime_error(what), t_reached(t) {}
  double t_reached;
};

struct MapRun {
  std::vector<double> t;
  std::vector<Vec3> chi0;          // chi(t, 0) at every output time
  std::vector<GridCurve> curves;   // full curves, when requested
  double max_unit_defect = 0.0;    // max ||T| - 1| before the end-of-step projection
  double far_field_drift = 0.0;    // max |T(t) - T(0)| at the second node from each end
};

// Centred second differences, classical RK4 with projection of T onto the
// sphere after every stage, clamped ends (or periodic). chi(t, 0) follows
// chi_t = T ^ T_x at the anchor. Output every output_every steps and at
// the last step. Requires dt <= h^2/4.
MapRun run_schrodinger_map(const GridCurve& curve, double dt, long long steps, long long output_every = 1,
                           bool keep_curves = false);

// Same scheme, stepping to each of the increasing times exactly with the
// largest uniform dt <= dt_max on every interval.
MapRun run_schrodinger_map_to(const GridCurve& curve, double dt_max, const std::vector<double>& times,
                              bool keep_curves = false);

struct FrameComparison {
  std::vector<double> t;
  std::vector<Vec3> pde, frame;  // chi(t, 0) in the unscaled frame of the polygon with unit edges
  double diameter = 0.0;
  double distance = 0.0;         // max_t |pde - frame| / diameter
  double h = 0.0;                // grid spacing in edge units
};

// Runs the PDE from the mollified polygon (w cells, spacing 1/cells_per_edge
// in edge units) and the frame evolution for alpha = build_alpha(n, nu,
// n (pi - theta), torsion), and compares chi(t, 0). A rescaled line
// (mu > 0) is run at times t n^{-2 mu} and compared through n^mu chi.
FrameComparison compare_with_frame(const PolygonalLineSpec& spec, const std::vector<double>& t_grid,
                                   int w = 4, const FrameOptions& frame_opt = {});

}  // namespace riemannlab
