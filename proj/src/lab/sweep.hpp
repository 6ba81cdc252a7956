#pragma once

#include <functional>
#include <vector>

#include "mcflab/mesh.hpp"

namespace mcflab::detail {

/// Circle of `count` vertices at angles offset + 2*pi*i/count in the plane
/// spanned by (e1, e2); radius is perturbed by amp * cos(mode * angle).
struct Ring {
  Vec3 center;
  Vec3 e1, e2;
  double radius = 1.0;
  int count = 3;
  double offset = 0.0;
  double amp = 0.0;
  int mode = 0;
};

/// Rings ordered along e1 x e2. Consecutive rings are stitched greedily by
/// angle; optional poles close the ends.
struct RingStack {
  std::vector<Ring> rings;
  bool closed = false;
  bool start_pole = false, end_pole = false;
  Vec3 start_pole_pos = Vec3::Zero(), end_pole_pos = Vec3::Zero();
};

TriMesh build_ring_stack(const RingStack& stack);

struct TubeSpec {
  std::function<Vec3(double)> curve;  // u in [0,1]
  bool closed = false;
  double radius = 1.0;
  int n_circ = 24;
  int n_axial = 0;  // 0: near-equilateral spacing
  double amp = 0.0;
  int mode = 0;
};

/// Tube of constant radius swept along the curve with parallel-transported
/// frames (holonomy spread evenly on closed curves); open tubes get
/// hemispherical caps.
TriMesh sweep_tube(const TubeSpec& spec);

/// Arclength of the curve on a dense sample.
double curve_length(const std::function<Vec3(double)>& curve, int samples = 8192);

}  // namespace mcflab::detail
