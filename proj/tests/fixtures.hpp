#pragma once

#include <string>

#include "strana/graph.hpp"
#include "strana/model_io.hpp"

namespace strana_test {

/// Four constraints over three unknowns with a cycle; the ranking algorithm
/// still finds a complete matching on the variables.
inline strana::BipartiteGraph cyclic_rank_graph() {
  using strana::GraphEdge;
  std::vector<GraphEdge> edges = {
      {0, 0, 1, true, strana::DynamicRole::none},  // c1 -- x1
      {1, 0, 1, true, strana::DynamicRole::none},  // c2 -- x1
      {1, 1, 1, true, strana::DynamicRole::none},  // c2 -- x2
      {1, 2, 1, true, strana::DynamicRole::none},  // c2 -- x3
      {2, 2, 1, true, strana::DynamicRole::none},  // c3 -- x3
      {3, 1, 1, true, strana::DynamicRole::none},  // c4 -- x2
      {3, 2, 1, true, strana::DynamicRole::none},  // c4 -- x3
  };
  return strana::BipartiteGraph::build(4, 3, {false, false, false}, std::move(edges));
}

/// GPS position chain: a differentiation constraint plus position and
/// velocity measurements. The d1 constraint ends up as the elimination-phase
/// residual with a two-edge acyclic evaluation.
inline const char* kGpsPositionModel = R"(# GPS northwards-position monitor
structural-model v1
variable n
variable ndot
variable n_m known noise=0.5
variable ndot_m known noise=0.8
constraint d1 kind=differential
constraint s13 kind=linear faultable
constraint s16 kind=linear faultable
edge d1 ndot role=derivative
edge d1 n role=integral
edge s13 n weight=1
edge s13 n_m weight=1
edge s16 ndot weight=1
edge s16 ndot_m weight=1
)";

inline strana::StructuralModel gps_position_model() {
  return strana::parse_model(kGpsPositionModel);
}

/// Rigid-body / accelerometer core: eight equations over seven unknowns
/// (redundancy one). Solving it leaves one simultaneous block containing the
/// integration constraints, which needs a differential-equation solver.
inline const char* kBodyAccelModel = R"(# body-frame kinematics with accelerometer measurements
structural-model v1
variable u
variable v
variable udot
variable vdot
variable F_bx
variable F_by
variable F_bz
variable p known
variable q known
variable r known
variable w known
variable wdot known
variable m known
variable a_mx known
variable a_my known
variable a_mz known
variable theta known
variable phi known
constraint d10 kind=differential
constraint d11 kind=differential
constraint k12 kind=linear
constraint k13 kind=linear
constraint k14 kind=nonlinear
constraint s1 kind=linear faultable
constraint s2 kind=linear faultable
constraint s3 kind=linear faultable
edge d10 u role=integral
edge d10 udot role=derivative
edge d11 v role=integral
edge d11 vdot role=derivative
edge k12 udot ops=mul:2,div:1,add:2
edge k12 v ops=mul:2,div:2,add:2
edge k12 F_bx ops=mul:3,add:2
edge k12 q weight=30 unsolvable
edge k12 r weight=30
edge k12 w weight=30
edge k12 m weight=30
edge k13 vdot ops=mul:2,div:1,add:2
edge k13 u ops=mul:2,div:2,add:2
edge k13 F_by ops=mul:3,add:2
edge k13 p weight=30
edge k13 r weight=30
edge k13 w weight=30
edge k13 m weight=30
edge k14 u ops=mul:2,div:2,add:2
edge k14 v ops=mul:2,div:2,add:2
edge k14 F_bz ops=mul:3,add:2
edge k14 p weight=30 unsolvable
edge k14 q weight=30 unsolvable
edge k14 wdot weight=30
edge k14 m weight=30
edge s1 F_bx ops=mul:1,trig:1,add:1
edge s1 m weight=30
edge s1 a_mx weight=5
edge s1 theta weight=105
edge s2 F_by ops=mul:1,trig:2,add:1
edge s2 m weight=30
edge s2 a_my weight=5
edge s2 phi weight=105
edge s2 theta weight=105
edge s3 F_bz ops=mul:1,trig:2,add:1
edge s3 m weight=30
edge s3 a_mz weight=5
edge s3 phi weight=105
edge s3 theta weight=105
)";

inline strana::StructuralModel body_accel_model() {
  return strana::parse_model(kBodyAccelModel);
}

}  // namespace strana_test
