#include <doctest.h>

#include <cmath>

#include "tresca/errors.hpp"
#include "tresca/grid.hpp"

using namespace tresca;

TEST_CASE("grid coordinates and validation") {
  const Grid g = build_grid(5, 4, 0.25, Vec2(-1.0, 2.0));
  CHECK(g.base_count() == 20);
  CHECK(g.coord(3, 2).x() == doctest::Approx(-0.25));
  CHECK(g.coord(3, 2).y() == doctest::Approx(2.5));
  CHECK(g.col(g.id(3, 2)) == 3);
  CHECK(g.row(g.id(3, 2)) == 2);
  CHECK_THROWS_AS(build_grid(3, 8, 0.1, Vec2::Zero()), InvalidArgument);
  CHECK_THROWS_AS(build_grid(8, 8, 0.0, Vec2::Zero()), InvalidArgument);
  CHECK_THROWS_AS(build_grid(8, 8, -1.0, Vec2::Zero()), InvalidArgument);
}

TEST_CASE("fault embedding duplicates nodes") {
  const Grid g = build_grid(10, 10, 0.1, Vec2::Zero());
  const FaultTopology f = embed_fault(g, 5, 2, 6);
  CHECK(f.size() == 5);
  CHECK(f.normal.dot(f.tangent) == 0.0);
  CHECK(f.normal.norm() == 1.0);
  CHECK(f.tangent.norm() == 1.0);
  const Mesh mesh(g, f);
  CHECK(mesh.node_count() == 100 + 5);
  for (Index i = 0; i < f.size(); ++i) {
    const Index p = f.plus_ids[std::size_t(i)], m = f.minus_ids[std::size_t(i)];
    CHECK(p != m);
    CHECK(mesh.base_of(m) == p);
    CHECK(mesh.coord(m) == mesh.coord(p));
  }

  // elements above the fault use the plus copy, below it the minus copy
  const auto above = mesh.element_nodes(3, 5);
  const auto below = mesh.element_nodes(3, 4);
  CHECK(above[0] == g.id(3, 5));
  CHECK(below[3] == f.minus_ids[1]);
  CHECK(below[2] == f.minus_ids[2]);
  // an element past the fault tip shares the lattice node
  const auto tip = mesh.element_nodes(7, 4);
  CHECK(tip[3] == g.id(7, 5));

  CHECK_THROWS_AS(embed_fault(g, 0, 2, 6), GeometryViolation);
  CHECK_THROWS_AS(embed_fault(g, 9, 2, 6), GeometryViolation);
  CHECK_THROWS_AS(embed_fault(g, 5, 0, 6), GeometryViolation);
  CHECK_THROWS_AS(embed_fault(g, 5, 2, 9), GeometryViolation);
  CHECK_THROWS_AS(embed_fault(g, 5, 6, 6), InvalidArgument);
}

TEST_CASE("region masks satisfy their invariants") {
  const Grid g = build_grid(41, 41, 0.025, Vec2::Zero());
  const FaultTopology f = embed_fault(g, 20, 10, 30);
  const RegionSet r = build_regions(g, &f, 0.1, 0.05, Rect{0.1, 0.9, 0.7, 0.85});
  CHECK(check_region_invariants(g, &f, r).empty());

  for (Index id = 0; id < g.base_count(); ++id) {
    const double d = distance_to_fault(g, f, g.coord(id));
    if (std::abs(d - 0.1) > 1e-9)
      CHECK(r.d_extension[id] == (d < 0.1));
    CHECK(r.n_complement[id] != r.d_extension[id]);
    CHECK(!(r.u_patch[id] && r.d_extension[id]));
    if (r.n_delta_collar[id])
      CHECK(r.n_complement[id]);
  }
  for (Index id : f.plus_ids)
    CHECK(r.d_extension[id]);
  CHECK(r.u_patch.count() > 0);
  CHECK(r.n_delta_collar.count() < r.n_complement.count());
}

TEST_CASE("a patch reaching the fault collar is rejected") {
  const Grid g = build_grid(41, 41, 0.025, Vec2::Zero());
  const FaultTopology f = embed_fault(g, 20, 10, 30);
  CHECK_THROWS_AS(build_regions(g, &f, 0.1, 0.05, Rect{0.1, 0.9, 0.55, 0.8}), GeometryViolation);
  CHECK_THROWS_AS(build_regions(g, &f, 0.1, 0.05, Rect{0.0, 0.9, 0.7, 0.8}), GeometryViolation);
  // collar that would touch the outer boundary
  CHECK_THROWS_AS(build_regions(g, &f, 0.5, 0.05, Rect{0.1, 0.2, 0.96, 0.97}), GeometryViolation);
  CHECK_THROWS_AS(build_regions(g, &f, 0.0, 0.05, Rect{0.1, 0.9, 0.7, 0.8}), InvalidArgument);
}

TEST_CASE("two-rectangle patch is the union") {
  const Grid g = build_grid(41, 41, 0.025, Vec2::Zero());
  const FaultTopology f = embed_fault(g, 20, 10, 30);
  const Rect top{0.1, 0.9, 0.7, 0.8}, bottom{0.1, 0.9, 0.2, 0.3};
  const RegionSet both = build_regions(g, &f, 0.1, 0.05, std::vector<Rect>{top, bottom});
  const RegionSet a = build_regions(g, &f, 0.1, 0.05, top);
  const RegionSet b = build_regions(g, &f, 0.1, 0.05, bottom);
  CHECK(both.u_patch.count() == a.u_patch.count() + b.u_patch.count());
}
