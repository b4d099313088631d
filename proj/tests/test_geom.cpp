#include "edmp/geom.hpp"

#include "support.hpp"

#include <numbers>

using namespace edmp::geom;
using testing::voxel_overlap;

namespace {

Extents box(Vec3 lo, Vec3 hi) { return {lo, hi}; }

Extents random_box(edmp::rng::Stream& r, double lo_size, double hi_size) {
  Vec3 c{r.uniform(-1, 1), r.uniform(-1, 1), r.uniform(-1, 1)};
  Vec3 h{r.uniform(lo_size, hi_size), r.uniform(lo_size, hi_size), r.uniform(lo_size, hi_size)};
  return {c - h, c + h};
}

}  // namespace

TEST_CASE("vertices of an identity cube are the signed half extents") {
  Cuboid c{Pose{}, Vec3::Constant(0.5)};
  Vertices v = vertices(c);
  for (int i = 0; i < 8; ++i) CHECK((v[i] - 0.5 * vertex_sign(i)).norm() == 0.0);

  c.pose = Pose::from_xyz({1, 0, 0});
  Vertices w = vertices(c);
  for (int i = 0; i < 8; ++i) CHECK((w[i] - v[i] - Vec3(1, 0, 0)).norm() == 0.0);
}

TEST_CASE("vertices under a quarter turn about z") {
  Cuboid c{Pose::from_axis_angle(Vec3::UnitZ(), std::numbers::pi / 2), {1.0, 0.5, 0.25}};
  Vertices v = vertices(c);
  for (int i = 0; i < 8; ++i) {
    Vec3 s = vertex_sign(i);
    // (x, y) -> (-y, x)
    Vec3 expect{-0.5 * s.y(), 1.0 * s.x(), 0.25 * s.z()};
    CHECK((v[i] - expect).norm() < 1e-12);
  }
}

TEST_CASE("extents") {
  Extents e = extents(Cuboid{Pose{}, Vec3::Constant(0.5)});
  CHECK(e.lo == Vec3::Constant(-0.5));
  CHECK(e.hi == Vec3::Constant(0.5));

  Extents r = extents(Cuboid{Pose::from_axis_angle(Vec3::UnitZ(), std::numbers::pi / 4), Vec3::Constant(0.5)});
  CHECK(r.lo.x() == doctest::Approx(-std::sqrt(2.0) / 2).epsilon(1e-12));
  CHECK(r.hi.y() == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-12));
  CHECK(r.lo.z() == doctest::Approx(-0.5));

  Vertices same;
  same.fill(Vec3(0.3, -0.2, 0.1));
  Extents d = extents(same);
  CHECK(d.lo == d.hi);
  CHECK(d.lo == Vec3(0.3, -0.2, 0.1));
}

TEST_CASE("supported extents name the vertex attaining each bound") {
  edmp::rng::Stream r(3, edmp::rng::Purpose::test);
  for (int n = 0; n < 20; ++n) {
    Cuboid c{Pose::from_xyz_rpy({r.normal(), r.normal(), r.normal()}, {r.normal(), r.normal(), r.normal()}),
             {r.uniform(0.1, 1), r.uniform(0.1, 1), r.uniform(0.1, 1)}};
    Vertices v = vertices(c);
    SupportedExtents s = supported_extents(v);
    for (int d = 0; d < 3; ++d) {
      CHECK(v[s.lo_vertex[d]][d] == s.box.lo[d]);
      CHECK(v[s.hi_vertex[d]][d] == s.box.hi[d]);
    }
  }
}

TEST_CASE("overlap volume examples") {
  const Extents unit = box({0, 0, 0}, {1, 1, 1});
  CHECK(overlap_volume(unit, unit) == 1.0);
  CHECK(overlap_volume(unit, box({2, 0, 0}, {3, 1, 1})) == 0.0);
  const Extents b = box({0.5, -0.2, 0.3}, {1.5, 0.8, 0.9});
  CHECK(overlap_volume(unit, b) == doctest::Approx(0.24).epsilon(1e-12));
  CHECK(voxel_overlap(unit, b, 1e-2) == doctest::Approx(0.24).epsilon(0.01));
  // Boxes that are disjoint on one axis only still report zero.
  CHECK(overlap_volume(unit, box({0.2, 0.2, 1.5}, {0.8, 0.8, 2.0})) == 0.0);
  // Touching faces have zero volume.
  CHECK(overlap_volume(unit, box({1, 0, 0}, {2, 1, 1})) == 0.0);
}

TEST_CASE("overlap volume is symmetric and matches the voxel oracle") {
  edmp::rng::Stream r(11, edmp::rng::Purpose::test);
  for (int n = 0; n < 10; ++n) {
    Extents a = random_box(r, 0.05, 0.12);
    Vec3 shift{r.uniform(-0.6, 0.6), r.uniform(-0.6, 0.6), r.uniform(-0.6, 0.6)};
    Extents b{a.lo + shift.cwiseProduct(a.size()), a.hi + shift.cwiseProduct(a.size())};
    const double v = overlap_volume(a, b);
    CHECK(v == overlap_volume(b, a));
    CHECK(v == doctest::Approx(voxel_overlap(a, b)).epsilon(0.01));
  }
}

TEST_CASE("overlap gradient matches finite differences") {
  edmp::rng::Stream r(5, edmp::rng::Purpose::test);
  int checked = 0;
  for (int n = 0; n < 50; ++n) {
    Extents a = random_box(r, 0.2, 0.6);
    Extents b = random_box(r, 0.2, 0.6);
    OverlapGradient g = overlap_volume_gradient(a, b);
    CHECK(g.volume == overlap_volume(a, b));
    if (g.volume == 0.0) {
      CHECK(g.d_a_lo.isZero(0.0));
      CHECK(g.d_b_hi.isZero(0.0));
      continue;
    }
    ++checked;
    const double h = 1e-7;
    for (int d = 0; d < 3; ++d) {
      Extents p = a, m = a;
      p.lo[d] += h;
      m.lo[d] -= h;
      CHECK(g.d_a_lo[d] == doctest::Approx((overlap_volume(p, b) - overlap_volume(m, b)) / (2 * h)).epsilon(1e-6));
      p = a;
      m = a;
      p.hi[d] += h;
      m.hi[d] -= h;
      CHECK(g.d_a_hi[d] == doctest::Approx((overlap_volume(p, b) - overlap_volume(m, b)) / (2 * h)).epsilon(1e-6));
      Extents bp = b, bm = b;
      bp.lo[d] += h;
      bm.lo[d] -= h;
      CHECK(g.d_b_lo[d] == doctest::Approx((overlap_volume(a, bp) - overlap_volume(a, bm)) / (2 * h)).epsilon(1e-6));
    }
  }
  CHECK(checked > 10);
}

TEST_CASE("vertex overlap gradient matches finite differences") {
  edmp::rng::Stream r(6, edmp::rng::Purpose::test);
  for (int n = 0; n < 10; ++n) {
    Cuboid ca{Pose::from_xyz_rpy({0, 0, 0}, {r.normal(), r.normal(), r.normal()}), {0.5, 0.3, 0.2}};
    Cuboid cb{Pose::from_xyz_rpy({r.uniform(-0.3, 0.3), r.uniform(-0.3, 0.3), 0.1}, {r.normal(), 0, 0}),
              {0.4, 0.4, 0.3}};
    Vertices va = vertices(ca), vb = vertices(cb);
    VertexOverlapGradient g = overlap_volume_vertex_gradient(va, vb);
    REQUIRE(g.volume > 0.0);
    const double h = 1e-7;
    for (int i = 0; i < 8; ++i)
      for (int d = 0; d < 3; ++d) {
        Vertices p = va, m = va;
        p[i][d] += h;
        m[i][d] -= h;
        const double fd = (overlap_volume(extents(p), extents(vb)) - overlap_volume(extents(m), extents(vb))) / (2 * h);
        CHECK(g.d_a[i][d] == doctest::Approx(fd).epsilon(1e-5).scale(1e-3));
      }
  }
}

TEST_CASE("swept extents") {
  const Extents a = box({0, 0, 0}, {1, 1, 1});
  Extents s = swept_extents(a, a);
  CHECK(s.lo == a.lo);
  CHECK(s.hi == a.hi);
  s = swept_extents(a, box({1, 0, 0}, {2, 1, 1}));
  CHECK(s.lo == Vec3(0, 0, 0));
  CHECK(s.hi == Vec3(2, 1, 1));
  const Extents outer = box({-1, -1, -1}, {2, 2, 2});
  s = swept_extents(a, outer);
  CHECK(s.lo == outer.lo);
  CHECK(s.hi == outer.hi);
}

TEST_CASE("inflate") {
  const Cuboid c{Pose::from_xyz({1, 2, 3}), Vec3::Constant(0.5)};
  Cuboid same = inflate(c, 0.0, Expansion::none, 10, 64);
  CHECK(same.half_extents == c.half_extents);
  CHECK(same.pose.translation == c.pose.translation);
  CHECK(inflate(c, 0.1, Expansion::none, 1, 64).half_extents.isApprox(Vec3::Constant(0.6)));

  const Cuboid slab{Pose{}, {1.0, 0.02, 0.5}};
  Vec3 t3 = inflate(slab, 0.0, Expansion::type3, 5, 64).half_extents;
  CHECK(t3.y() == doctest::Approx(0.12));
  CHECK(t3.x() == 1.0);
  CHECK(t3.z() == 0.5);

  // Type I raises thin axes to a quarter of the largest.
  Vec3 t1 = inflate(slab, 0.0, Expansion::type1, 5, 64).half_extents;
  CHECK(t1.y() == doctest::Approx(0.25));
  CHECK(t1.z() == 0.5);
  // Type II interpolates from no widening (t -> 0) to Type I (t = T).
  CHECK(inflate(slab, 0.0, Expansion::type2, 64, 64).half_extents.y() == doctest::Approx(0.25));
  CHECK(inflate(slab, 0.0, Expansion::type2, 32, 64).half_extents.y() == doctest::Approx(0.02 + 0.23 / 2));
  // Clearance applies before expansion.
  CHECK(inflate(slab, 0.1, Expansion::type3, 5, 64).half_extents.y() == doctest::Approx(0.22));
}

TEST_CASE("pose composition and inverse") {
  edmp::rng::Stream r(9, edmp::rng::Purpose::test);
  Pose a = Pose::from_xyz_rpy({r.normal(), r.normal(), r.normal()}, {r.normal(), r.normal(), r.normal()});
  Pose b = Pose::from_xyz_rpy({r.normal(), r.normal(), r.normal()}, {r.normal(), r.normal(), r.normal()});
  Vec3 p{0.3, -0.7, 1.1};
  CHECK(((a * b).apply(p) - a.apply(b.apply(p))).norm() < 1e-12);
  CHECK((a.inverse().apply(a.apply(p)) - p).norm() < 1e-12);
  CHECK(is_rotation(a.rotation));
  Vec3 rpy{0.3, -0.4, 1.2};
  CHECK((Pose::from_xyz_rpy(Vec3::Zero(), rpy).rpy() - rpy).norm() < 1e-12);
}
