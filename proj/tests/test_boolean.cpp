#include "magneto/boolean.hpp"
#include "magneto/error.hpp"
#include "magneto/mesh_ops.hpp"
#include "magneto/primitives.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace magneto;

namespace {

TriMesh cube(const Vec3 &lo, double side, int divisions = 1)
{
    return primitives::box(lo, lo + Vec3::Constant(side), divisions);
}

} // namespace

TEST(Boolean, DifferenceWithFarAwayCubeIsIdentity)
{
    const TriMesh a = cube(Vec3::Zero(), 10.0);
    const TriMesh out = boolean(a, cube(Vec3(50, 0, 0), 10.0), BooleanOp::Difference);
    EXPECT_EQ(out.vertices(), a.vertices());
    EXPECT_EQ(out.faces(), a.faces());
}

TEST(Boolean, NestedCubeDifference)
{
    const TriMesh out = boolean(cube(Vec3::Zero(), 10.0), cube(Vec3(3, 3, 3), 4.0), BooleanOp::Difference);
    EXPECT_TRUE(out.is_closed());
    EXPECT_NEAR(volume(out), 936.0, 0.005 * 936.0);
}

// Frozen from the voxel CSG oracle at 0.1 mm: the B-cube offset is chosen so
// no faces are coplanar; see OracleFreeze.HalfOverlapDifference.
constexpr double kHalfOverlapDifferenceVoxel = 681.25;

TriMesh half_overlap_b() { return cube(Vec3(5.0, 2.5, 1.5), 10.0); }

TEST(Boolean, HalfOverlappingDifferenceMatchesVoxelOracle)
{
    const TriMesh a = cube(Vec3::Zero(), 10.0), b = half_overlap_b();
    const TriMesh out = boolean(a, b, BooleanOp::Difference);
    EXPECT_TRUE(out.is_closed());
    EXPECT_NEAR(volume(out), kHalfOverlapDifferenceVoxel, 0.01 * kHalfOverlapDifferenceVoxel);
    const TriMesh both = boolean(a, b, BooleanOp::Intersection);
    EXPECT_NEAR(volume(out), volume(a) - volume(both), 0.005 * volume(out));
}

TEST(OracleFreeze, HalfOverlapDifference)
{
    const TriMesh a = cube(Vec3::Zero(), 10.0), b = half_overlap_b();
    Aabb region = a.bounds();
    region.extend(b.bounds());
    region = region.inflated(0.5);
    const auto va = oracle::voxelize(a, region, 0.1), vb = oracle::voxelize(b, region, 0.1);
    EXPECT_NEAR(oracle::combine(va, vb, oracle::VoxelOp::Difference).volume(), kHalfOverlapDifferenceVoxel, 1e-6);
}

TEST(Boolean, CoplanarFacesAreResolvedByPerturbation)
{
    // B shares the y = 0, y = 10, z = 0 and z = 10 planes with A.
    const TriMesh a = cube(Vec3::Zero(), 10.0), b = cube(Vec3(5, 0, 0), 10.0);
    const TriMesh out = boolean(a, b, BooleanOp::Difference);
    EXPECT_TRUE(out.is_closed());
    EXPECT_NEAR(volume(out), 500.0, 0.005 * 500.0);
}

TEST(Boolean, OpenOperandIsRejected)
{
    const TriMesh sheet = primitives::sheet(10, 10, 1, 1);
    try {
        boolean(cube(Vec3::Zero(), 10.0), sheet, BooleanOp::Difference);
        FAIL() << "expected BooleanFailure";
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::BooleanFailure);
    }
}

TEST(Boolean, DisjointIntersectionIsEmpty)
{
    const TriMesh out = boolean(cube(Vec3::Zero(), 1.0), cube(Vec3(5, 5, 5), 1.0), BooleanOp::Intersection);
    EXPECT_TRUE(out.empty());
}

TEST(Boolean, HoleThroughSingleFace)
{
    // A thin pin pokes through the middle of one large face of a coarse box,
    // so the intersection curve is a closed loop inside that face.
    const TriMesh slab = primitives::box(Vec3(0, 0, 0), Vec3(20, 20, 4), 1);
    const TriMesh pin = primitives::frustum(1.0, 1.0, 6.0, 12, 1.0).translated(Vec3(7.3, 8.1, 0));
    const TriMesh out = boolean(slab, pin, BooleanOp::Difference);
    EXPECT_TRUE(out.is_closed());
    const double expected = volume(slab) - volume(pin) * 3.0 / 6.0;
    EXPECT_NEAR(volume(out), expected, 1e-6 * expected);
}

struct FixturePair {
    const char *name;
    TriMesh a, b;
};

class BooleanInclusionExclusion : public ::testing::TestWithParam<int> {};

FixturePair fixture_pair(int i)
{
    switch (i) {
    case 0:
        return {"spheres", primitives::icosphere(Vec3::Zero(), 10.0, 8), primitives::icosphere(Vec3(7, 2, 1), 8.0, 8)};
    case 1:
        return {"cube-sphere", primitives::box(Vec3(-6, -6, -6), Vec3(6, 6, 6), 3),
                primitives::icosphere(Vec3(3, 3, 3), 6.0, 10)};
    case 2:
        return {"torus-box", primitives::torus(10.0, 3.0, 40, 20),
                primitives::box(Vec3(-4.1, -15.3, -5.2), Vec3(4.4, 15.1, 1.3), 2)};
    default:
        return {"cone-cylinder", primitives::frustum(6.0, 0.0, 12.0, 32, -2.0),
                primitives::frustum(2.0, 2.0, 20.0, 24, -5.0).translated(Vec3(1.1, 0.3, 0))};
    }
}

TEST_P(BooleanInclusionExclusion, UnionPlusIntersectionEqualsSum)
{
    const FixturePair p = fixture_pair(GetParam());
    const TriMesh u = boolean(p.a, p.b, BooleanOp::Union);
    const TriMesh i = boolean(p.a, p.b, BooleanOp::Intersection);
    const TriMesh d = boolean(p.a, p.b, BooleanOp::Difference);
    EXPECT_TRUE(u.is_closed()) << p.name;
    EXPECT_TRUE(i.is_closed()) << p.name;
    EXPECT_TRUE(d.is_closed()) << p.name;
    const double sum = volume(p.a) + volume(p.b);
    EXPECT_NEAR(volume(u) + volume(i), sum, 0.01 * sum) << p.name;
    EXPECT_NEAR(volume(d), volume(p.a) - volume(i), 0.005 * volume(d)) << p.name;
}

INSTANTIATE_TEST_SUITE_P(Fixtures, BooleanInclusionExclusion, ::testing::Range(0, 4));

TEST(Boolean, MatchesVoxelOracleOnCurvedPair)
{
    const FixturePair p = fixture_pair(0);
    Aabb region = p.a.bounds();
    region.extend(p.b.bounds());
    region = region.inflated(0.5);
    const auto va = oracle::voxelize(p.a, region, 0.1), vb = oracle::voxelize(p.b, region, 0.1);
    const double oracle_d = oracle::combine(va, vb, oracle::VoxelOp::Difference).volume();
    EXPECT_NEAR(volume(boolean(p.a, p.b, BooleanOp::Difference)), oracle_d, 0.01 * oracle_d);
}

TEST(Boolean, RandomPairsSatisfyInclusionExclusion)
{
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 60; ++i) {
        const TriMesh a = i % 2 ? primitives::icosphere(Vec3::Zero(), 5.0, 6)
                                : primitives::box(Vec3(-4, -4, -4), Vec3(4, 4, 4), i % 3 + 1);
        TriMesh b = i % 3 ? primitives::box(Vec3(u(rng) * 2 - 2, u(rng) * 2 - 2, u(rng) * 2 - 2),
                                            Vec3(u(rng) * 2 + 3, u(rng) * 2 + 3, u(rng) * 2 + 3), 1 + i % 4)
                          : primitives::icosphere(Vec3(u(rng) * 4, u(rng) * 4, u(rng) * 4), 3.0 + u(rng), 5);
        if (i % 5 == 0) // shares the y = -4 and y = 4 planes with the box operand
            b = primitives::box(Vec3(std::round(u(rng) * 4), -4, std::round(u(rng) * 4)), Vec3(6, 4, 6), 2);
        const TriMesh un = boolean(a, b, BooleanOp::Union);
        const TriMesh in = boolean(a, b, BooleanOp::Intersection);
        const double sum = volume(a) + volume(b);
        EXPECT_TRUE(un.is_closed()) << i;
        EXPECT_NEAR(volume(un) + (in.empty() ? 0.0 : volume(in)), sum, 0.01 * sum) << i;
    }
}
