#include "magneto/error.hpp"
#include "magneto/mesh_ops.hpp"
#include "magneto/primitives.hpp"
#include "magneto/remesh.hpp"

#include "magneto/bvh.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace magneto;

namespace {

// Vertex count of an ideal equilateral tiling of a w x h rectangle with edge
// length e: interior lattice density plus half-weighted boundary samples.
double lattice_vertex_count(double w, double h, double e)
{
    const double interior = w * h / (std::sqrt(3.0) / 2.0 * e * e);
    const double boundary = 2.0 * (w + h) / e;
    return interior + 0.5 * boundary + 1.0;
}

} // namespace

TEST(Remesh, FlatPlateVertexCountMatchesLattice)
{
    const TriMesh plate = primitives::sheet(40.0, 40.0, 1, 1);
    const TriMesh out = remesh_isotropic(plate, 5.0);
    const double expected = lattice_vertex_count(40.0, 40.0, 5.0);
    EXPECT_GE(out.vertex_count(), 44u);
    EXPECT_LE(out.vertex_count(), 118u);
    EXPECT_NEAR(static_cast<double>(out.vertex_count()), expected, 0.25 * expected);
    EXPECT_EQ(out.non_manifold_edge_count(), 0u);
    EXPECT_NEAR(out.surface_area(), 1600.0, 1e-6);
    for (const Vec3 &v : out.vertices())
        EXPECT_NEAR(v.z(), 0.0, 1e-9);
}

TEST(Remesh, FinePlateIsCoarsened)
{
    const TriMesh plate = primitives::sheet(40.0, 40.0, 40, 40);
    const TriMesh out = remesh_isotropic(plate, 5.0);
    const double expected = lattice_vertex_count(40.0, 40.0, 5.0);
    EXPECT_NEAR(static_cast<double>(out.vertex_count()), expected, 0.25 * expected);
    EXPECT_GE(edge_lengths(out).fraction_within(5.0, 0.7, 1.3), 0.9);
}

TEST(Remesh, UniformIcosphereIsAFixedPoint)
{
    const TriMesh sphere = primitives::icosphere(Vec3::Zero(), 20.0, 8);
    const EdgeLengthStats before = edge_lengths(sphere);
    const TriMesh out = remesh_isotropic(sphere, before.mean);
    const EdgeLengthStats after = edge_lengths(out);
    EXPECT_NEAR(after.mean, before.mean, 0.05 * before.mean);
    EXPECT_NEAR(static_cast<double>(out.vertex_count()), static_cast<double>(sphere.vertex_count()),
                0.05 * static_cast<double>(sphere.vertex_count()));
    EXPECT_TRUE(out.is_closed());
}

TEST(Remesh, SpherePreservesAreaAndStaysOnSurface)
{
    const TriMesh sphere = primitives::icosphere(Vec3::Zero(), 30.0, 24);
    const TriMesh out = remesh_isotropic(sphere, 5.0);
    EXPECT_TRUE(out.is_closed());
    EXPECT_NEAR(out.surface_area(), sphere.surface_area(), 0.02 * sphere.surface_area());
    const Bvh bvh(sphere);
    for (const Vec3 &v : out.vertices())
        EXPECT_LE(bvh.closest(v).distance, 0.2 * 5.0);
    const EdgeLengthStats stats = edge_lengths(out);
    EXPECT_GE(stats.fraction_within(5.0, 0.7, 1.3), 0.9);
}

TEST(Remesh, RefinesCoarseInput)
{
    const TriMesh sphere = primitives::icosphere(Vec3::Zero(), 30.0, 2);
    const TriMesh out = remesh_isotropic(sphere, 4.0);
    EXPECT_TRUE(out.is_closed());
    EXPECT_GT(out.vertex_count(), sphere.vertex_count() * 5);
}

TEST(Remesh, RejectsNonPositiveTarget)
{
    const TriMesh sphere = primitives::icosphere(Vec3::Zero(), 10.0, 3);
    EXPECT_THROW(remesh_isotropic(sphere, 0.0), Error);
}

TEST(Remesh, UnreachableEdgeTargetDiverges)
{
    // A target far larger than the model cannot produce edges near it.
    const TriMesh sphere = primitives::icosphere(Vec3::Zero(), 2.0, 4);
    try {
        remesh_isotropic(sphere, 50.0);
        FAIL() << "expected RemeshDiverged";
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::RemeshDiverged);
    }
}
