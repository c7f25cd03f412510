#include "magneto/bvh.hpp"
#include "magneto/error.hpp"
#include "magneto/primitives.hpp"
#include "magneto/shell.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace magneto;

namespace {

CellSpec hex_spec() { return {CellShape::Hexagon, 4.0, 1.0, 5.0, 0.6}; }

std::pair<double, double> radius_range(const TriMesh &m)
{
    double lo = 1e300, hi = 0.0;
    for (const Vec3 &v : m.vertices()) {
        lo = std::min(lo, v.norm());
        hi = std::max(hi, v.norm());
    }
    return {lo, hi};
}

} // namespace

TEST(BuildShell, ConcentricSpheres)
{
    const TriMesh m = primitives::icosphere(Vec3::Zero(), 20.0, 16);
    const ShellModel shell = build_shell(m, hex_spec());
    const auto [out_lo, out_hi] = radius_range(shell.s_out);
    EXPECT_NEAR(out_lo, 25.0, 0.1);
    EXPECT_NEAR(out_hi, 25.6, 0.1);
    const auto [in_lo, in_hi] = radius_range(shell.s_in);
    EXPECT_NEAR(in_lo, 19.4, 0.1);
    EXPECT_NEAR(in_hi, 20.0, 0.1);
    const double analytic = 4.0 / 3.0 * std::numbers::pi * (std::pow(25.0, 3) - std::pow(20.0, 3));
    EXPECT_NEAR(volume(shell.body), analytic, 0.03 * analytic);
    for (const TriMesh *part : {&shell.s_out, &shell.s_in, &shell.body, &shell.m_prime})
        EXPECT_TRUE(part->is_closed());
    EXPECT_GT(volume(shell.s_out), 0.0);
    EXPECT_GT(volume(shell.s_in), 0.0);
}

TEST(BuildShell, OuterScreenKeepsCellDepthFromInput)
{
    const TriMesh m = primitives::icosphere(Vec3(1, 2, 3), 15.0, 12);
    const ShellModel shell = build_shell(m, hex_spec());
    const Bvh bvh(m);
    for (const Vec3 &v : shell.s_out.vertices())
        EXPECT_GE(bvh.closest(v).distance, 5.0 - 0.05);
}

TEST(BuildShell, SingleSidedPlateHasUniformBody)
{
    const TriMesh plate = primitives::sheet(40, 40, 8, 8);
    const ShellModel shell = build_shell(plate, hex_spec());
    EXPECT_TRUE(shell.single_sided);
    for (const TriMesh *part : {&shell.s_out, &shell.s_in, &shell.body})
        EXPECT_TRUE(part->is_closed());
    for (const Vec3 &v : shell.body.vertices()) {
        const bool on_face = std::abs(v.z() - 0.6) < 0.05 || std::abs(v.z() - 5.6) < 0.05;
        EXPECT_TRUE(on_face) << v.transpose();
    }
    EXPECT_NEAR(volume(shell.body), 40 * 40 * 5.0, 1e-6);
    EXPECT_NEAR(volume(shell.s_in), 40 * 40 * 0.6, 1e-6);
    EXPECT_NEAR(volume(shell.s_out), 40 * 40 * 0.6, 1e-6);
    EXPECT_NEAR(shell.m_prime.bounds().lo.z(), 5.6, 1e-9);
}

TEST(BuildShell, BunnyClassMeshesAllClosed)
{
    const TriMesh m = fixtures::bunny_class_blob();
    const ShellModel shell = build_shell(m, hex_spec());
    for (const TriMesh *part : {&shell.m, &shell.m_prime, &shell.s_out, &shell.s_in, &shell.body})
        EXPECT_TRUE(part->is_closed());
    EXPECT_TRUE(shell_union(shell).is_closed());
}

TEST(BuildShell, UnionVolumeEqualsOuterMinusInner)
{
    const TriMesh m = fixtures::bunny_class_blob(12);
    const CellSpec spec = hex_spec();
    const ShellModel shell = build_shell(m, spec);
    const TriMesh all = shell_union(shell);
    EXPECT_TRUE(all.is_closed());
    const double expected =
        volume(offset_mesh(shell.m_prime, spec.screen_thickness)) - volume(offset_mesh(m, -spec.screen_thickness));
    EXPECT_NEAR(volume(all), expected, 0.01 * expected);
}

TEST(BuildShell, Deterministic)
{
    const TriMesh m = fixtures::bunny_class_blob(10);
    const ShellModel a = build_shell(m, hex_spec()), b = build_shell(m, hex_spec());
    EXPECT_EQ(a.s_out.vertices(), b.s_out.vertices());
    EXPECT_EQ(a.s_in.vertices(), b.s_in.vertices());
    EXPECT_EQ(a.body.vertices(), b.body.vertices());
    EXPECT_EQ(a.body.faces(), b.body.faces());
}

TEST(BuildShell, InwardModeKeepsInputAsExterior)
{
    const TriMesh m = primitives::icosphere(Vec3::Zero(), 20.0, 16);
    PrinterProfile profile;
    profile.offset_inward = true;
    const ShellModel shell = build_shell(m, hex_spec(), profile);
    const auto [lo, hi] = radius_range(shell.s_out);
    EXPECT_NEAR(hi, 20.0, 1e-9);
    EXPECT_NEAR(lo, 19.4, 0.1);
    const auto [in_lo, in_hi] = radius_range(shell.s_in);
    EXPECT_NEAR(in_hi, 14.4, 0.1);
    EXPECT_NEAR(in_lo, 13.8, 0.1);
}

TEST(BuildShell, Errors)
{
    const TriMesh m = primitives::icosphere(Vec3::Zero(), 20.0, 8);
    const auto code_of = [](auto &&fn) {
        try {
            fn();
        } catch (const Error &e) {
            return e.code();
        }
        return ErrorCode::InvalidArgument;
    };
    EXPECT_EQ(code_of([&] { build_shell(m, {CellShape::Circle, 2.0, 1.0, 5.0, 0.6}); }), ErrorCode::SpecInvalid);
    PrinterProfile inward;
    inward.offset_inward = true;
    const TriMesh tiny = primitives::icosphere(Vec3::Zero(), 3.0, 8);
    EXPECT_EQ(code_of([&] { build_shell(tiny, hex_spec(), inward); }), ErrorCode::OffsetCollapse);
    EXPECT_EQ(code_of([&] { build_shell(TriMesh{}, hex_spec()); }), ErrorCode::NotClosed);
}
