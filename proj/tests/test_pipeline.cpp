#include "magneto/error.hpp"
#include "magneto/mesh_io.hpp"
#include "magneto/pipeline.hpp"
#include "magneto/preview.hpp"
#include "magneto/primitives.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

using namespace magneto;

namespace {

CellSpec square(double size) { return {CellShape::Square, size, 1.0, 5.0, 0.6}; }

TriMesh plate() { return primitives::sheet(40, 40, 4, 4); }

// Slicer output for the plate after it is centred on a 220 mm bed.
std::string plate_gcode() { return fixtures::cura_gcode(6.2, 0.2, 40.0, Vec2(90, 90)); }

ErrorCode code_of(auto &&fn)
{
    try {
        fn();
    } catch (const Error &e) {
        return e.code();
    }
    return ErrorCode::InvalidArgument;
}

} // namespace

TEST(Validate, ReportsViolationsAndProfileProblems)
{
    const Json ok = cmd_validate(square(4), PrinterProfile{});
    EXPECT_TRUE(ok["valid"].get<bool>());
    const Json bad = cmd_validate({CellShape::Circle, 2.0, 1.0, 5.0, 0.6}, PrinterProfile{});
    EXPECT_FALSE(bad["valid"].get<bool>());
    EXPECT_EQ(bad["violations"][0]["code"], "TooSmall");
    PrinterProfile off;
    off.brush_area = Vec2(-1, 0);
    EXPECT_FALSE(cmd_validate(square(4), off)["valid"].get<bool>());
    EXPECT_EQ(cmd_validate(square(4), off)["profile_problems"].size(), 1u);
}

TEST(Generate, InvalidSpecFailsBeforeGeometry)
{
    EXPECT_EQ(code_of([] { cmd_generate(plate(), {CellShape::Circle, 2.0, 1.0, 5.0, 0.6}, {}); }),
              ErrorCode::SpecInvalid);
}

TEST(Generate, PrintFrameCentresOnBed)
{
    const PrinterProfile profile;
    Vec3 offset;
    const DisplayModel model = cmd_generate(plate(), square(4), profile, {}, &offset);
    const Aabb box = model.printable.bounds();
    EXPECT_NEAR(box.lo.z(), 0.0, 1e-9);
    EXPECT_NEAR(0.5 * (box.lo.x() + box.hi.x()), 110.0, 1e-9);
    EXPECT_NEAR(0.5 * (box.lo.y() + box.hi.y()), 110.0, 1e-9);
    EXPECT_NEAR(offset.x(), 90.0, 1e-9);

    GenerateOptions keep;
    keep.keep_position = true;
    const DisplayModel fixed = cmd_generate(plate(), square(4), profile, keep, &offset);
    EXPECT_EQ(offset, Vec3::Zero());
    EXPECT_NEAR(fixed.printable.bounds().lo.x(), 0.0, 1e-9);
    for (std::size_t i = 0; i < model.cells.size(); ++i)
        EXPECT_LT((model.cells[i].center - fixed.cells[i].center - Vec3(90, 90, 0)).norm(), 1e-9);
}

TEST(Session, PlateEndToEnd)
{
    Session s(plate(), square(4), PrinterProfile{});
    s.generate();
    s.plan();
    s.postprocess(plate_gcode());
    const auto &a = s.artifacts();
    EXPECT_EQ(a.size(), 5u);
    for (const char *name : {artifact::kDisplay, artifact::kPreview, artifact::kPlan, artifact::kGcode,
                             artifact::kReport})
        EXPECT_TRUE(a.count(name)) << name;

    const InjectionPlan &plan = *s.injection_plan();
    EXPECT_TRUE(plan.unplannable.empty());
    EXPECT_EQ(plan.points.size(), s.model()->report.total());
    const SpliceAudit audit_out = audit(parse_gcode(a.at(artifact::kGcode)));
    EXPECT_EQ(audit_out.blocks, plan.points.size());
    EXPECT_EQ(audit_out.switch_in, 1u);
    EXPECT_NEAR(audit_out.plunge_e, plan.total_volume * 0.01, 1e-6 * plan.total_volume * 0.01);

    const Json preview = Json::parse(a.at(artifact::kPreview));
    EXPECT_EQ(preview["cells"].size(), s.model()->report.total());
    EXPECT_EQ(preview["report"]["total"], s.model()->report.total());
    const Json report = Json::parse(a.at(artifact::kReport));
    EXPECT_TRUE(report["printable"]["closed"].get<bool>());
    EXPECT_EQ(report["cells"]["flagged"], 0);
    EXPECT_EQ(report["preflight"][0]["status"], "ok");
    EXPECT_EQ(parse_mesh(a.at(artifact::kDisplay), MeshFormat::StlBinary).mesh.face_count(),
              s.model()->printable.face_count());
}

TEST(Session, StagesRunInOrder)
{
    Session s(plate(), square(4), PrinterProfile{});
    EXPECT_EQ(code_of([&] { s.plan(); }), ErrorCode::JobState);
    EXPECT_EQ(code_of([&] { s.postprocess(plate_gcode()); }), ErrorCode::JobState);
    s.generate();
    EXPECT_EQ(code_of([&] { s.generate(); }), ErrorCode::JobState);
    EXPECT_EQ(code_of([&] { s.postprocess(plate_gcode()); }), ErrorCode::JobState);
    s.plan();
    EXPECT_EQ(code_of([&] { s.postprocess("G28\n"); }), ErrorCode::NoLayersFound);
}

TEST(Session, PreviewOnlySkipsAssembly)
{
    GenerateOptions options;
    options.preview_only = true;
    Session s(plate(), square(4), PrinterProfile{}, options);
    s.generate();
    EXPECT_TRUE(s.model()->printable.empty());
    EXPECT_FALSE(s.artifacts().count(artifact::kDisplay));
    EXPECT_TRUE(s.artifacts().count(artifact::kPreview));
    const Json preview = Json::parse(s.artifacts().at(artifact::kPreview));
    EXPECT_EQ(preview["cells"].size(), s.model()->cells.size());
}

TEST(Session, ArtifactsAreDeterministic)
{
    const auto run = [](Execution exec) {
        GenerateOptions options;
        options.exec = exec;
        Session s(plate(), square(4), PrinterProfile{}, options);
        s.generate();
        s.plan();
        s.postprocess(plate_gcode());
        return s.artifacts();
    };
    const auto a = run(Execution::Parallel);
    EXPECT_EQ(a, run(Execution::Parallel));
    EXPECT_EQ(a, run(Execution::Serial));
}

TEST(Preview, DecimationRespectsBudget)
{
    const TriMesh dense = primitives::icosphere(Vec3::Zero(), 10.0, 80); // 128k faces
    ASSERT_GT(dense.face_count(), kPreviewTriangleBudget);
    const TriMesh small = decimate(dense, kPreviewTriangleBudget);
    EXPECT_LE(small.face_count(), kPreviewTriangleBudget);
    EXPECT_GT(small.face_count(), kPreviewTriangleBudget / 4);
    EXPECT_NEAR(small.bounds().hi.x(), 10.0, 0.5);
    const TriMesh coarse = primitives::icosphere(Vec3::Zero(), 10.0, 4);
    EXPECT_EQ(decimate(coarse, kPreviewTriangleBudget).face_count(), coarse.face_count());
}

TEST(Preview, CellSoupsAndPlanStatus)
{
    DisplayModel model = cmd_generate(plate(), square(4), PrinterProfile{});
    InjectionPlan plan = build_plan(model, PrinterProfile{});
    plan.unplannable.push_back({model.cells.front().id, UnplannableReason::NoOpening});
    const Json preview = preview_json(model, &plan);
    ASSERT_EQ(preview["cells"].size(), model.cells.size());
    const Json &first = preview["cells"][0];
    EXPECT_EQ(first["display_status"], "unplannable");
    EXPECT_EQ(first["status"], std::string(to_string(model.cells.front().status)));
    EXPECT_EQ(first["triangles"].size(), 9 * model.cells.front().solid.face_count());
    EXPECT_EQ(preview["cells"][1]["display_status"], preview["cells"][1]["status"]);
    EXPECT_EQ(preview["report"]["unplannable"], 1);
    EXPECT_TRUE(preview["status_colors"].contains("unplannable"));
    const Json &shell = preview["shell"];
    EXPECT_LE(shell["display_surface"]["triangle_count"].get<std::size_t>() +
                  shell["body_surface"]["triangle_count"].get<std::size_t>(),
              kPreviewTriangleBudget);
}
