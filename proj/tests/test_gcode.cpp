#include "magneto/error.hpp"
#include "magneto/gcode.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

using namespace magneto;

namespace {

std::string read_fixture(const std::string &name)
{
    std::ifstream in(fixtures::fixture_path(name), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ErrorCode code_of(auto &&fn)
{
    try {
        fn();
    } catch (const Error &e) {
        return e.code();
    }
    return ErrorCode::InvalidArgument;
}

InjectionPoint point(int id, double x, double y, double z, double fill)
{
    return {id, x, y, z, layer_index_at(z, 0.2), fill, 3.0};
}

InjectionPlan plan_of(std::vector<InjectionPoint> points)
{
    InjectionPlan plan;
    plan.points = std::move(points);
    for (const auto &p : plan.points)
        plan.total_volume += p.fill_volume;
    return plan;
}

std::size_t count(const std::vector<std::string> &lines, std::string_view needle)
{
    std::size_t n = 0;
    for (const auto &l : lines)
        n += l.find(needle) != std::string::npos;
    return n;
}

} // namespace

TEST(ParseGcode, CuraMarkersGiveLayerHeights)
{
    const GcodeProgram p = parse_gcode(fixtures::cura_gcode(0.6));
    ASSERT_EQ(p.layers.size(), 3u);
    EXPECT_TRUE(p.layer_markers);
    EXPECT_EQ(p.flavor, "Cura");
    for (int k = 0; k < 3; ++k) {
        EXPECT_EQ(p.layers[k].index, k);
        EXPECT_NEAR(p.layers[k].z, 0.2 * (k + 1), 1e-12);
        EXPECT_EQ(p.layers[k].commands.front(), ";LAYER:" + std::to_string(k));
    }
    EXPECT_EQ(p.prelude.back(), ";LAYER_COUNT:3");
    EXPECT_EQ(p.layers.back().commands.back(), ";TIME_ELAPSED:30");
    EXPECT_EQ(p.postlude.back(), ";End of Gcode");
}

TEST(ParseGcode, ZTrackingWithoutMarkers)
{
    const GcodeProgram p = parse_gcode(fixtures::bare_gcode(3, 0.2));
    ASSERT_EQ(p.layers.size(), 3u);
    EXPECT_FALSE(p.layer_markers);
    for (int k = 0; k < 3; ++k)
        EXPECT_NEAR(p.layers[k].z, 0.2 * (k + 1), 1e-12);
    EXPECT_EQ(p.postlude, (std::vector<std::string>{"M104 S0", "M84"}));
}

TEST(ParseGcode, ZTrackingFoldsLiftsAndHops)
{
    const std::string text = "G28\nG1 Z15 F600\nG1 Z0.2\nG1 X10 Y10 E1\nG1 Z0.6\nG1 X20 Y10\nG1 Z0.2\n"
                             "G1 X30 Y10 E2\nG1 Z0.4\nG1 X10 Y20 E3\nG1 Z10\nM84\n";
    const GcodeProgram p = parse_gcode(text);
    ASSERT_EQ(p.layers.size(), 2u);
    EXPECT_NEAR(p.layers[0].z, 0.2, 1e-12);
    EXPECT_NEAR(p.layers[1].z, 0.4, 1e-12);
    EXPECT_EQ(p.prelude, (std::vector<std::string>{"G28", "G1 Z15 F600"}));
    EXPECT_EQ(p.postlude, (std::vector<std::string>{"G1 Z10", "M84"}));
    EXPECT_EQ(emit(p), text);
}

TEST(ParseGcode, RelativeZIsNotALayer)
{
    const std::string text = "G1 Z0.2\nG1 X1 Y1 E1\nG91\nG1 Z5\nG90\nG1 Z0.4\nG1 X2 Y1 E2\n";
    const GcodeProgram p = parse_gcode(text);
    ASSERT_EQ(p.layers.size(), 2u);
    EXPECT_NEAR(p.layers[1].z, 0.4, 1e-12);
}

TEST(ParseGcode, PrusaMarkersAndCrlf)
{
    const std::string text = fixtures::prusa_gcode(4);
    const GcodeProgram p = parse_gcode(text);
    EXPECT_EQ(p.flavor, "PrusaSlicer");
    EXPECT_TRUE(p.crlf);
    EXPECT_FALSE(p.trailing_newline);
    ASSERT_EQ(p.layers.size(), 4u);
    EXPECT_NEAR(p.layers[3].z, 0.8, 1e-12);
    EXPECT_EQ(p.postlude.front(), "; stop printing object\r");
    EXPECT_EQ(emit(p), text);
}

TEST(ParseGcode, RoundTripIsByteIdenticalOnFixtures)
{
    for (const char *name : {"cura_plate.gcode", "prusa_plate.gcode", "bare_plate.gcode"}) {
        const std::string text = read_fixture(name);
        ASSERT_FALSE(text.empty()) << name;
        EXPECT_EQ(emit(parse_gcode(text)), text) << name;
        EXPECT_EQ(emit(splice(parse_gcode(text), InjectionPlan{}, PrinterProfile{})), text) << name;
    }
}

TEST(ParseGcode, Errors)
{
    EXPECT_EQ(code_of([] { parse_gcode("M104 S200\nG28\nG1 X10 Y10\n"); }), ErrorCode::NoLayersFound);
    EXPECT_EQ(code_of([] { parse_gcode(""); }), ErrorCode::NoLayersFound);
    EXPECT_EQ(code_of([] { parse_gcode(";LAYER:0\nG1 Z0.4\n;LAYER:1\nG1 Z0.2\n"); }), ErrorCode::ParseError);
}

TEST(InjectionBlock, TravelAppliesOffsetAndPlungesFill)
{
    const PrinterProfile profile;
    const InjectionBlock b = make_injection_block(point(9, 60, 60, 5.0, 50), profile);
    EXPECT_EQ(b.cell_id, 9);
    const std::vector<std::string> expected{";MAGNETO:INJECT cell=9",
                                            "G0 Z5 F6000",
                                            "G0 X30 Y60 F6000",
                                            "M280 P0 S90 ; lower injector",
                                            "G1 E0.5 F120 ;MAGNETO:PLUNGE",
                                            "G1 E-0.1 F120 ;MAGNETO:RETRACT",
                                            "M280 P0 S0 ; raise injector",
                                            ";MAGNETO:END_INJECT"};
    EXPECT_EQ(b.commands, expected);
}

TEST(InjectionBlock, RetractionAndClearance)
{
    PrinterProfile profile;
    profile.retraction_volume = 20;
    profile.z_clearance = 0.5;
    const InjectionBlock b = make_injection_block(point(0, 60, 60, 5.0, 50), profile);
    EXPECT_EQ(count(b.commands, "G1 E-0.2 F120"), 1u);
    EXPECT_EQ(b.commands[1], "G0 Z5.5 F6000");
}

TEST(InjectionBlock, OutOfBed)
{
    const PrinterProfile profile;
    EXPECT_EQ(code_of([&] { make_injection_block(point(0, 5, 60, 5.0, 50), profile); }), ErrorCode::OutOfBed);
    EXPECT_EQ(code_of([&] { make_injection_block(point(0, 60, 221, 5.0, 50), profile); }), ErrorCode::OutOfBed);
    EXPECT_NO_THROW(make_injection_block(point(0, 30, 0, 5.0, 50), profile));
}

TEST(Splice, OneSeriesPerLayer)
{
    const PrinterProfile profile;
    const GcodeProgram base = parse_gcode(fixtures::cura_gcode(8.0, 0.2, 20.0, Vec2(100, 100)));
    const InjectionPlan plan = plan_of({point(4, 140, 105, 5.0, 40), point(7, 145, 110, 5.0, 42)});
    const GcodeProgram out = splice(base, plan, profile);
    ASSERT_EQ(out.layers.size(), base.layers.size());
    const GcodeLayer &layer = out.layers[24];
    EXPECT_NEAR(layer.z, 5.0, 1e-12);
    EXPECT_EQ(count(layer.commands, ";MAGNETO:SWITCH_IN"), 1u);
    EXPECT_EQ(count(layer.commands, ";MAGNETO:INJECT"), 2u);
    EXPECT_EQ(count(layer.commands, ";MAGNETO:SWITCH_OUT"), 1u);
    EXPECT_EQ(count(layer.commands, ";MAGNETO:PURGE"), 1u);
    // Inserted after everything the slicer put in layer 24.
    const std::size_t original = base.layers[24].commands.size();
    EXPECT_TRUE(std::equal(base.layers[24].commands.begin(), base.layers[24].commands.end(),
                           layer.commands.begin()));
    EXPECT_EQ(layer.commands[original], ";MAGNETO:SWITCH_IN layer=24");
    EXPECT_EQ(layer.commands.back(), ";MAGNETO:END_SWITCH");
    for (std::size_t j = 0; j < out.layers.size(); ++j)
        if (j != 24)
            EXPECT_EQ(out.layers[j], base.layers[j]);
    EXPECT_EQ(out.prelude, base.prelude);
    EXPECT_EQ(out.postlude, base.postlude);

    // Absolute extrusion is restored at the layer's final E.
    EXPECT_EQ(count(layer.commands, "M82 ; absolute extrusion"), 1u);
    EXPECT_EQ(count(layer.commands, "G92 E66.6"), 1u);
    const std::string text = emit(out);
    EXPECT_LT(text.find(";MAGNETO:END_SWITCH"), text.find(";LAYER:25"));
    EXPECT_GT(text.find(";MAGNETO:SWITCH_IN"), text.find(";TIME_ELAPSED:250"));
}

TEST(Splice, LayerMismatch)
{
    const PrinterProfile profile;
    const GcodeProgram base = parse_gcode(fixtures::cura_gcode(8.0));
    EXPECT_EQ(code_of([&] { splice(base, plan_of({point(1, 60, 60, 5.1, 10)}), profile); }),
              ErrorCode::LayerMismatch);
    EXPECT_EQ(code_of([&] { splice(base, plan_of({point(1, 60, 60, 9.0, 10)}), profile); }),
              ErrorCode::LayerMismatch);
    EXPECT_NO_THROW(splice(base, plan_of({point(1, 60, 60, 5.0 + 1e-7, 10)}), profile));
}

TEST(Splice, UnreachableDumpIsOutOfBed)
{
    PrinterProfile profile;
    profile.dump_area = Vec2(5, 5);
    EXPECT_FALSE(validate_profile(profile).empty());
    const GcodeProgram base = parse_gcode(fixtures::cura_gcode(8.0));
    EXPECT_EQ(code_of([&] { splice(base, plan_of({point(1, 60, 60, 5.0, 10)}), profile); }), ErrorCode::OutOfBed);
}

TEST(Splice, AuditAndReparse)
{
    PrinterProfile profile;
    profile.engage_macro = "G91\nG1 Z-2 F600\nG90";
    profile.disengage_macro = "G91\nG1 Z2 F600\nG90";
    profile.z_clearance = 0.4;
    std::vector<InjectionPoint> points;
    for (int i = 0; i < 12; ++i)
        points.push_back(point(i, 60 + 3 * i, 70, 0.2 * (8 + 3 * (i / 4)), 40.0 + 0.37 * i));
    const InjectionPlan plan = plan_of(points);
    std::set<double> layers;
    for (const auto &p : points)
        layers.insert(p.z);

    for (const char *name : {"cura_plate.gcode", "prusa_plate.gcode", "bare_plate.gcode"}) {
        const GcodeProgram out = splice(parse_gcode(read_fixture(name)), plan, profile);
        const GcodeProgram again = parse_gcode(emit(out));
        EXPECT_EQ(again, out) << name;
        const SpliceAudit a = audit(again);
        EXPECT_EQ(a.switch_in, layers.size()) << name;
        EXPECT_EQ(a.switch_out, layers.size()) << name;
        EXPECT_EQ(a.injection_layers.size(), layers.size()) << name;
        EXPECT_EQ(a.blocks, points.size()) << name;
        EXPECT_NEAR(a.plunge_e, plan.total_volume * profile.e_per_mm3, 1e-6 * plan.total_volume * profile.e_per_mm3)
            << name;
        EXPECT_NEAR(a.purge_e, layers.size() * profile.purge_volume * profile.e_per_mm3, 1e-9) << name;
        EXPECT_EQ(a.z_regressions, 0u) << name;
        std::vector<int> order;
        for (const auto &p : points)
            order.push_back(p.cell_id);
        EXPECT_EQ(a.cell_order, order) << name;
    }
}

TEST(Splice, CrlfAndRelativeExtrusionPreserved)
{
    const PrinterProfile profile;
    const GcodeProgram out = splice(parse_gcode(fixtures::prusa_gcode(30)), plan_of({point(0, 60, 60, 2.0, 30)}),
                                    profile);
    const GcodeLayer &layer = out.layers[9];
    for (const auto &l : layer.commands)
        EXPECT_EQ(l.back(), '\r');
    EXPECT_EQ(count(layer.commands, "M82"), 0u);
    EXPECT_EQ(count(layer.commands, "G1 F9000"), 1u);
}

TEST(Preflight, ChecklistFlagsLayerMismatch)
{
    const GcodeProgram p = parse_gcode(fixtures::cura_gcode(2.0));
    const auto ok = preflight_checklist(p, PrinterProfile{});
    EXPECT_EQ(ok.front().item, "layer_height");
    EXPECT_EQ(ok.front().status, "ok");
    PrinterProfile coarse;
    coarse.layer_height = 0.3;
    const auto warn = preflight_checklist(p, coarse);
    EXPECT_EQ(warn.front().status, "warn");
    EXPECT_EQ(warn[1].status, "warn");
    std::set<std::string> items;
    for (const auto &i : ok)
        items.insert(i.item);
    for (const char *required : {"print_speed", "bridging", "supports", "dump_area", "liquid_calibration"})
        EXPECT_TRUE(items.count(required)) << required;
    EXPECT_EQ(to_json(ok).size(), ok.size());
}
