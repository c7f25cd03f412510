#include "support/fixtures.hpp"

#include "magneto/primitives.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace magneto::fixtures {

TriMesh bunny_class_blob(int frequency)
{
    const TriMesh sphere = primitives::icosphere(Vec3::Zero(), 1.0, frequency);
    std::vector<Vec3> verts;
    verts.reserve(sphere.vertex_count());
    for (const Vec3 &p : sphere.vertices()) {
        const double theta = std::atan2(p.y(), p.x());
        const double z = p.z();
        // Low-frequency lumps keep every concave region far wider than the
        // shell; angular terms fade out towards the poles so they stay smooth.
        const double lump = 1.0 + 0.07 * std::sin(3.0 * theta) * (1.0 - z * z) + 0.05 * z * z * z +
                            0.04 * std::cos(2.0 * theta + 1.3 * z) * (1.0 - z * z);
        verts.push_back(Vec3(30.0 * p.x(), 24.0 * p.y(), 27.0 * p.z()) * lump);
    }
    return TriMesh(std::move(verts), sphere.faces());
}

namespace {

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s = buf;
    while (s.back() == '0')
        s.pop_back();
    if (s.back() == '.')
        s.pop_back();
    return s;
}

} // namespace

std::string cura_gcode(double height, double layer_height, double size, const Vec2 &origin)
{
    const int layers = static_cast<int>(std::floor(height / layer_height + 1e-9));
    std::ostringstream out;
    out << ";FLAVOR:Marlin\n;TIME:600\n;Filament used: 1.5m\n;Layer height: " << fmt(layer_height)
        << "\n;Generated with Cura_SteamEngine 5.2.1\n";
    out << "M140 S60\nM105\nM190 S60\nM104 S200\nM109 S200\nM82 ;absolute extrusion mode\nG28 ;Home\n";
    out << "G92 E0\nG1 Z2.0 F3000 ;Move Z Axis up\nG1 X0.1 Y20 Z0.3 F5000.0\nG1 X0.1 Y200.0 Z0.3 F1500.0 E15\n";
    out << "G92 E0\nG1 F2700 E-5\n;LAYER_COUNT:" << layers << "\n";
    double e = 0.0;
    const double x0 = origin.x(), y0 = origin.y();
    for (int k = 0; k < layers; ++k) {
        const double z = layer_height * (k + 1);
        out << ";LAYER:" << k << "\n";
        if (k == 0)
            out << "M107\n";
        out << "G0 F6000 X" << fmt(x0) << " Y" << fmt(y0) << " Z" << fmt(z) << "\n";
        out << ";TYPE:WALL-OUTER\nG1 F2700 E" << fmt(e) << "\n";
        const double xs[4] = {x0 + size, x0 + size, x0, x0};
        const double ys[4] = {y0, y0 + size, y0 + size, y0};
        for (int i = 0; i < 4; ++i) {
            e += size * 0.0333;
            out << "G1 F1200 X" << fmt(xs[i]) << " Y" << fmt(ys[i]) << " E" << fmt(e) << "\n";
        }
        out << ";TIME_ELAPSED:" << fmt(10.0 * (k + 1)) << "\n";
    }
    out << "G1 F2700 E" << fmt(e - 5) << "\nM140 S0\nM107\nG91 ;Relative positioning\n";
    out << "G1 E-2 F2700 ;Retract a bit\nG1 E-2 Z0.2 F2400 ;Retract and raise Z\nG1 X5 Y5 F3000 ;Wipe out\n";
    out << "G1 Z10 ;Raise Z more\nG90 ;Absolute positioning\nM84 X Y E ;Disable all steppers but Z\n";
    out << "M82 ;absolute extrusion mode\nM104 S0\n;End of Gcode\n";
    return out.str();
}

std::string prusa_gcode(int layers, double layer_height)
{
    std::ostringstream out;
    out << "; generated by PrusaSlicer 2.6.0+linux-x64 on 2024-01-01 at 10:00:00 UTC\r\n";
    out << "M73 P0 R1\r\nM201 X1000 Y1000 Z200 E5000\r\nG21 ; set units to millimeters\r\n";
    out << "G90 ; use absolute coordinates\r\nM83 ; extruder relative mode\r\nM104 S215\r\nG28\r\n";
    for (int k = 0; k < layers; ++k) {
        const double z = layer_height * (k + 1);
        out << ";LAYER_CHANGE\r\n;Z:" << fmt(z) << "\r\n;HEIGHT:" << fmt(layer_height) << "\r\n";
        out << "G1 Z" << fmt(z) << " F720\r\n";
        out << "G1 X10 Y10 F9000\r\nG1 X30 Y10 E0.8\r\nG1 X30 Y30 E0.8\r\nG1 X10 Y30 E0.8\r\nG1 X10 Y10 E0.8\r\n";
    }
    out << "; stop printing object\r\nM107\r\n;TYPE:Custom\r\nG1 Z" << fmt(layer_height * layers + 10)
        << " F720\r\nM104 S0\r\nM84";
    return out.str();
}

std::string bare_gcode(int layers, double layer_height)
{
    std::ostringstream out;
    out << "G21\nG90\nM82\nG28\nG92 E0\n";
    double e = 0.0;
    for (int k = 0; k < layers; ++k) {
        const double z = layer_height * (k + 1);
        out << "G1 Z" << fmt(z) << " F1200\n";
        for (int i = 0; i < 3; ++i) {
            e += 0.5;
            out << "G1 X" << 10 + 5 * i << " Y" << 10 + 3 * i << " E" << fmt(e) << "\n";
        }
    }
    out << "M104 S0\nM84\n";
    return out.str();
}

std::string fixture_path(const std::string &name) { return std::string(MAGNETO_FIXTURE_DIR) + "/" + name; }

} // namespace magneto::fixtures
