#pragma once

#include "magneto/tri_mesh.hpp"

#include <string>

namespace magneto::fixtures {

// Closed genus-0 "scan-like" body: a lumpy ellipsoid sampled on a geodesic
// sphere of the given frequency (frequency 22 gives 9680 faces).
TriMesh bunny_class_blob(int frequency = 22);

// Cura-flavoured G-code: square perimeters for every layer up to `height`.
std::string cura_gcode(double height, double layer_height = 0.2, double size = 40.0, const Vec2 &origin = {20.0, 20.0});

// PrusaSlicer-flavoured G-code using ;LAYER_CHANGE / ;Z: markers.
std::string prusa_gcode(int layers, double layer_height = 0.2);

// G-code with no layer comments, only Z moves.
std::string bare_gcode(int layers, double layer_height = 0.3);

std::string fixture_path(const std::string &name);

} // namespace magneto::fixtures
