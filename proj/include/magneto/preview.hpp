#pragma once

#include "magneto/cells.hpp"
#include "magneto/planner.hpp"

namespace magneto {

inline constexpr std::size_t kPreviewTriangleBudget = 50000;

// Vertex-clustering simplification on a uniform grid, coarsened until the
// mesh has at most `max_faces` faces. Returns the input when already small.
TriMesh decimate(const TriMesh &mesh, std::size_t max_faces);

// Moves every mesh and cell of the model by `offset`.
void translate_display(DisplayModel &model, const Vec3 &offset);

// Offset that centres the model's footprint on the bed and rests it at z = 0.
Vec3 print_frame_offset(const DisplayModel &model, const PrinterProfile &profile);

// Scene for the preview client: shell surfaces as indexed meshes (decimated
// to the triangle budget), each cell as a flat triangle soup with its status
// and the colour key. With a plan, cells it could not fill are marked
// "unplannable" in display_status.
Json preview_json(const DisplayModel &model, const InjectionPlan *plan = nullptr);

} // namespace magneto
