#pragma once

#include "magneto/tri_mesh.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace magneto {

enum class MeshFormat { Auto, StlBinary, StlAscii, Obj };

inline constexpr double kWeldTolerance = 1e-6;

struct LoadedMesh {
    TriMesh mesh;
    bool closed = false;
    bool non_manifold = false;
    std::vector<std::string> warnings;
};

// Parses STL (binary or ASCII) or OBJ, welds coincident vertices and reports
// closedness. Non-manifold edges produce a warning, not an error.
LoadedMesh load_mesh(const std::filesystem::path &path, MeshFormat format = MeshFormat::Auto);
LoadedMesh parse_mesh(std::string_view bytes, MeshFormat format);

// Format guess from the file extension and, for STL, the payload.
MeshFormat detect_format(const std::filesystem::path &path, std::string_view bytes);

std::string to_stl_binary(const TriMesh &mesh, std::string_view header = "magneto");
void write_stl_binary(const std::filesystem::path &path, const TriMesh &mesh);
std::string to_stl_ascii(const TriMesh &mesh, std::string_view name = "magneto");
std::string to_obj(const TriMesh &mesh);

std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, std::string_view bytes);

} // namespace magneto
