#include "magneto/mesh_io.hpp"

#include "magneto/error.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace magneto {

namespace {

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool looks_binary_stl(std::string_view bytes)
{
    if (bytes.size() < 84)
        return false;
    std::uint32_t count = 0;
    std::memcpy(&count, bytes.data() + 80, 4);
    return bytes.size() == 84 + std::size_t{count} * 50;
}

LoadedMesh finish(std::vector<Vec3> soup_vertices, std::vector<Face> faces, std::vector<std::string> warnings)
{
    if (faces.empty())
        throw Error(ErrorCode::ParseError, "mesh contains no faces");
    TriMesh welded = weld(soup_vertices, faces, kWeldTolerance);
    LoadedMesh out;
    out.non_manifold = welded.non_manifold_edge_count() > 0;
    if (out.non_manifold)
        warnings.push_back("non-manifold: " + std::to_string(welded.non_manifold_edge_count()) +
                           " edges shared by more than two faces");
    if (welded.degenerate_face_count() > 0)
        warnings.push_back(std::to_string(welded.degenerate_face_count()) + " degenerate faces");
    out.closed = welded.is_closed();
    if (!out.closed && welded.is_watertight())
        warnings.push_back("watertight but inward-facing (negative volume)");
    out.mesh = std::move(welded);
    out.warnings = std::move(warnings);
    return out;
}

LoadedMesh parse_stl_binary(std::string_view bytes)
{
    if (!looks_binary_stl(bytes))
        throw Error(ErrorCode::ParseError, "binary STL size does not match its triangle count");
    std::uint32_t count = 0;
    std::memcpy(&count, bytes.data() + 80, 4);
    std::vector<Vec3> verts;
    std::vector<Face> faces;
    verts.reserve(std::size_t{count} * 3);
    const char *p = bytes.data() + 84;
    for (std::uint32_t i = 0; i < count; ++i, p += 50) {
        float v[12];
        std::memcpy(v, p, sizeof v);
        const int base = static_cast<int>(verts.size());
        for (int k = 0; k < 3; ++k)
            verts.emplace_back(v[3 + 3 * k], v[4 + 3 * k], v[5 + 3 * k]);
        faces.push_back({base, base + 1, base + 2});
    }
    return finish(std::move(verts), std::move(faces), {});
}

LoadedMesh parse_stl_ascii(std::string_view bytes)
{
    std::istringstream in{std::string(bytes)};
    std::string token;
    std::vector<Vec3> verts;
    std::vector<Face> faces;
    std::vector<Vec3> pending;
    while (in >> token) {
        if (token == "vertex") {
            double x, y, z;
            if (!(in >> x >> y >> z))
                throw Error(ErrorCode::ParseError, "malformed ASCII STL vertex");
            pending.emplace_back(x, y, z);
        } else if (token == "endfacet") {
            if (pending.size() < 3)
                throw Error(ErrorCode::ParseError, "ASCII STL facet with fewer than three vertices");
            const int base = static_cast<int>(verts.size());
            verts.insert(verts.end(), pending.begin(), pending.end());
            for (std::size_t k = 1; k + 1 < pending.size(); ++k)
                faces.push_back({base, base + static_cast<int>(k), base + static_cast<int>(k) + 1});
            pending.clear();
        }
    }
    return finish(std::move(verts), std::move(faces), {});
}

LoadedMesh parse_obj(std::string_view bytes)
{
    std::istringstream in{std::string(bytes)};
    std::string line;
    std::vector<Vec3> verts;
    std::vector<Face> faces;
    std::vector<std::string> warnings;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#')
            continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z))
                throw Error(ErrorCode::ParseError, "malformed OBJ vertex on line " + std::to_string(line_no));
            verts.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<int> poly;
            std::string ref;
            while (ls >> ref) {
                const auto slash = ref.find('/');
                int idx = 0;
                try {
                    idx = std::stoi(ref.substr(0, slash));
                } catch (const std::exception &) {
                    throw Error(ErrorCode::ParseError, "malformed OBJ face on line " + std::to_string(line_no));
                }
                idx = idx < 0 ? static_cast<int>(verts.size()) + idx : idx - 1;
                if (idx < 0 || idx >= static_cast<int>(verts.size()))
                    throw Error(ErrorCode::ParseError, "OBJ face index out of range on line " + std::to_string(line_no));
                poly.push_back(idx);
            }
            if (poly.size() < 3)
                throw Error(ErrorCode::ParseError, "OBJ face with fewer than three vertices on line " +
                                                       std::to_string(line_no));
            for (std::size_t k = 1; k + 1 < poly.size(); ++k)
                faces.push_back({poly[0], poly[k], poly[k + 1]});
        }
    }
    return finish(std::move(verts), std::move(faces), std::move(warnings));
}

} // namespace

MeshFormat detect_format(const std::filesystem::path &path, std::string_view bytes)
{
    const std::string ext = lower(path.extension().string());
    if (ext == ".obj")
        return MeshFormat::Obj;
    if (looks_binary_stl(bytes))
        return MeshFormat::StlBinary;
    if (ext == ".stl" || bytes.substr(0, 5) == "solid")
        return MeshFormat::StlAscii;
    throw Error(ErrorCode::ParseError, "cannot determine mesh format of " + path.string());
}

LoadedMesh parse_mesh(std::string_view bytes, MeshFormat format)
{
    switch (format) {
    case MeshFormat::StlBinary: return parse_stl_binary(bytes);
    case MeshFormat::StlAscii: return parse_stl_ascii(bytes);
    case MeshFormat::Obj: return parse_obj(bytes);
    case MeshFormat::Auto: return parse_mesh(bytes, detect_format({}, bytes));
    }
    throw Error(ErrorCode::InvalidArgument, "unknown mesh format");
}

LoadedMesh load_mesh(const std::filesystem::path &path, MeshFormat format)
{
    const std::string bytes = read_file(path);
    if (format == MeshFormat::Auto)
        format = detect_format(path, bytes);
    return parse_mesh(bytes, format);
}

std::string to_stl_binary(const TriMesh &mesh, std::string_view header)
{
    std::string out(84 + mesh.face_count() * 50, '\0');
    std::memcpy(out.data(), header.data(), std::min<std::size_t>(header.size(), 80));
    const auto count = static_cast<std::uint32_t>(mesh.face_count());
    std::memcpy(out.data() + 80, &count, 4);
    char *p = out.data() + 84;
    for (std::size_t f = 0; f < mesh.face_count(); ++f, p += 50) {
        const Vec3 n = mesh.face_normal(f);
        const auto tri = mesh.triangle(f);
        float v[12] = {static_cast<float>(n.x()), static_cast<float>(n.y()), static_cast<float>(n.z())};
        for (int k = 0; k < 3; ++k)
            for (int c = 0; c < 3; ++c)
                v[3 + 3 * k + c] = static_cast<float>(tri[k][c]);
        std::memcpy(p, v, sizeof v);
    }
    return out;
}

void write_stl_binary(const std::filesystem::path &path, const TriMesh &mesh)
{
    write_file(path, to_stl_binary(mesh));
}

std::string to_stl_ascii(const TriMesh &mesh, std::string_view name)
{
    std::ostringstream out;
    out << std::setprecision(9);
    out << "solid " << name << "\n";
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        const Vec3 n = mesh.face_normal(f);
        out << "  facet normal " << n.x() << ' ' << n.y() << ' ' << n.z() << "\n    outer loop\n";
        for (const Vec3 &v : mesh.triangle(f))
            out << "      vertex " << v.x() << ' ' << v.y() << ' ' << v.z() << "\n";
        out << "    endloop\n  endfacet\n";
    }
    out << "endsolid " << name << "\n";
    return out.str();
}

std::string to_obj(const TriMesh &mesh)
{
    std::ostringstream out;
    out << std::setprecision(12);
    for (const Vec3 &v : mesh.vertices())
        out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << "\n";
    for (const Face &f : mesh.faces())
        out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << "\n";
    return out.str();
}

std::string read_file(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path &path, std::string_view bytes)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

} // namespace magneto
