// SPDX-License-Identifier: Apache-2.0
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lse/scene_io.hpp"

namespace lse {

namespace {

enum class PlyType { Float32, Float64, Uint8, Int8, Uint16, Int16, Uint32, Int32 };

size_t ply_type_size(PlyType t) {
    switch (t) {
        case PlyType::Float32: return 4;
        case PlyType::Float64: return 8;
        case PlyType::Uint8:
        case PlyType::Int8: return 1;
        case PlyType::Uint16:
        case PlyType::Int16: return 2;
        default: return 4;
    }
}

PlyType parse_ply_type(const std::string& name) {
    static const std::map<std::string, PlyType> kTypes = {
        {"float", PlyType::Float32},  {"float32", PlyType::Float32},
        {"double", PlyType::Float64}, {"float64", PlyType::Float64},
        {"uchar", PlyType::Uint8},    {"uint8", PlyType::Uint8},
        {"char", PlyType::Int8},      {"int8", PlyType::Int8},
        {"ushort", PlyType::Uint16},  {"uint16", PlyType::Uint16},
        {"short", PlyType::Int16},    {"int16", PlyType::Int16},
        {"uint", PlyType::Uint32},    {"uint32", PlyType::Uint32},
        {"int", PlyType::Int32},      {"int32", PlyType::Int32},
    };
    const auto it = kTypes.find(name);
    if (it == kTypes.end()) throw std::runtime_error("ply: unknown property type '" + name + "'");
    return it->second;
}

double decode_ply_scalar(const char* bytes, PlyType t) {
    switch (t) {
        case PlyType::Float32: { float v; std::memcpy(&v, bytes, 4); return v; }
        case PlyType::Float64: { double v; std::memcpy(&v, bytes, 8); return v; }
        case PlyType::Uint8: { uint8_t v; std::memcpy(&v, bytes, 1); return v; }
        case PlyType::Int8: { int8_t v; std::memcpy(&v, bytes, 1); return v; }
        case PlyType::Uint16: { uint16_t v; std::memcpy(&v, bytes, 2); return v; }
        case PlyType::Int16: { int16_t v; std::memcpy(&v, bytes, 2); return v; }
        case PlyType::Uint32: { uint32_t v; std::memcpy(&v, bytes, 4); return v; }
        default: { int32_t v; std::memcpy(&v, bytes, 4); return v; }
    }
}

// Renormalizes unless already unit; exact unit inputs pass through bitwise
// so binary round trips stay identical.
Vec3 renormalize(const Vec3& n) {
    const double len = length(n);
    return std::abs(len - 1.0) <= 1e-12 ? n : (len > 0.0 ? n / len : Vec3{0.0, 0.0, 1.0});
}

struct PlyProperty {
    std::string name;
    PlyType type = PlyType::Float32;
    size_t offset = 0;      // within a binary vertex record
    int column = 0;         // within an ascii vertex line
    bool is_list = false;
    PlyType count_type = PlyType::Uint8;
};

struct PlyElement {
    std::string name;
    size_t count = 0;
    std::vector<PlyProperty> properties;
    size_t record_size = 0;  // fixed-size elements only
};

TriangleMesh load_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("ply: cannot open " + path);

    std::string line;
    std::getline(in, line);
    if (line.rfind("ply", 0) != 0) throw std::runtime_error("ply: missing 'ply' magic in " + path);

    bool binary = false;
    std::vector<PlyElement> elements;
    while (std::getline(in, line)) {
        // Tolerate \r\n files.
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string keyword;
        ls >> keyword;
        if (keyword == "comment" || keyword == "obj_info" || keyword.empty()) continue;
        if (keyword == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "binary_little_endian") binary = true;
            else if (fmt == "ascii") binary = false;
            else throw std::runtime_error("ply: unsupported format '" + fmt + "'");
        } else if (keyword == "element") {
            PlyElement element;
            ls >> element.name >> element.count;
            elements.push_back(element);
        } else if (keyword == "property") {
            if (elements.empty()) throw std::runtime_error("ply: property before element");
            PlyElement& element = elements.back();
            PlyProperty prop;
            std::string type_name;
            ls >> type_name;
            if (type_name == "list") {
                std::string count_name, item_name;
                ls >> count_name >> item_name >> prop.name;
                prop.is_list = true;
                prop.count_type = parse_ply_type(count_name);
                prop.type = parse_ply_type(item_name);
            } else {
                prop.type = parse_ply_type(type_name);
                ls >> prop.name;
                prop.offset = element.record_size;
                prop.column = static_cast<int>(element.properties.size());
                element.record_size += ply_type_size(prop.type);
            }
            element.properties.push_back(prop);
        } else if (keyword == "end_header") {
            break;
        } else {
            throw std::runtime_error("ply: unexpected header keyword '" + keyword + "'");
        }
    }

    const PlyElement* vertex_elem = nullptr;
    const PlyElement* face_elem = nullptr;
    for (const auto& e : elements) {
        if (e.name == "vertex") vertex_elem = &e;
        if (e.name == "face") face_elem = &e;
    }
    if (!vertex_elem) throw std::runtime_error("ply: no vertex element in " + path);

    auto find_prop = [&](const char* name) -> const PlyProperty* {
        for (const auto& p : vertex_elem->properties) {
            if (p.name == name) return &p;
        }
        return nullptr;
    };
    const PlyProperty* px = find_prop("x");
    const PlyProperty* py = find_prop("y");
    const PlyProperty* pz = find_prop("z");
    if (!px || !py || !pz) throw std::runtime_error("ply: missing vertex positions in " + path);
    const PlyProperty* pnx = find_prop("nx");
    const PlyProperty* pny = find_prop("ny");
    const PlyProperty* pnz = find_prop("nz");
    const bool has_normals = pnx && pny && pnz;
    const PlyProperty* pr = find_prop("red");
    const PlyProperty* pg = find_prop("green");
    const PlyProperty* pb = find_prop("blue");
    if (!pr || !pg || !pb) {
        throw std::runtime_error("ply: missing vertex colors in " + path +
                                 " (albedos are required input)");
    }

    TriangleMesh mesh;
    mesh.vertices.resize(vertex_elem->count);
    mesh.albedos.resize(vertex_elem->count);
    if (has_normals) mesh.normals.resize(vertex_elem->count);

    auto color_scale = [](const PlyProperty& p) {
        return (p.type == PlyType::Float32 || p.type == PlyType::Float64) ? 1.0 : 1.0 / 255.0;
    };

    if (binary) {
        std::vector<char> record(vertex_elem->record_size);
        for (size_t i = 0; i < vertex_elem->count; ++i) {
            in.read(record.data(), static_cast<std::streamsize>(record.size()));
            if (!in) throw std::runtime_error("ply: truncated vertex data in " + path);
            auto get = [&](const PlyProperty* p) {
                return decode_ply_scalar(record.data() + p->offset, p->type);
            };
            mesh.vertices[i] = {get(px), get(py), get(pz)};
            if (has_normals) mesh.normals[i] = renormalize({get(pnx), get(pny), get(pnz)});
            mesh.albedos[i] = {get(pr) * color_scale(*pr), get(pg) * color_scale(*pg),
                               get(pb) * color_scale(*pb)};
        }
    } else {
        for (size_t i = 0; i < vertex_elem->count; ++i) {
            std::vector<double> cols;
            cols.reserve(vertex_elem->properties.size());
            for (size_t c = 0; c < vertex_elem->properties.size(); ++c) {
                double v;
                if (!(in >> v)) throw std::runtime_error("ply: truncated vertex data in " + path);
                cols.push_back(v);
            }
            auto get = [&](const PlyProperty* p) { return cols[p->column]; };
            mesh.vertices[i] = {get(px), get(py), get(pz)};
            if (has_normals) mesh.normals[i] = renormalize({get(pnx), get(pny), get(pnz)});
            mesh.albedos[i] = {get(pr) * color_scale(*pr), get(pg) * color_scale(*pg),
                               get(pb) * color_scale(*pb)};
        }
    }

    if (face_elem) {
        const PlyProperty* list_prop = nullptr;
        for (const auto& p : face_elem->properties) {
            if (p.is_list && (p.name == "vertex_indices" || p.name == "vertex_index")) {
                list_prop = &p;
            }
        }
        if (!list_prop) throw std::runtime_error("ply: face element without index list in " + path);
        for (size_t f = 0; f < face_elem->count; ++f) {
            size_t count = 0;
            std::vector<uint32_t> indices;
            if (binary) {
                std::vector<char> buf(ply_type_size(list_prop->count_type));
                in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
                count = static_cast<size_t>(decode_ply_scalar(buf.data(), list_prop->count_type));
                std::vector<char> item(ply_type_size(list_prop->type));
                for (size_t k = 0; k < count; ++k) {
                    in.read(item.data(), static_cast<std::streamsize>(item.size()));
                    indices.push_back(
                        static_cast<uint32_t>(decode_ply_scalar(item.data(), list_prop->type)));
                }
            } else {
                in >> count;
                for (size_t k = 0; k < count; ++k) {
                    uint32_t idx;
                    in >> idx;
                    indices.push_back(idx);
                }
            }
            if (!in) throw std::runtime_error("ply: truncated face data in " + path);
            // Fan-triangulate polygons.
            for (size_t k = 2; k < count; ++k) {
                mesh.triangles.push_back({indices[0], indices[k - 1], indices[k]});
            }
        }
    }

    if (!has_normals) mesh.compute_vertex_normals();
    mesh.validate();
    return mesh;
}

TriangleMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("obj: cannot open " + path);

    TriangleMesh mesh;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string keyword;
        ls >> keyword;
        if (keyword == "v") {
            double x, y, z;
            ls >> x >> y >> z;
            mesh.vertices.push_back({x, y, z});
            double r, g, b;
            if (ls >> r >> g >> b) {
                mesh.albedos.push_back({r, g, b});
            } else {
                throw std::runtime_error("obj: vertex without RGB extension in " + path +
                                         " (albedos are required input)");
            }
        } else if (keyword == "f") {
            std::vector<uint32_t> indices;
            std::string corner;
            while (ls >> corner) {
                // "v", "v/vt", "v//vn", "v/vt/vn" forms; only v is used.
                const size_t slash = corner.find('/');
                const long v = std::stol(corner.substr(0, slash));
                const long resolved = v > 0 ? v - 1 : static_cast<long>(mesh.vertices.size()) + v;
                indices.push_back(static_cast<uint32_t>(resolved));
            }
            for (size_t k = 2; k < indices.size(); ++k) {
                mesh.triangles.push_back({indices[0], indices[k - 1], indices[k]});
            }
        }
        // vn/vt lines are skipped; normals are recomputed area-weighted below.
    }
    mesh.compute_vertex_normals();
    mesh.validate();
    return mesh;
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

TriangleMesh load_mesh(const std::string& path) {
    if (has_suffix(path, ".ply")) return load_ply(path);
    if (has_suffix(path, ".obj")) return load_obj(path);
    throw std::runtime_error("mesh: unsupported extension for " + path + " (use .ply or .obj)");
}

void save_mesh_ply(const TriangleMesh& mesh, const std::string& path) {
    mesh.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("ply: cannot open " + path + " for writing");

    // Double-precision properties keep save/load round trips bitwise.
    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << mesh.vertex_count() << "\n";
    for (const char* name : {"x", "y", "z", "nx", "ny", "nz", "red", "green", "blue"}) {
        out << "property double " << name << "\n";
    }
    out << "element face " << mesh.triangle_count() << "\n";
    out << "property list uchar uint vertex_indices\n";
    out << "end_header\n";

    for (size_t i = 0; i < mesh.vertex_count(); ++i) {
        const double record[9] = {mesh.vertices[i].x, mesh.vertices[i].y, mesh.vertices[i].z,
                                  mesh.normals[i].x,  mesh.normals[i].y,  mesh.normals[i].z,
                                  mesh.albedos[i].x,  mesh.albedos[i].y,  mesh.albedos[i].z};
        out.write(reinterpret_cast<const char*>(record), sizeof(record));
    }
    for (const auto& tri : mesh.triangles) {
        const uint8_t count = 3;
        out.write(reinterpret_cast<const char*>(&count), 1);
        out.write(reinterpret_cast<const char*>(tri.data()), 3 * sizeof(uint32_t));
    }
    if (!out) throw std::runtime_error("ply: write failed for " + path);
}

}  // namespace lse
