#pragma once

#include "ptmesh/mesh.hpp"

#include <filesystem>
#include <iosfwd>

namespace ptmesh
{
    struct ObjWriteOptions
    {
        bool triangulate = false;      // fan-split polygons, keeping their winding
        bool write_normals = false;    // one `vn` per face, referenced as f i//n
    };

    void write_obj(std::ostream & out, const PolygonMesh & mesh, const ObjWriteOptions & options = {});
    void export_obj(const std::filesystem::path & path, const PolygonMesh & mesh, const ObjWriteOptions & options = {});

    /// Reads `v`, `vn` and `f` records; face normals are taken from the first
    /// referenced `vn` of each face when every face has one.
    PolygonMesh read_obj(std::istream & in);
    PolygonMesh import_obj(const std::filesystem::path & path);
}
