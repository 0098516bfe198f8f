#include "ptmesh/obj_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ptmesh
{
    namespace
    {
        std::string format_g(double v)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.9g", v);
            return buf;
        }
    }

    void write_obj(std::ostream & out, const PolygonMesh & mesh, const ObjWriteOptions & options)
    {
        out << "# ptmesh " << mesh.vertices.size() << " vertices " << mesh.faces.size() << " faces\n";
        for (const auto & v : mesh.vertices)
        {
            out << "v " << format_g(v.x()) << ' ' << format_g(v.y()) << ' ' << format_g(v.z()) << '\n';
        }
        const bool normals = options.write_normals && mesh.normals.size() == mesh.faces.size();
        if (normals)
        {
            for (const auto & n : mesh.normals)
            {
                out << "vn " << format_g(n.x()) << ' ' << format_g(n.y()) << ' ' << format_g(n.z()) << '\n';
            }
        }
        auto corner = [&](int v, std::size_t f) {
            std::string s = std::to_string(v + 1);
            if (normals)
            {
                s += "//" + std::to_string(f + 1);
            }
            return s;
        };
        for (std::size_t f = 0; f < mesh.faces.size(); ++f)
        {
            const auto & poly = mesh.faces[f];
            if (options.triangulate)
            {
                for (std::size_t i = 1; i + 1 < poly.size(); ++i)
                {
                    out << "f " << corner(poly[0], f) << ' ' << corner(poly[i], f) << ' ' << corner(poly[i + 1], f) << '\n';
                }
            }
            else
            {
                out << 'f';
                for (int v : poly)
                {
                    out << ' ' << corner(v, f);
                }
                out << '\n';
            }
        }
    }

    void export_obj(const std::filesystem::path & path, const PolygonMesh & mesh, const ObjWriteOptions & options)
    {
        std::ofstream out(path);
        if (!out)
        {
            throw std::runtime_error("cannot open " + path.string() + " for writing");
        }
        write_obj(out, mesh, options);
        if (!out)
        {
            throw std::runtime_error("write failed for " + path.string());
        }
    }

    PolygonMesh read_obj(std::istream & in)
    {
        PolygonMesh mesh;
        std::vector<Vec3> vn;
        std::vector<int> face_normal;
        std::string line;
        int line_no = 0;
        while (std::getline(in, line))
        {
            ++line_no;
            std::istringstream ls(line);
            std::string tag;
            if (!(ls >> tag) || tag[0] == '#')
            {
                continue;
            }
            if (tag == "v" || tag == "vn")
            {
                Vec3 p;
                if (!(ls >> p.x() >> p.y() >> p.z()))
                {
                    throw std::runtime_error("malformed " + tag + " record on line " + std::to_string(line_no));
                }
                (tag == "v" ? mesh.vertices : vn).push_back(p);
            }
            else if (tag == "f")
            {
                std::vector<int> poly;
                int normal = -1;
                std::string tok;
                while (ls >> tok)
                {
                    const auto slash = tok.find('/');
                    int idx = std::stoi(tok.substr(0, slash));
                    idx = idx < 0 ? static_cast<int>(mesh.vertices.size()) + idx : idx - 1;
                    if (idx < 0 || idx >= static_cast<int>(mesh.vertices.size()))
                    {
                        throw std::runtime_error("face index out of range on line " + std::to_string(line_no));
                    }
                    poly.push_back(idx);
                    const auto last = tok.rfind('/');
                    if (normal < 0 && slash != std::string::npos && last + 1 < tok.size() && tok.find('/', slash + 1) != std::string::npos)
                    {
                        int n = std::stoi(tok.substr(last + 1));
                        normal = n < 0 ? static_cast<int>(vn.size()) + n : n - 1;
                    }
                }
                if (poly.size() < 3)
                {
                    throw std::runtime_error("face with fewer than three vertices on line " + std::to_string(line_no));
                }
                mesh.faces.push_back(std::move(poly));
                face_normal.push_back(normal);
            }
        }
        bool all = !face_normal.empty();
        for (int n : face_normal)
        {
            all = all && n >= 0 && n < static_cast<int>(vn.size());
        }
        if (all)
        {
            for (int n : face_normal)
            {
                mesh.normals.push_back(vn[static_cast<std::size_t>(n)]);
            }
        }
        return mesh;
    }

    PolygonMesh import_obj(const std::filesystem::path & path)
    {
        std::ifstream in(path);
        if (!in)
        {
            throw std::runtime_error("cannot open " + path.string());
        }
        return read_obj(in);
    }
}
