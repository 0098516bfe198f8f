#include "ptmesh/cli.hpp"

#include "ptmesh/extract.hpp"
#include "ptmesh/marching_cubes.hpp"
#include "ptmesh/metrics.hpp"
#include "ptmesh/obj_io.hpp"
#include "ptmesh/weight_file.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <ostream>
#include <string>

namespace ptmesh
{
    namespace
    {
        std::string num(double v)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.9g", v);
            return buf;
        }

        struct Args
        {
            std::string weights;
            std::string out;
            std::string mesh;
            std::string a;
            std::string b;
            std::string boundary = "on";
            double epsilon = 1e-4;
            bool triangulate = false;
            bool prune = false;
            bool normals = false;
            int resolution = 64;
            long samples = 100000;
            std::uint64_t seed = 0;
        };

        int cmd_extract(const Args & args, std::ostream & out, std::ostream & err)
        {
            const TrilinearNetwork net = load_network(args.weights);
            ExtractOptions options;
            options.epsilon = args.epsilon;
            options.prune = args.prune;
            options.boundary_faces = args.boundary == "on";
            ExtractionStats stats;
            const ExtractedMesh mesh = extract(net, options, &stats);
            if (mesh.faces.empty())
            {
                err << "notice: empty skeleton, writing an empty mesh\n";
            }
            if (stats.fallbacks() > 0)
            {
                err << "warning: " << stats.fallbacks() << " of " << stats.splits() << " edge splits fell back to the chord\n";
            }
            if (stats.irregular_faces > 0)
            {
                err << "warning: " << stats.irregular_faces << " faces were ordered by angle only\n";
            }
            export_obj(args.out, mesh.polygon_mesh(), {args.triangulate, args.normals});
            out << "vertices=" << mesh.vertices.size() << '\n'
                << "faces=" << mesh.faces.size() << '\n'
                << "boundary_faces=" << stats.boundary_faces << '\n'
                << "splits=" << stats.splits() << '\n'
                << "fallbacks=" << stats.fallbacks() << '\n';
            return 0;
        }

        int cmd_mc(const Args & args, std::ostream & out)
        {
            const TrilinearNetwork net = load_network(args.weights);
            const PolygonMesh mesh = marching_cubes([&](const Vec3 & p) { return net.forward(p); }, args.resolution);
            export_obj(args.out, mesh, {false, args.normals});
            out << "vertices=" << mesh.vertices.size() << '\n' << "faces=" << mesh.faces.size() << '\n';
            return 0;
        }

        int cmd_chamfer(const Args & args, std::ostream & out)
        {
            const PolygonMesh ma = import_obj(args.a);
            const PolygonMesh mb = import_obj(args.b);
            const SampledSurface sa = sample_mesh(ma, args.samples, args.seed);
            const SampledSurface sb = sample_mesh(mb, args.samples, args.seed);
            const double cd = chamfer(sa.points, sb.points);
            out << "cd=" << num(cd) << '\n' << "ce=" << num(chamfer_efficiency(static_cast<double>(ma.vertices.size()), cd)) << '\n';
            return 0;
        }

        int cmd_angular(const Args & args, std::ostream & out)
        {
            const SampledSurface sa = sample_mesh(import_obj(args.a), args.samples, args.seed);
            const SampledSurface sb = sample_mesh(import_obj(args.b), args.samples, args.seed);
            out << "ad=" << num(angular_distance_nearest(sa, sb)) << '\n';
            return 0;
        }

        int cmd_flatness(const Args & args, std::ostream & out)
        {
            const TrilinearNetwork net = load_network(args.weights);
            ExtractOptions options;
            options.epsilon = args.epsilon;
            options.boundary_faces = false;
            const ExtractedMesh mesh = extract(net, options);
            if (mesh.edges.empty())
            {
                throw std::runtime_error("the zero set has no skeleton edges");
            }
            std::vector<std::array<Vec3, 2>> edges;
            for (const auto & e : mesh.edges)
            {
                edges.push_back({mesh.vertices[static_cast<std::size_t>(e[0])], mesh.vertices[static_cast<std::size_t>(e[1])]});
            }
            out << "flatness=" << num(flatness_error(net, edges, args.epsilon)) << '\n' << "edges=" << edges.size() << '\n';
            return 0;
        }

        int cmd_sdf_error(const Args & args, std::ostream & out)
        {
            const TrilinearNetwork net = load_network(args.weights);
            const SampledSurface s = sample_mesh(import_obj(args.mesh), args.samples, args.seed);
            out << "mse_sdf=" << num(surface_sdf_error(net, s.points)) << '\n';
            return 0;
        }

        int cmd_marks(const Args & args, std::ostream & out)
        {
            const WeightFileContents w = load_weights(args.weights);
            for (double m : grid_marks(w.spec))
            {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%g", m);
                out << buf << '\n';
            }
            return 0;
        }
    }

    int run_cli(int argc, const char * const * argv, std::ostream & out, std::ostream & err)
    {
        CLI::App app("Exact zero-set meshes of piecewise trilinear networks", "ptmesh");
        app.require_subcommand(1);
        Args args;

        auto * extract = app.add_subcommand("extract", "Extract the zero-set mesh");
        extract->add_option("--weights", args.weights, "Weight file")->required()->check(CLI::ExistingFile);
        extract->add_option("--epsilon", args.epsilon, "Zero tolerance")->check(CLI::PositiveNumber);
        extract->add_option("--out", args.out, "Output OBJ")->required();
        extract->add_flag("--triangulate", args.triangulate, "Fan-triangulate polygons");
        extract->add_flag("--prune", args.prune, "Drop edges that cannot reach the zero set");
        extract->add_option("--boundary-faces", args.boundary, "Close the solid at the unit-cube walls")->check(CLI::IsMember({"on", "off"}));
        extract->add_flag("--normals", args.normals, "Write one vn record per face");

        auto * mc = app.add_subcommand("mc", "Marching-cubes baseline");
        mc->add_option("--weights", args.weights, "Weight file")->required()->check(CLI::ExistingFile);
        mc->add_option("--res", args.resolution, "Samples per axis")->check(CLI::Range(2, 2048));
        mc->add_option("--out", args.out, "Output OBJ")->required();
        mc->add_flag("--normals", args.normals, "Write one vn record per face");

        auto * eval = app.add_subcommand("eval", "Mesh and network metrics");
        eval->require_subcommand(1);
        auto * chamfer_cmd = eval->add_subcommand("chamfer", "Chamfer distance between two meshes");
        auto * angular_cmd = eval->add_subcommand("angular", "Angular distance between two meshes");
        for (auto * c : {chamfer_cmd, angular_cmd})
        {
            c->add_option("a", args.a, "First OBJ")->required()->check(CLI::ExistingFile);
            c->add_option("b", args.b, "Second OBJ")->required()->check(CLI::ExistingFile);
            c->add_option("--samples", args.samples, "Samples per mesh")->check(CLI::PositiveNumber);
            c->add_option("--seed", args.seed, "Sampling seed");
        }
        auto * flatness_cmd = eval->add_subcommand("flatness", "Flatness error over the skeleton edges");
        flatness_cmd->add_option("--weights", args.weights, "Weight file")->required()->check(CLI::ExistingFile);
        flatness_cmd->add_option("--epsilon", args.epsilon, "Zero tolerance")->check(CLI::PositiveNumber);
        auto * sdf_cmd = eval->add_subcommand("sdf-error", "Mean squared network output on a mesh");
        sdf_cmd->add_option("--weights", args.weights, "Weight file")->required()->check(CLI::ExistingFile);
        sdf_cmd->add_option("--mesh", args.mesh, "OBJ to sample")->required()->check(CLI::ExistingFile);
        sdf_cmd->add_option("--samples", args.samples, "Samples")->check(CLI::PositiveNumber);
        sdf_cmd->add_option("--seed", args.seed, "Sampling seed");

        auto * marks = app.add_subcommand("marks", "Print the grid marks of a weight file");
        marks->add_option("--weights", args.weights, "Weight file")->required()->check(CLI::ExistingFile);

        try
        {
            app.parse(argc, argv);
        }
        catch (const CLI::CallForHelp &)
        {
            out << app.help();
            return 0;
        }
        catch (const CLI::ParseError & e)
        {
            err << "error: " << e.what() << '\n';
            return 2;
        }

        try
        {
            if (extract->parsed())
                return cmd_extract(args, out, err);
            if (mc->parsed())
                return cmd_mc(args, out);
            if (chamfer_cmd->parsed())
                return cmd_chamfer(args, out);
            if (angular_cmd->parsed())
                return cmd_angular(args, out);
            if (flatness_cmd->parsed())
                return cmd_flatness(args, out);
            if (sdf_cmd->parsed())
                return cmd_sdf_error(args, out);
            if (marks->parsed())
                return cmd_marks(args, out);
        }
        catch (const std::exception & e)
        {
            err << "error: " << e.what() << '\n';
            return 1;
        }
        return 2;
    }
}
