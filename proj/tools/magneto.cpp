#include "magneto/config.hpp"
#include "magneto/error.hpp"
#include "magneto/http_service.hpp"
#include "magneto/mesh_io.hpp"
#include "magneto/pipeline.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <optional>

using namespace magneto;

namespace {

struct SpecArgs {
    std::string spec_file;
    std::string profile_file;
    std::optional<std::string> shape;
    std::optional<double> size, gap, depth, screen;
};

struct GenerateArgs {
    std::string mesh;
    std::string out_dir = ".";
    bool preview_only = false;
    bool single_sided = false;
    bool keep_position = false;
    bool serial = false;
};

void add_spec_options(CLI::App &cmd, SpecArgs &a)
{
    cmd.add_option("--spec", a.spec_file, "cell spec INI file ([cell] section)")->check(CLI::ExistingFile);
    cmd.add_option("--profile", a.profile_file, "printer profile INI file ([printer] section)")
        ->check(CLI::ExistingFile);
    cmd.add_option("--shape", a.shape, "circle, square or hexagon");
    cmd.add_option("--size", a.size, "cross-section size in mm");
    cmd.add_option("--gap", a.gap, "wall between neighbouring cells in mm");
    cmd.add_option("--depth", a.depth, "cell depth in mm");
    cmd.add_option("--screen", a.screen, "screen layer thickness in mm");
}

void add_generate_options(CLI::App &cmd, GenerateArgs &g)
{
    cmd.add_option("mesh", g.mesh, "input mesh (STL or OBJ)")->required()->check(CLI::ExistingFile);
    cmd.add_option("--out-dir", g.out_dir, "directory for the artifacts");
    cmd.add_flag("--preview-only", g.preview_only, "place and loft cells but skip the booleans");
    cmd.add_flag("--single-sided", g.single_sided, "use only the upward-facing surface of a closed input");
    cmd.add_flag("--keep-position", g.keep_position, "do not centre the model on the bed");
    cmd.add_flag("--serial", g.serial, "run the geometry kernels on one thread");
}

CellSpec resolve_spec(const SpecArgs &a)
{
    CellSpec spec = a.spec_file.empty() ? CellSpec{} : load_spec_config(a.spec_file);
    if (a.shape) {
        const auto shape = parse_shape(*a.shape);
        if (!shape)
            throw Error(ErrorCode::ConfigError, "unknown shape '" + *a.shape + "'");
        spec.shape = *shape;
    }
    if (a.size)
        spec.cross_section = *a.size;
    if (a.gap)
        spec.gap = *a.gap;
    if (a.depth)
        spec.cell_depth = *a.depth;
    if (a.screen)
        spec.screen_thickness = *a.screen;
    return spec;
}

PrinterProfile resolve_profile(const SpecArgs &a)
{
    return a.profile_file.empty() ? PrinterProfile{} : load_profile_config(a.profile_file);
}

GenerateOptions options_of(const GenerateArgs &g)
{
    GenerateOptions o;
    o.mode = g.single_sided ? ShellMode::SingleSided : ShellMode::Auto;
    o.preview_only = g.preview_only;
    o.keep_position = g.keep_position;
    o.exec = g.serial ? Execution::Serial : Execution::Parallel;
    return o;
}

// Prints the validation report and fails when the spec is out of bounds.
void validate_or_throw(const CellSpec &spec, const PrinterProfile &profile)
{
    const Json report = cmd_validate(spec, profile);
    if (!report["valid"].get<bool>()) {
        std::cout << report.dump(2) << "\n";
        require_valid(spec, profile);
    }
}

Json summary(const Session &s, const std::string &out_dir)
{
    const Json report = s.report();
    Json out{{"out_dir", out_dir}, {"artifacts", Json::array()}};
    for (const auto &[name, bytes] : s.artifacts())
        out["artifacts"].push_back(name);
    for (const char *key : {"cells", "plan", "printable", "warnings"})
        if (report.contains(key))
            out[key] = report[key];
    return out;
}

HttpService *g_server = nullptr;

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Magnetophoretic display toolchain: shell and cell generation, injection planning and G-code "
                 "post-processing"};
    app.require_subcommand(1);

    SpecArgs spec_args;
    GenerateArgs gen;
    std::string gcode_in, plan_in, gcode_out = "output.gcode";
    int port = 8080;
    std::string host = "127.0.0.1";
    double total_weight = 100.0;
    MixtureRatio ratio;

    auto *validate = app.add_subcommand("validate", "check a cell spec against the printable envelope");
    add_spec_options(*validate, spec_args);

    auto *limits = app.add_subcommand("limits", "print the cell envelope for a profile");
    limits->add_option("--profile", spec_args.profile_file, "printer profile INI file")->check(CLI::ExistingFile);

    auto *generate = app.add_subcommand("generate", "build the display model and preview");
    add_spec_options(*generate, spec_args);
    add_generate_options(*generate, gen);

    auto *plan = app.add_subcommand("plan", "build the display model and its injection plan");
    add_spec_options(*plan, spec_args);
    add_generate_options(*plan, gen);

    auto *postprocess = app.add_subcommand("postprocess", "splice a saved injection plan into slicer G-code");
    postprocess->add_option("--gcode", gcode_in, "slicer G-code")->required()->check(CLI::ExistingFile);
    postprocess->add_option("--plan", plan_in, "plan JSON")->required()->check(CLI::ExistingFile);
    postprocess->add_option("--profile", spec_args.profile_file, "printer profile INI file")
        ->check(CLI::ExistingFile);
    postprocess->add_option("-o,--output", gcode_out, "output G-code path");

    auto *pipeline = app.add_subcommand("pipeline", "generate, plan and post-process in one run");
    add_spec_options(*pipeline, spec_args);
    add_generate_options(*pipeline, gen);
    pipeline->add_option("gcode", gcode_in, "slicer G-code of the display model")->required()->check(
        CLI::ExistingFile);

    auto *serve = app.add_subcommand("serve", "run the local job service");
    serve->add_option("--port", port, "TCP port");
    serve->add_option("--host", host, "interface to bind");
    serve->add_option("--profile", spec_args.profile_file, "default printer profile INI file")
        ->check(CLI::ExistingFile);

    auto *recipe = app.add_subcommand("recipe", "weigh out the liquid mixture");
    recipe->add_option("--total", total_weight, "grams of mixture");
    recipe->add_option("--oil", ratio.oil, "oil parts by weight");
    recipe->add_option("--talc", ratio.talc, "talc parts by weight");
    recipe->add_option("--iron", ratio.iron, "iron powder parts by weight");
    recipe->add_option("--dye", ratio.dye, "dye parts by weight");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e);
    }

    try {
        if (*validate) {
            const Json report = cmd_validate(resolve_spec(spec_args), resolve_profile(spec_args));
            std::cout << report.dump(2) << "\n";
            if (!report["valid"].get<bool>())
                throw Error(report["violations"].empty() ? ErrorCode::ConfigError : ErrorCode::SpecInvalid,
                            "the cell spec or profile is invalid");
        } else if (*limits) {
            std::cout << limits_json(resolve_profile(spec_args)).dump(2) << "\n";
        } else if (*generate || *plan || *pipeline) {
            const CellSpec spec = resolve_spec(spec_args);
            const PrinterProfile profile = resolve_profile(spec_args);
            validate_or_throw(spec, profile);
            std::string gcode;
            if (*pipeline)
                gcode = read_file(gcode_in);
            const LoadedMesh input = load_mesh(gen.mesh);
            for (const std::string &w : input.warnings)
                std::cerr << "warning: " << w << "\n";
            Session session(input.mesh, spec, profile, options_of(gen));
            session.generate();
            if (*plan || *pipeline)
                session.plan();
            if (*pipeline)
                session.postprocess(gcode);
            write_artifacts(session.artifacts(), gen.out_dir);
            std::cout << summary(session, gen.out_dir).dump(2) << "\n";
        } else if (*postprocess) {
            const PrinterProfile profile = resolve_profile(spec_args);
            const InjectionPlan p = plan_from_json(Json::parse(read_file(plan_in)));
            write_file(gcode_out, cmd_postprocess(read_file(gcode_in), p, profile));
            std::cout << Json{{"output", gcode_out}, {"injections", p.points.size()}}.dump(2) << "\n";
        } else if (*serve) {
            JobService jobs;
            HttpService http(jobs, resolve_profile(spec_args));
            const int bound = http.bind(host, port);
            if (bound < 0)
                throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
            g_server = &http;
            std::signal(SIGINT, [](int) {
                if (g_server)
                    g_server->stop();
            });
            std::cerr << "listening on http://" << host << ":" << bound << "\n";
            http.serve();
        } else if (*recipe) {
            std::cout << to_json(mixture_for(total_weight, ratio)).dump(2) << "\n";
        }
    } catch (const Error &e) {
        std::cerr << error_json(e.code(), e.what()).dump() << "\n";
        return exit_code(e.code());
    } catch (const nlohmann::json::exception &e) {
        std::cerr << error_json(ErrorCode::ParseError, e.what()).dump() << "\n";
        return exit_code(ErrorCode::ParseError);
    } catch (const std::exception &e) {
        std::cerr << Json{{"error", {{"code", "Internal"}, {"exit_code", 1}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    }
    return 0;
}
