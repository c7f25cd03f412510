#include "magneto/pipeline.hpp"

#include "magneto/constraints.hpp"
#include "magneto/error.hpp"
#include "magneto/mesh_io.hpp"
#include "magneto/preview.hpp"

namespace magneto {

namespace {

std::string json_bytes(const Json &j) { return j.dump(2) + "\n"; }

} // namespace

Json cmd_validate(const CellSpec &spec, const PrinterProfile &profile)
{
    Json report = violation_report(validate_spec(spec, profile));
    const auto problems = validate_profile(profile);
    report["profile_problems"] = problems;
    report["valid"] = report["valid"].get<bool>() && problems.empty();
    return report;
}

DisplayModel cmd_generate(const TriMesh &mesh, const CellSpec &spec, const PrinterProfile &profile,
                          const GenerateOptions &options, Vec3 *offset)
{
    require_valid(spec, profile);
    DisplayModel model = generate_display(mesh, spec, profile, options.mode, options.preview_only, options.exec);
    const Vec3 shift = options.keep_position ? Vec3::Zero() : print_frame_offset(model, profile);
    translate_display(model, shift);
    if (offset)
        *offset = shift;
    return model;
}

InjectionPlan cmd_plan(const DisplayModel &model, const PrinterProfile &profile, Execution exec)
{
    return build_plan(model, profile, exec);
}

std::string cmd_postprocess(std::string_view gcode, const InjectionPlan &plan, const PrinterProfile &profile)
{
    return emit(splice(parse_gcode(gcode), plan, profile));
}

Session::Session(TriMesh mesh, CellSpec spec, PrinterProfile profile, GenerateOptions options)
    : mesh_(std::move(mesh)), spec_(spec), profile_(std::move(profile)), options_(options)
{
}

void Session::generate()
{
    if (model_)
        throw Error(ErrorCode::JobState, "the display has already been generated");
    model_ = cmd_generate(mesh_, spec_, profile_, options_, &offset_);
    if (!options_.preview_only)
        artifacts_[artifact::kDisplay] = to_stl_binary(model_->printable);
    artifacts_[artifact::kPreview] = json_bytes(preview_json(*model_));
    refresh_report();
}

void Session::plan()
{
    if (!model_)
        throw Error(ErrorCode::JobState, "generate the display before planning");
    if (plan_)
        throw Error(ErrorCode::JobState, "the injection plan already exists");
    plan_ = build_plan(*model_, profile_, options_.exec);
    artifacts_[artifact::kPlan] = json_bytes(to_json(*plan_));
    artifacts_[artifact::kPreview] = json_bytes(preview_json(*model_, &*plan_));
    refresh_report();
}

void Session::postprocess(std::string_view gcode)
{
    if (!plan_)
        throw Error(ErrorCode::JobState, "plan the injections before post-processing G-code");
    if (checklist_)
        throw Error(ErrorCode::JobState, "the G-code has already been post-processed");
    const GcodeProgram program = parse_gcode(gcode);
    const std::string out = emit(splice(program, *plan_, profile_));
    checklist_ = preflight_checklist(program, profile_);
    artifacts_[artifact::kGcode] = out;
    refresh_report();
}

Json Session::report() const
{
    Json r = {{"spec", to_json(spec_)}, {"profile", to_json(profile_)}, {"validation", cmd_validate(spec_, profile_)}};
    if (model_) {
        const CellReport &c = model_->report;
        Json cells = to_json(c);
        const std::size_t unplannable = plan_ ? plan_->unplannable.size() : 0;
        cells["unplannable"] = unplannable;
        cells["flagged"] = c.flagged() + unplannable;
        cells["flagged_fraction"] =
            c.total() ? static_cast<double>(c.flagged() + unplannable) / static_cast<double>(c.total()) : 0.0;
        r["cells"] = cells;
        r["overlaps"] = {{"initial_pairs", model_->overlaps.initial_pairs},
                         {"initial_intersecting", model_->overlaps.initial_intersecting},
                         {"cells_intersecting", model_->overlaps.cells_intersecting},
                         {"rounds", model_->overlaps.rounds}};
        r["placement_offset_mm"] = {offset_.x(), offset_.y(), offset_.z()};
        r["printable"] = {{"closed", model_->printable.is_closed()},
                          {"faces", model_->printable.face_count()},
                          {"volume_mm3", model_->printable.empty() ? 0.0 : volume(model_->printable)}};
    }
    if (plan_) {
        r["plan"] = {{"points", plan_->points.size()},
                     {"unplannable", plan_->unplannable.size()},
                     {"total_volume_mm3", plan_->total_volume}};
    }
    if (checklist_)
        r["preflight"] = to_json(*checklist_);
    Json warnings = Json::array();
    if (model_)
        for (const std::string &w : model_->warnings)
            warnings.push_back(w);
    if (plan_)
        for (const std::string &w : plan_->warnings)
            warnings.push_back(w);
    r["warnings"] = warnings;
    return r;
}

void Session::refresh_report() { artifacts_[artifact::kReport] = json_bytes(report()); }

void write_artifacts(const std::map<std::string, std::string> &artifacts, const std::filesystem::path &dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
    for (const auto &[name, bytes] : artifacts)
        write_file(dir / name, bytes);
}

} // namespace magneto
