#pragma once

#include "magneto/cells.hpp"
#include "magneto/gcode.hpp"
#include "magneto/planner.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace magneto {

struct GenerateOptions {
    ShellMode mode = ShellMode::Auto;
    bool preview_only = false;
    // Leave the model where the input put it instead of centring it on the bed.
    bool keep_position = false;
    Execution exec = Execution::Parallel;
};

// {valid, violations, profile_problems}
Json cmd_validate(const CellSpec &spec, const PrinterProfile &profile);

// Validates, builds the display and moves it into the print frame; the
// applied translation is stored in `offset` when given.
DisplayModel cmd_generate(const TriMesh &mesh, const CellSpec &spec, const PrinterProfile &profile,
                          const GenerateOptions &options = {}, Vec3 *offset = nullptr);
InjectionPlan cmd_plan(const DisplayModel &model, const PrinterProfile &profile,
                       Execution exec = Execution::Parallel);
std::string cmd_postprocess(std::string_view gcode, const InjectionPlan &plan, const PrinterProfile &profile);

namespace artifact {
inline constexpr const char *kDisplay = "display.stl";
inline constexpr const char *kPreview = "preview.json";
inline constexpr const char *kPlan = "plan.json";
inline constexpr const char *kGcode = "output.gcode";
inline constexpr const char *kReport = "report.json";
} // namespace artifact

// One design run, advanced stage by stage. Each stage refreshes the
// artifacts it owns; the CLI and the job service both drive this class, so
// identical inputs give identical bytes.
class Session {
public:
    Session(TriMesh mesh, CellSpec spec, PrinterProfile profile, GenerateOptions options = {});

    void generate();
    void plan();
    void postprocess(std::string_view gcode);

    const CellSpec &spec() const { return spec_; }
    const PrinterProfile &profile() const { return profile_; }
    const GenerateOptions &options() const { return options_; }
    const std::optional<DisplayModel> &model() const { return model_; }
    const std::optional<InjectionPlan> &injection_plan() const { return plan_; }
    const std::map<std::string, std::string> &artifacts() const { return artifacts_; }
    Json report() const;

private:
    void refresh_report();

    TriMesh mesh_;
    CellSpec spec_;
    PrinterProfile profile_;
    GenerateOptions options_;
    std::optional<DisplayModel> model_;
    Vec3 offset_ = Vec3::Zero();
    std::optional<InjectionPlan> plan_;
    std::optional<std::vector<ChecklistItem>> checklist_;
    std::map<std::string, std::string> artifacts_;
};

void write_artifacts(const std::map<std::string, std::string> &artifacts, const std::filesystem::path &dir);

} // namespace magneto
