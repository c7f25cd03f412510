#pragma once

#include "magneto/config.hpp"
#include "magneto/planner.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace magneto {

struct GcodeLayer {
    int index = 0;
    double z = 0.0;
    // Raw lines, starting with the layer marker when the file has one.
    std::vector<std::string> commands;

    bool operator==(const GcodeLayer &) const = default;
};

// Lines are stored without the '\n' terminator but otherwise verbatim
// (including any '\r'), so emit() reproduces the input byte for byte.
struct GcodeProgram {
    std::vector<std::string> prelude;
    std::vector<GcodeLayer> layers;
    std::vector<std::string> postlude;
    std::string flavor; // "Cura", "PrusaSlicer" or empty
    bool layer_markers = false;
    bool crlf = false;
    bool trailing_newline = true;

    bool operator==(const GcodeProgram &) const = default;
};

// Splits on Cura ";LAYER:n" or PrusaSlicer ";LAYER_CHANGE" markers, falling
// back to tracking absolute Z moves. Throws NoLayersFound when neither
// exists and ParseError when marked layers do not rise strictly.
GcodeProgram parse_gcode(std::string_view text);
std::string emit(const GcodeProgram &program);

struct InjectionBlock {
    int cell_id = 0;
    std::vector<std::string> commands;
};

// Travel so the syringe tip sits over the point, engage, plunge the fill
// volume, retract a fixed volume, disengage. Throws OutOfBed when the
// nozzle would have to leave the bed.
InjectionBlock make_injection_block(const InjectionPoint &point, const PrinterProfile &profile);

// Extruder state at some position in a program, used to restore it after a
// spliced injection series.
struct ExtrusionState {
    bool relative_e = false;
    double e = 0.0;
    double feedrate = 0.0; // 0 when none has been set
};

// Filament over-retract, tool switch and liquid over-purge at the dump area.
std::vector<std::string> switch_to_injection(const PrinterProfile &profile, int layer_index, double z);
// Tool switch back, filament re-prime and brush wipe, then the extruder
// state the slicer expects.
std::vector<std::string> switch_to_extrusion(const PrinterProfile &profile, const ExtrusionState &restore,
                                             double z);

// Inserts each layer's injection series after the layer's last command.
// Throws LayerMismatch when a point's z is not on a layer of the program.
GcodeProgram splice(const GcodeProgram &program, const InjectionPlan &plan, const PrinterProfile &profile);

struct SpliceAudit {
    std::size_t switch_in = 0;
    std::size_t switch_out = 0;
    std::size_t blocks = 0;
    std::vector<int> injection_layers; // program layer indices with blocks
    std::vector<int> cell_order;
    double plunge_e = 0.0;
    double purge_e = 0.0;
    // Absolute Z words inside layers that drop below the layer's own z.
    std::size_t z_regressions = 0;
};

SpliceAudit audit(const GcodeProgram &program);

struct ChecklistItem {
    std::string item;
    std::string status; // "ok", "warn" or "manual"
    std::string detail;
};

// Slicer settings the printing routine depends on; reported, not enforced.
std::vector<ChecklistItem> preflight_checklist(const GcodeProgram &program, const PrinterProfile &profile);
Json to_json(const std::vector<ChecklistItem> &items);

} // namespace magneto
