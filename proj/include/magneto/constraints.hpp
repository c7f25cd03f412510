#pragma once

#include "magneto/geometry.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace magneto {

enum class CellShape { Circle, Square, Hexagon };

std::string_view to_string(CellShape shape);
std::optional<CellShape> parse_shape(std::string_view text);

// Cross-section size is the circle diameter, the square side or the hexagon's
// across-corners diagonal.
struct CellSpec {
    CellShape shape = CellShape::Hexagon;
    double cross_section = 4.0;
    double gap = 1.0;
    double cell_depth = 5.0;
    double screen_thickness = 0.6;

    double pitch() const { return cross_section + gap; }
    bool operator==(const CellSpec &) const = default;
};

struct PrinterProfile {
    double fdm_nozzle_diameter = 0.4;
    double injector_nozzle_diameter = 2.1;
    double layer_height = 0.2;
    double max_overhang = 7.0;
    // Syringe tip position minus FDM nozzle tip position.
    Vec3 injector_offset = Vec3(30.0, 0.0, 0.0);
    Vec2 bed_size = Vec2(220.0, 220.0);
    // Where the syringe tip purges liquid (bed coordinates of the tip).
    Vec2 dump_area = Vec2(40.0, 5.0);
    // Where the FDM nozzle is wiped.
    Vec2 brush_area = Vec2(5.0, 30.0);
    std::string engage_macro = "M280 P0 S90 ; lower injector";
    std::string disengage_macro = "M280 P0 S0 ; raise injector";
    double retraction_volume = 10.0;
    double purge_volume = 40.0;
    double filament_retract = 6.0;
    double e_per_mm3 = 0.01;
    double travel_feedrate = 6000.0;
    double injection_feedrate = 120.0;
    // Extra height of the syringe tip above the injection plane.
    double z_clearance = 0.0;
    // Margin added to the injector nozzle diameter in the opening test.
    double injection_clearance = 0.0;
    // Share of the cell volume that must lie below the injection plane.
    double fill_fraction = 0.8;
    double syringe_capacity = 30000.0;
    bool offset_inward = false;

    double extrusion_width() const { return fdm_nozzle_diameter; }
    bool operator==(const PrinterProfile &) const = default;
};

// Printability envelope for cells.
struct Limits {
    double min_inscribed = 2.5;
    double max_inscribed = 6.5;
    double min_screen = 0.6;
    double max_screen = 1.0;
    double max_depth = 5.0;
};

inline constexpr Limits kLimits{};

double inscribed_diameter(CellShape shape, double cross_section);
// Inscribed diameter per unit of cross-section size.
double inscribed_ratio(CellShape shape);

enum class ViolationCode { TooSmall, TooLarge, ScreenTooThin, ScreenTooThick, TooDeep, GapTooNarrow, NonPositive };

std::string_view to_string(ViolationCode code);
std::optional<ViolationCode> parse_violation_code(std::string_view text);

struct Violation {
    ViolationCode code;
    std::string field;
    double value;
    double bound;
    std::string message;

    bool operator==(const Violation &) const = default;
};

std::vector<Violation> validate_spec(const CellSpec &spec, const PrinterProfile &profile);

// Problems with the machine profile itself (non-positive lengths, dump or
// brush area off the bed). Empty when usable.
std::vector<std::string> validate_profile(const PrinterProfile &profile);

// Throws SpecInvalid / ConfigError summarising the first problems found.
void require_valid(const CellSpec &spec, const PrinterProfile &profile);

struct MixtureRatio {
    double oil = 25.0;
    double talc = 35.0;
    double iron = 40.0;
    double dye = 1.0;
};

enum class Persistence { Persistent, NonPersistent, Unknown };

std::string_view to_string(Persistence p);

struct MixtureRecipe {
    double oil = 0.0;
    double talc = 0.0;
    double iron = 0.0;
    double dye = 0.0;
    Persistence persistence = Persistence::Unknown;
};

// Talc-to-oil at or below 1.0 settles within minutes; 1.4 and above holds.
inline constexpr double kNonPersistentTalcOil = 1.0;
inline constexpr double kPersistentTalcOil = 35.0 / 25.0;

Persistence persistence_of(const MixtureRatio &ratio);

// Grams of each component for `total_weight` grams of mixture. Throws
// ZeroRatio when every part is zero and InvalidArgument on a non-positive
// total or negative parts.
MixtureRecipe mixture_for(double total_weight, const MixtureRatio &ratio);

} // namespace magneto
