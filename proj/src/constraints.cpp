#include "magneto/constraints.hpp"

#include "magneto/error.hpp"

#include <cmath>
#include <sstream>

namespace magneto {

namespace {

// Bounds are stated to two decimals; rounding noise must not flip a verdict.
constexpr double kBoundSlack = 1e-9;

std::string describe(const char *what, double value, const char *relation, double bound)
{
    std::ostringstream out;
    out << what << ' ' << value << ' ' << relation << ' ' << bound;
    return out.str();
}

} // namespace

std::string_view to_string(CellShape shape)
{
    switch (shape) {
    case CellShape::Circle: return "circle";
    case CellShape::Square: return "square";
    case CellShape::Hexagon: return "hexagon";
    }
    return "unknown";
}

std::optional<CellShape> parse_shape(std::string_view text)
{
    for (CellShape s : {CellShape::Circle, CellShape::Square, CellShape::Hexagon})
        if (to_string(s) == text)
            return s;
    return std::nullopt;
}

double inscribed_ratio(CellShape shape)
{
    return shape == CellShape::Hexagon ? std::sqrt(3.0) / 2.0 : 1.0;
}

double inscribed_diameter(CellShape shape, double cross_section)
{
    return inscribed_ratio(shape) * cross_section;
}

std::string_view to_string(ViolationCode code)
{
    switch (code) {
    case ViolationCode::TooSmall: return "TooSmall";
    case ViolationCode::TooLarge: return "TooLarge";
    case ViolationCode::ScreenTooThin: return "ScreenTooThin";
    case ViolationCode::ScreenTooThick: return "ScreenTooThick";
    case ViolationCode::TooDeep: return "TooDeep";
    case ViolationCode::GapTooNarrow: return "GapTooNarrow";
    case ViolationCode::NonPositive: return "NonPositive";
    }
    return "Unknown";
}

std::optional<ViolationCode> parse_violation_code(std::string_view text)
{
    for (int i = 0; i <= static_cast<int>(ViolationCode::NonPositive); ++i) {
        const auto code = static_cast<ViolationCode>(i);
        if (to_string(code) == text)
            return code;
    }
    return std::nullopt;
}

std::vector<Violation> validate_spec(const CellSpec &spec, const PrinterProfile &profile)
{
    std::vector<Violation> out;
    const auto positive = [&](const char *field, double value) {
        if (!(value > 0.0)) {
            out.push_back({ViolationCode::NonPositive, field, value, 0.0, describe(field, value, "<=", 0.0)});
            return false;
        }
        return true;
    };

    if (positive("cross_section", spec.cross_section)) {
        const double d = inscribed_diameter(spec.shape, spec.cross_section);
        if (d < kLimits.min_inscribed - kBoundSlack)
            out.push_back({ViolationCode::TooSmall, "cross_section", d, kLimits.min_inscribed,
                           describe("inscribed", d, "<", kLimits.min_inscribed)});
        if (d > kLimits.max_inscribed + kBoundSlack)
            out.push_back({ViolationCode::TooLarge, "cross_section", d, kLimits.max_inscribed,
                           describe("inscribed", d, ">", kLimits.max_inscribed)});
    }
    if (positive("screen_thickness", spec.screen_thickness)) {
        const double h = spec.screen_thickness;
        if (h < kLimits.min_screen - kBoundSlack)
            out.push_back({ViolationCode::ScreenTooThin, "screen_thickness", h, kLimits.min_screen,
                           describe("screen", h, "<", kLimits.min_screen)});
        if (h > kLimits.max_screen + kBoundSlack)
            out.push_back({ViolationCode::ScreenTooThick, "screen_thickness", h, kLimits.max_screen,
                           describe("screen", h, ">", kLimits.max_screen)});
    }
    if (positive("cell_depth", spec.cell_depth) && spec.cell_depth > kLimits.max_depth + kBoundSlack)
        out.push_back({ViolationCode::TooDeep, "cell_depth", spec.cell_depth, kLimits.max_depth,
                       describe("depth", spec.cell_depth, ">", kLimits.max_depth)});
    const double width = profile.extrusion_width();
    if (spec.gap < width - kBoundSlack)
        out.push_back({ViolationCode::GapTooNarrow, "gap", spec.gap, width, describe("gap", spec.gap, "<", width)});
    return out;
}

std::vector<std::string> validate_profile(const PrinterProfile &p)
{
    std::vector<std::string> out;
    const std::pair<const char *, double> lengths[] = {
        {"fdm_nozzle_diameter", p.fdm_nozzle_diameter},
        {"injector_nozzle_diameter", p.injector_nozzle_diameter},
        {"layer_height", p.layer_height},
        {"max_overhang", p.max_overhang},
        {"bed_width", p.bed_size.x()},
        {"bed_depth", p.bed_size.y()},
        {"e_per_mm3", p.e_per_mm3},
        {"travel_feedrate", p.travel_feedrate},
        {"injection_feedrate", p.injection_feedrate},
        {"syringe_capacity", p.syringe_capacity},
    };
    for (const auto &[name, value] : lengths)
        if (!(value > 0.0))
            out.push_back(std::string(name) + " must be positive");
    const std::pair<const char *, double> non_negative[] = {
        {"retraction_volume", p.retraction_volume},   {"purge_volume", p.purge_volume},
        {"filament_retract", p.filament_retract},     {"z_clearance", p.z_clearance},
        {"injection_clearance", p.injection_clearance},
    };
    for (const auto &[name, value] : non_negative)
        if (!(value >= 0.0))
            out.push_back(std::string(name) + " must not be negative");
    if (!(p.fill_fraction > 0.0 && p.fill_fraction <= 1.0))
        out.push_back("fill_fraction must lie in (0, 1]");
    const auto on_bed = [&](const Vec2 &q) {
        return q.x() >= 0.0 && q.y() >= 0.0 && q.x() <= p.bed_size.x() && q.y() <= p.bed_size.y();
    };
    if (!on_bed(p.dump_area - p.injector_offset.head<2>()))
        out.push_back("dump_area is unreachable: the nozzle would leave the bed");
    if (!on_bed(p.brush_area))
        out.push_back("brush_area lies outside the bed");
    return out;
}

void require_valid(const CellSpec &spec, const PrinterProfile &profile)
{
    if (const auto problems = validate_profile(profile); !problems.empty())
        throw Error(ErrorCode::ConfigError, problems.front());
    if (const auto violations = validate_spec(spec, profile); !violations.empty()) {
        std::string msg = "cell spec violates the printable envelope:";
        for (const auto &v : violations)
            msg += " " + std::string(to_string(v.code)) + " (" + v.message + ")";
        throw Error(ErrorCode::SpecInvalid, msg);
    }
}

std::string_view to_string(Persistence p)
{
    switch (p) {
    case Persistence::Persistent: return "persistent";
    case Persistence::NonPersistent: return "non-persistent";
    case Persistence::Unknown: return "unknown-persistence";
    }
    return "unknown-persistence";
}

Persistence persistence_of(const MixtureRatio &r)
{
    if (r.oil <= 0.0)
        return r.talc > 0.0 ? Persistence::Persistent : Persistence::Unknown;
    const double talc_oil = r.talc / r.oil;
    if (talc_oil >= kPersistentTalcOil - 1e-12)
        return Persistence::Persistent;
    if (talc_oil <= kNonPersistentTalcOil + 1e-12)
        return Persistence::NonPersistent;
    return Persistence::Unknown;
}

MixtureRecipe mixture_for(double total_weight, const MixtureRatio &r)
{
    if (!(total_weight > 0.0))
        throw Error(ErrorCode::InvalidArgument, "total weight must be positive");
    if (r.oil < 0.0 || r.talc < 0.0 || r.iron < 0.0 || r.dye < 0.0)
        throw Error(ErrorCode::InvalidArgument, "mixture parts must not be negative");
    const double sum = r.oil + r.talc + r.iron + r.dye;
    if (!(sum > 0.0))
        throw Error(ErrorCode::ZeroRatio, "all mixture parts are zero");
    const double k = total_weight / sum;
    return {r.oil * k, r.talc * k, r.iron * k, r.dye * k, persistence_of(r)};
}

} // namespace magneto
