#include "magneto/gcode.hpp"

#include "magneto/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

namespace magneto {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kFilamentFeed = 1800.0;
constexpr double kWipeStroke = 10.0;

std::string num(double v, int decimals)
{
    const double scale = std::pow(10.0, decimals);
    v = std::round(v * scale) / scale;
    if (v == 0.0)
        v = 0.0; // no "-0"
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
    return std::string(buf, res.ptr);
}

std::string coord(double v) { return num(v, 3); }
std::string evalue(double v) { return num(v, 9); }

std::string_view strip_cr(std::string_view line)
{
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    return line;
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

// The code and parameter words of one line, comments dropped.
struct Words {
    char letter = 0;
    int code = -1;
    std::optional<double> x, y, z, e, f;

    bool is(char l, int c) const { return letter == l && code == c; }
    bool is_move() const { return is('G', 0) || is('G', 1); }
};

Words words_of(std::string_view line)
{
    line = strip_cr(line);
    line = line.substr(0, line.find(';'));
    Words w;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(line[i])));
        if (c < 'A' || c > 'Z') {
            ++i;
            continue;
        }
        double value = 0.0;
        const char *begin = line.data() + i + 1;
        // from_chars rejects a leading '+', which G-code allows.
        if (begin < line.data() + line.size() && *begin == '+')
            ++begin;
        const auto res = std::from_chars(begin, line.data() + line.size(), value);
        if (res.ec != std::errc()) {
            ++i;
            continue;
        }
        i = static_cast<std::size_t>(res.ptr - line.data());
        if (w.letter == 0) {
            w.letter = c;
            w.code = static_cast<int>(value);
            continue;
        }
        switch (c) {
        case 'X': w.x = value; break;
        case 'Y': w.y = value; break;
        case 'Z': w.z = value; break;
        case 'E': w.e = value; break;
        case 'F': w.f = value; break;
        default: break;
        }
    }
    return w;
}

// Positioning and extruder state as a printer would track it.
struct Tracker {
    bool relative_xyz = false;
    bool relative_e = false;
    double z = kNan;
    double e = 0.0;
    double f = 0.0;

    // Returns true for a move that deposits material.
    bool feed(std::string_view line)
    {
        const Words w = words_of(line);
        if (w.is('G', 90)) {
            relative_xyz = false;
        } else if (w.is('G', 91)) {
            relative_xyz = true;
        } else if (w.is('M', 82)) {
            relative_e = false;
        } else if (w.is('M', 83)) {
            relative_e = true;
        } else if (w.is('G', 92)) {
            if (w.e)
                e = *w.e;
            if (w.z)
                z = *w.z;
        } else if (w.is_move()) {
            if (w.f)
                f = *w.f;
            if (w.z)
                z = relative_xyz ? (std::isnan(z) ? 0.0 : z) + *w.z : *w.z;
            if (w.e) {
                const bool relative = relative_e || relative_xyz;
                const bool extrudes = relative ? *w.e > 0.0 : *w.e > e;
                e = relative ? e + *w.e : *w.e;
                return extrudes && (w.x || w.y);
            }
        }
        return false;
    }

    ExtrusionState state() const { return {relative_e, e, f}; }
};

std::vector<std::string> split_lines(std::string_view text, bool &trailing_newline)
{
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        const std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            lines.emplace_back(text.substr(start));
            trailing_newline = false;
            return lines;
        }
        lines.emplace_back(text.substr(start, end - start));
        start = end + 1;
    }
    trailing_newline = true;
    return lines;
}

std::optional<int> cura_marker(std::string_view line)
{
    line = strip_cr(line);
    if (!starts_with(line, ";LAYER:"))
        return std::nullopt;
    int index = 0;
    const auto res = std::from_chars(line.data() + 7, line.data() + line.size(), index);
    if (res.ec != std::errc() || res.ptr != line.data() + line.size())
        return std::nullopt;
    return index;
}

bool prusa_marker(std::string_view line) { return strip_cr(line) == ";LAYER_CHANGE"; }

bool end_marker(std::string_view line)
{
    line = strip_cr(line);
    for (std::string_view m : {"; stop printing object", "; Filament-specific end gcode", ";End of Gcode",
                               ";END gcode", "; END_GCODE"})
        if (starts_with(line, m))
            return true;
    return false;
}

std::string detect_flavor(const std::vector<std::string> &lines)
{
    for (const std::string &l : lines) {
        if (starts_with(l, ";Generated with Cura") || starts_with(l, ";FLAVOR:"))
            return "Cura";
        if (l.find("generated by PrusaSlicer") != std::string::npos)
            return "PrusaSlicer";
    }
    return "";
}

struct Span {
    std::size_t begin = 0;
    int index = 0;
    double z = kNan;
};

// Layer starts from marker comments; z from ";Z:" or the first Z move.
std::vector<Span> marked_layers(const std::vector<std::string> &lines)
{
    std::vector<Span> spans;
    Tracker tracker;
    bool z_seen = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string &line = lines[i];
        if (const auto k = cura_marker(line)) {
            spans.push_back({i, *k, tracker.z});
            z_seen = false;
            continue;
        }
        if (prusa_marker(line)) {
            spans.push_back({i, static_cast<int>(spans.size()), tracker.z});
            z_seen = false;
            continue;
        }
        if (!spans.empty() && !z_seen && starts_with(strip_cr(line), ";Z:")) {
            const std::string_view v = strip_cr(line).substr(3);
            double z = 0.0;
            if (std::from_chars(v.data(), v.data() + v.size(), z).ec == std::errc()) {
                spans.back().z = z;
                z_seen = true;
            }
        }
        const double before = tracker.z;
        tracker.feed(line);
        if (!spans.empty() && !z_seen && !tracker.relative_xyz && tracker.z != before && words_of(line).z) {
            spans.back().z = tracker.z;
            z_seen = true;
        }
    }
    return spans;
}

// Layers from rising absolute Z. A rise with no deposition before Z drops
// again is a hop (or start-code lift) and is folded back.
std::vector<Span> tracked_layers(const std::vector<std::string> &lines, std::size_t &last_deposit)
{
    struct Candidate {
        Span span;
        bool deposits = false;
    };
    std::vector<Candidate> layers;
    Tracker tracker;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const bool has_z = words_of(lines[i]).z.has_value() && words_of(lines[i]).is_move();
        const bool absolute = !tracker.relative_xyz;
        const bool deposits = tracker.feed(lines[i]);
        if (has_z && absolute) {
            const double z = tracker.z;
            while (!layers.empty() && !layers.back().deposits && z < layers.back().span.z - 1e-9)
                layers.pop_back();
            if (layers.empty() || z > layers.back().span.z + 1e-9)
                layers.push_back({{i, static_cast<int>(layers.size()), z}, false});
        }
        if (deposits && !layers.empty()) {
            layers.back().deposits = true;
            last_deposit = i;
        }
    }
    while (!layers.empty() && !layers.back().deposits)
        layers.pop_back();
    std::vector<Span> spans;
    for (const Candidate &c : layers)
        spans.push_back(c.span);
    return spans;
}

std::vector<std::string> macro_lines(const std::string &macro)
{
    std::vector<std::string> out;
    bool trailing = true;
    for (std::string &l : split_lines(macro, trailing))
        if (!l.empty())
            out.push_back(std::move(l));
    return out;
}

Vec2 nozzle_for_tip(const Vec2 &tip, const PrinterProfile &profile) { return tip - profile.injector_offset.head<2>(); }

void require_on_bed(const Vec2 &p, const PrinterProfile &profile, const std::string &what)
{
    constexpr double eps = 1e-9;
    if (p.x() < -eps || p.y() < -eps || p.x() > profile.bed_size.x() + eps || p.y() > profile.bed_size.y() + eps)
        throw Error(ErrorCode::OutOfBed, what + " needs the nozzle at (" + coord(p.x()) + ", " + coord(p.y()) +
                                             "), outside the " + coord(profile.bed_size.x()) + " x " +
                                             coord(profile.bed_size.y()) + " bed");
}

void append(std::vector<std::string> &out, const std::vector<std::string> &lines, bool crlf)
{
    for (const std::string &l : lines)
        out.push_back(crlf ? l + '\r' : l);
}

double word_e(std::string_view line)
{
    const Words w = words_of(line);
    return w.e.value_or(0.0);
}

} // namespace

GcodeProgram parse_gcode(std::string_view text)
{
    GcodeProgram program;
    std::vector<std::string> lines = split_lines(text, program.trailing_newline);
    program.crlf = !lines.empty() && !lines.front().empty() && lines.front().back() == '\r';
    program.flavor = detect_flavor(lines);

    std::vector<Span> spans = marked_layers(lines);
    std::size_t end = lines.size();
    if (!spans.empty()) {
        program.layer_markers = true;
        for (std::size_t j = 0; j < spans.size(); ++j) {
            if (std::isnan(spans[j].z))
                throw Error(ErrorCode::ParseError, "layer " + std::to_string(spans[j].index) + " has no height");
            if (j > 0 && !(spans[j].z > spans[j - 1].z))
                throw Error(ErrorCode::ParseError, "layer heights do not increase at layer " +
                                                       std::to_string(spans[j].index));
        }
        // The last layer ends at the slicer's end-of-layer or end-code marker.
        const std::size_t last = spans.back().begin;
        std::optional<std::size_t> elapsed;
        for (std::size_t i = last + 1; i < lines.size(); ++i) {
            if (starts_with(lines[i], ";TIME_ELAPSED:"))
                elapsed = i;
            if (end_marker(lines[i]) && !elapsed) {
                end = i;
                break;
            }
        }
        if (elapsed)
            end = *elapsed + 1;
    } else {
        std::size_t last_deposit = 0;
        spans = tracked_layers(lines, last_deposit);
        if (spans.empty())
            throw Error(ErrorCode::NoLayersFound, "no layer markers and no Z moves found");
        end = last_deposit + 1;
    }

    program.prelude.assign(lines.begin(), lines.begin() + static_cast<std::ptrdiff_t>(spans.front().begin));
    for (std::size_t j = 0; j < spans.size(); ++j) {
        const std::size_t b = spans[j].begin;
        const std::size_t e = j + 1 < spans.size() ? spans[j + 1].begin : end;
        program.layers.push_back({spans[j].index, spans[j].z,
                                  {lines.begin() + static_cast<std::ptrdiff_t>(b),
                                   lines.begin() + static_cast<std::ptrdiff_t>(e)}});
    }
    program.postlude.assign(lines.begin() + static_cast<std::ptrdiff_t>(end), lines.end());
    return program;
}

std::string emit(const GcodeProgram &program)
{
    std::string out;
    bool first = true;
    const auto put = [&](const std::vector<std::string> &lines) {
        for (const std::string &l : lines) {
            if (!first)
                out += '\n';
            out += l;
            first = false;
        }
    };
    put(program.prelude);
    for (const GcodeLayer &layer : program.layers)
        put(layer.commands);
    put(program.postlude);
    if (program.trailing_newline && !first)
        out += '\n';
    return out;
}

InjectionBlock make_injection_block(const InjectionPoint &point, const PrinterProfile &profile)
{
    const Vec2 nozzle = nozzle_for_tip(Vec2(point.x, point.y), profile);
    require_on_bed(nozzle, profile, "injection into cell " + std::to_string(point.cell_id));
    const std::string travel = num(profile.travel_feedrate, 0);
    const std::string inject = num(profile.injection_feedrate, 0);
    InjectionBlock block{point.cell_id, {}};
    auto &c = block.commands;
    c.push_back(";MAGNETO:INJECT cell=" + std::to_string(point.cell_id));
    c.push_back("G0 Z" + coord(point.z + profile.z_clearance) + " F" + travel);
    c.push_back("G0 X" + coord(nozzle.x()) + " Y" + coord(nozzle.y()) + " F" + travel);
    for (std::string &l : macro_lines(profile.engage_macro))
        c.push_back(std::move(l));
    c.push_back("G1 E" + evalue(point.fill_volume * profile.e_per_mm3) + " F" + inject + " ;MAGNETO:PLUNGE");
    if (profile.retraction_volume > 0.0)
        c.push_back("G1 E-" + evalue(profile.retraction_volume * profile.e_per_mm3) + " F" + inject +
                    " ;MAGNETO:RETRACT");
    for (std::string &l : macro_lines(profile.disengage_macro))
        c.push_back(std::move(l));
    c.push_back(";MAGNETO:END_INJECT");
    return block;
}

std::vector<std::string> switch_to_injection(const PrinterProfile &profile, int layer_index, double z)
{
    const Vec2 dump = nozzle_for_tip(profile.dump_area, profile);
    require_on_bed(dump, profile, "the dump area purge");
    const std::string travel = num(profile.travel_feedrate, 0);
    const std::string inject = num(profile.injection_feedrate, 0);
    std::vector<std::string> c{";MAGNETO:SWITCH_IN layer=" + std::to_string(layer_index), "M83 ; relative extrusion"};
    if (profile.filament_retract > 0.0)
        c.push_back("G1 E-" + evalue(profile.filament_retract) + " F" + num(kFilamentFeed, 0) +
                    " ;MAGNETO:FILAMENT_RETRACT");
    c.push_back("T1 ; liquid injector");
    c.push_back("G0 Z" + coord(z + profile.z_clearance) + " F" + travel);
    c.push_back("G0 X" + coord(dump.x()) + " Y" + coord(dump.y()) + " F" + travel);
    for (std::string &l : macro_lines(profile.engage_macro))
        c.push_back(std::move(l));
    c.push_back("G1 E" + evalue(profile.purge_volume * profile.e_per_mm3) + " F" + inject + " ;MAGNETO:PURGE");
    if (profile.retraction_volume > 0.0)
        c.push_back("G1 E-" + evalue(profile.retraction_volume * profile.e_per_mm3) + " F" + inject +
                    " ;MAGNETO:RETRACT");
    for (std::string &l : macro_lines(profile.disengage_macro))
        c.push_back(std::move(l));
    return c;
}

std::vector<std::string> switch_to_extrusion(const PrinterProfile &profile, const ExtrusionState &restore, double z)
{
    const Vec2 brush = profile.brush_area;
    require_on_bed(brush, profile, "the brush wipe");
    const double stroke = brush.x() + kWipeStroke <= profile.bed_size.x() ? kWipeStroke : -kWipeStroke;
    require_on_bed(brush + Vec2(stroke, 0.0), profile, "the brush wipe");
    const std::string travel = num(profile.travel_feedrate, 0);
    std::vector<std::string> c{";MAGNETO:SWITCH_OUT", "T0 ; filament extruder",
                               "G0 X" + coord(brush.x()) + " Y" + coord(brush.y()) + " F" + travel};
    if (profile.filament_retract > 0.0)
        c.push_back("G1 E" + evalue(profile.filament_retract) + " F" + num(kFilamentFeed, 0) +
                    " ;MAGNETO:FILAMENT_PRIME");
    for (int pass = 0; pass < 2; ++pass) {
        c.push_back("G1 X" + coord(brush.x() + stroke) + " F" + travel);
        c.push_back("G1 X" + coord(brush.x()) + " F" + travel);
    }
    if (profile.z_clearance > 0.0) {
        c.push_back("G91 ;MAGNETO:RELATIVE");
        c.push_back("G1 Z-" + coord(profile.z_clearance) + " F" + travel + " ; back to z " + coord(z));
        c.push_back("G90");
    }
    if (!restore.relative_e) {
        c.push_back("M82 ; absolute extrusion");
        c.push_back("G92 E" + evalue(restore.e));
    }
    if (restore.feedrate > 0.0)
        c.push_back("G1 F" + num(restore.feedrate, 3));
    c.push_back(";MAGNETO:END_SWITCH");
    return c;
}

GcodeProgram splice(const GcodeProgram &program, const InjectionPlan &plan, const PrinterProfile &profile)
{
    if (plan.points.empty())
        return program;
    const double tolerance = 0.5 * profile.layer_height - 1e-6;
    std::map<std::size_t, std::vector<const InjectionPoint *>> groups;
    std::string unmatched;
    for (const InjectionPoint &p : plan.points) {
        const auto it = std::lower_bound(program.layers.begin(), program.layers.end(), p.z,
                                         [](const GcodeLayer &l, double z) { return l.z < z; });
        std::optional<std::size_t> hit;
        for (auto c : {it, it == program.layers.begin() ? it : std::prev(it)})
            if (c != program.layers.end() && std::abs(c->z - p.z) < tolerance)
                hit = static_cast<std::size_t>(c - program.layers.begin());
        if (!hit)
            unmatched += " cell " + std::to_string(p.cell_id) + " at z " + coord(p.z) + ";";
        else
            groups[*hit].push_back(&p);
    }
    if (!unmatched.empty())
        throw Error(ErrorCode::LayerMismatch, "plan points match no layer of the G-code:" + unmatched);

    // Extruder state at the end of each layer that receives injections.
    std::map<std::size_t, ExtrusionState> states;
    {
        Tracker tracker;
        for (const std::string &l : program.prelude)
            tracker.feed(l);
        for (std::size_t j = 0; j < program.layers.size(); ++j) {
            for (const std::string &l : program.layers[j].commands)
                tracker.feed(l);
            if (groups.count(j))
                states[j] = tracker.state();
        }
    }

    GcodeProgram out = program;
    for (const auto &[j, points] : groups) {
        GcodeLayer &layer = out.layers[j];
        std::vector<std::string> inserted = switch_to_injection(profile, layer.index, layer.z);
        for (const InjectionPoint *p : points) {
            InjectionPoint at = *p;
            at.z = layer.z; // snap to the layer the nozzle is on
            const InjectionBlock block = make_injection_block(at, profile);
            inserted.insert(inserted.end(), block.commands.begin(), block.commands.end());
        }
        const auto back = switch_to_extrusion(profile, states.at(j), layer.z);
        inserted.insert(inserted.end(), back.begin(), back.end());
        append(layer.commands, inserted, program.crlf);
    }
    return out;
}

SpliceAudit audit(const GcodeProgram &program)
{
    SpliceAudit a;
    Tracker tracker;
    for (const std::string &l : program.prelude)
        tracker.feed(l);
    for (const GcodeLayer &layer : program.layers) {
        bool injected = false;
        for (const std::string &raw : layer.commands) {
            const std::string_view line = strip_cr(raw);
            if (starts_with(line, ";MAGNETO:SWITCH_IN"))
                ++a.switch_in;
            else if (starts_with(line, ";MAGNETO:SWITCH_OUT"))
                ++a.switch_out;
            else if (starts_with(line, ";MAGNETO:INJECT cell=")) {
                ++a.blocks;
                injected = true;
                a.cell_order.push_back(std::stoi(std::string(line.substr(21))));
            } else if (line.find(";MAGNETO:PLUNGE") != std::string_view::npos)
                a.plunge_e += word_e(line);
            else if (line.find(";MAGNETO:PURGE") != std::string_view::npos)
                a.purge_e += word_e(line);
            const Words w = words_of(line);
            const bool absolute = !tracker.relative_xyz;
            tracker.feed(line);
            if (w.is_move() && w.z && absolute && *w.z < layer.z - 1e-6)
                ++a.z_regressions;
        }
        if (injected)
            a.injection_layers.push_back(layer.index);
    }
    return a;
}

std::vector<ChecklistItem> preflight_checklist(const GcodeProgram &program, const PrinterProfile &profile)
{
    std::vector<ChecklistItem> items;
    const double h = profile.layer_height;
    bool uniform = true;
    for (std::size_t j = 1; j < program.layers.size(); ++j)
        uniform = uniform && std::abs(program.layers[j].z - program.layers[j - 1].z - h) < 1e-6;
    items.push_back({"layer_height", uniform ? "ok" : "warn",
                     uniform ? "layers are spaced " + coord(h) + " mm apart"
                             : "layer spacing differs from the profile's " + coord(h) +
                                   " mm; injection heights may not match any layer"});
    const bool first_ok = !program.layers.empty() && std::abs(program.layers.front().z - h) < 1e-6;
    items.push_back({"first_layer_height", first_ok ? "ok" : "warn",
                     first_ok ? "first layer at " + coord(h) + " mm"
                              : "first layer is not at " + coord(h) +
                                    " mm; set the initial layer height equal to the layer height"});
    items.push_back({"slicer", program.flavor.empty() ? "warn" : "ok",
                     program.flavor.empty() ? "slicer not recognised; layers were found by tracking Z moves"
                                            : "sliced with " + program.flavor});
    items.push_back({"print_speed", "manual", "reduce print speed to 50-60 % so cell tops bridge cleanly"});
    items.push_back({"bridging", "manual", "enable bridge settings in the slicer"});
    items.push_back({"supports", "manual", "disable supports inside cells so they stay empty for the liquid"});
    items.push_back({"dump_area", "manual",
                     "the dump area at (" + coord(profile.dump_area.x()) + ", " + coord(profile.dump_area.y()) +
                         ") must lie over a prime tower or sacrificial print"});
    items.push_back({"liquid_calibration", "warn",
                     "retraction " + coord(profile.retraction_volume) + " mm^3, purge " +
                         coord(profile.purge_volume) + " mm^3 and " + num(profile.e_per_mm3, 6) +
                         " E per mm^3 are defaults; calibrate them for the injector"});
    return items;
}

Json to_json(const std::vector<ChecklistItem> &items)
{
    Json out = Json::array();
    for (const ChecklistItem &i : items)
        out.push_back({{"item", i.item}, {"status", i.status}, {"detail", i.detail}});
    return out;
}

} // namespace magneto
