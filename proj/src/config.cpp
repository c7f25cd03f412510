#include "magneto/config.hpp"

#include "magneto/error.hpp"
#include "magneto/mesh_io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>
#include <sstream>

namespace magneto {

namespace pt = boost::property_tree;

namespace {

[[noreturn]] void config_error(const std::string &msg) { throw Error(ErrorCode::ConfigError, msg); }

double to_double(const std::string &key, std::string text)
{
    const auto b = text.find_first_not_of(" \t");
    const auto e = text.find_last_not_of(" \t");
    text = b == std::string::npos ? "" : text.substr(b, e - b + 1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        config_error("'" + key + "' is not a number: " + text);
    return value;
}

std::vector<double> to_list(const std::string &key, const std::string &text, std::size_t n)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(to_double(key, item));
    if (out.size() != n)
        config_error("'" + key + "' needs " + std::to_string(n) + " comma-separated numbers");
    return out;
}

bool to_bool(const std::string &key, const std::string &text)
{
    if (text == "true" || text == "1" || text == "yes")
        return true;
    if (text == "false" || text == "0" || text == "no")
        return false;
    config_error("'" + key + "' is not a boolean: " + text);
}

std::string unescape(const std::string &text)
{
    std::string out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\\' && i + 1 < text.size() && text[i + 1] == 'n') {
            out += '\n';
            ++i;
        } else {
            out += text[i];
        }
    }
    return out;
}

std::string escape(const std::string &text)
{
    std::string out;
    for (char c : text)
        out += c == '\n' ? std::string("\\n") : std::string(1, c);
    return out;
}

std::string format(double v)
{
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

using Setter = std::function<void(const std::string &key, const std::string &value)>;

void apply_section(std::string_view text, const char *section, const std::map<std::string, Setter> &setters)
{
    pt::ptree tree;
    try {
        std::istringstream in{std::string(text)};
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error &e) {
        config_error(std::string("malformed configuration: ") + e.what());
    }
    const auto node = tree.get_child_optional(section);
    if (!node)
        config_error(std::string("configuration has no [") + section + "] section");
    for (const auto &[key, child] : *node) {
        const auto it = setters.find(key);
        if (it == setters.end())
            config_error("unknown key '" + key + "' in [" + section + "]");
        it->second(key, child.data());
    }
}

std::map<std::string, Setter> spec_setters(CellSpec &s)
{
    return {
        {"shape",
         [&](const std::string &k, const std::string &v) {
             const auto shape = parse_shape(v);
             if (!shape)
                 config_error("'" + k + "' must be circle, square or hexagon");
             s.shape = *shape;
         }},
        {"cross_section", [&](const std::string &k, const std::string &v) { s.cross_section = to_double(k, v); }},
        {"gap", [&](const std::string &k, const std::string &v) { s.gap = to_double(k, v); }},
        {"cell_depth", [&](const std::string &k, const std::string &v) { s.cell_depth = to_double(k, v); }},
        {"screen_thickness",
         [&](const std::string &k, const std::string &v) { s.screen_thickness = to_double(k, v); }},
    };
}

std::map<std::string, Setter> profile_setters(PrinterProfile &p)
{
    const auto number = [](double &field) {
        return Setter([&field](const std::string &k, const std::string &v) { field = to_double(k, v); });
    };
    const auto pair = [](Vec2 &field) {
        return Setter([&field](const std::string &k, const std::string &v) {
            const auto xs = to_list(k, v, 2);
            field = Vec2(xs[0], xs[1]);
        });
    };
    return {
        {"fdm_nozzle_diameter", number(p.fdm_nozzle_diameter)},
        {"injector_nozzle_diameter", number(p.injector_nozzle_diameter)},
        {"layer_height", number(p.layer_height)},
        {"max_overhang", number(p.max_overhang)},
        {"injector_offset",
         [&](const std::string &k, const std::string &v) {
             const auto xs = to_list(k, v, 3);
             p.injector_offset = Vec3(xs[0], xs[1], xs[2]);
         }},
        {"bed_size", pair(p.bed_size)},
        {"dump_area", pair(p.dump_area)},
        {"brush_area", pair(p.brush_area)},
        {"engage_macro", [&](const std::string &, const std::string &v) { p.engage_macro = unescape(v); }},
        {"disengage_macro", [&](const std::string &, const std::string &v) { p.disengage_macro = unescape(v); }},
        {"retraction_volume", number(p.retraction_volume)},
        {"purge_volume", number(p.purge_volume)},
        {"filament_retract", number(p.filament_retract)},
        {"e_per_mm3", number(p.e_per_mm3)},
        {"travel_feedrate", number(p.travel_feedrate)},
        {"injection_feedrate", number(p.injection_feedrate)},
        {"z_clearance", number(p.z_clearance)},
        {"injection_clearance", number(p.injection_clearance)},
        {"fill_fraction", number(p.fill_fraction)},
        {"syringe_capacity", number(p.syringe_capacity)},
        {"offset_inward", [&](const std::string &k, const std::string &v) { p.offset_inward = to_bool(k, v); }},
    };
}

std::string read_config(const std::filesystem::path &path)
{
    try {
        return read_file(path);
    } catch (const Error &e) {
        config_error(e.what());
    }
}

template <typename T>
void json_number(const Json &j, const char *key, T &field)
{
    if (!j.contains(key))
        return;
    if (!j.at(key).is_number())
        config_error(std::string("'") + key + "' must be a number");
    field = j.at(key).get<T>();
}

Json pair_json(const Vec2 &v) { return Json::array({v.x(), v.y()}); }

Vec2 pair_from(const Json &j, const char *key)
{
    if (!j.is_array() || j.size() != 2)
        config_error(std::string("'") + key + "' must be [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

} // namespace

CellSpec parse_spec_config(std::string_view text, const CellSpec &base)
{
    CellSpec spec = base;
    apply_section(text, "cell", spec_setters(spec));
    return spec;
}

PrinterProfile parse_profile_config(std::string_view text, const PrinterProfile &base)
{
    PrinterProfile profile = base;
    apply_section(text, "printer", profile_setters(profile));
    return profile;
}

CellSpec load_spec_config(const std::filesystem::path &path, const CellSpec &base)
{
    return parse_spec_config(read_config(path), base);
}

PrinterProfile load_profile_config(const std::filesystem::path &path, const PrinterProfile &base)
{
    return parse_profile_config(read_config(path), base);
}

std::string to_config(const CellSpec &s)
{
    std::ostringstream out;
    out << "[cell]\n"
        << "shape = " << to_string(s.shape) << "\n"
        << "cross_section = " << format(s.cross_section) << "\n"
        << "gap = " << format(s.gap) << "\n"
        << "cell_depth = " << format(s.cell_depth) << "\n"
        << "screen_thickness = " << format(s.screen_thickness) << "\n";
    return out.str();
}

std::string to_config(const PrinterProfile &p)
{
    std::ostringstream out;
    const auto vec2 = [](const Vec2 &v) { return format(v.x()) + ", " + format(v.y()); };
    out << "[printer]\n"
        << "fdm_nozzle_diameter = " << format(p.fdm_nozzle_diameter) << "\n"
        << "injector_nozzle_diameter = " << format(p.injector_nozzle_diameter) << "\n"
        << "layer_height = " << format(p.layer_height) << "\n"
        << "max_overhang = " << format(p.max_overhang) << "\n"
        << "injector_offset = " << format(p.injector_offset.x()) << ", " << format(p.injector_offset.y()) << ", "
        << format(p.injector_offset.z()) << "\n"
        << "bed_size = " << vec2(p.bed_size) << "\n"
        << "dump_area = " << vec2(p.dump_area) << "\n"
        << "brush_area = " << vec2(p.brush_area) << "\n"
        << "engage_macro = " << escape(p.engage_macro) << "\n"
        << "disengage_macro = " << escape(p.disengage_macro) << "\n"
        << "retraction_volume = " << format(p.retraction_volume) << "\n"
        << "purge_volume = " << format(p.purge_volume) << "\n"
        << "filament_retract = " << format(p.filament_retract) << "\n"
        << "e_per_mm3 = " << format(p.e_per_mm3) << "\n"
        << "travel_feedrate = " << format(p.travel_feedrate) << "\n"
        << "injection_feedrate = " << format(p.injection_feedrate) << "\n"
        << "z_clearance = " << format(p.z_clearance) << "\n"
        << "injection_clearance = " << format(p.injection_clearance) << "\n"
        << "fill_fraction = " << format(p.fill_fraction) << "\n"
        << "syringe_capacity = " << format(p.syringe_capacity) << "\n"
        << "offset_inward = " << (p.offset_inward ? "true" : "false") << "\n";
    return out.str();
}

Json to_json(const CellSpec &s)
{
    return {{"shape", to_string(s.shape)},
            {"cross_section", s.cross_section},
            {"gap", s.gap},
            {"cell_depth", s.cell_depth},
            {"screen_thickness", s.screen_thickness}};
}

CellSpec spec_from_json(const Json &j, const CellSpec &base)
{
    if (!j.is_object())
        config_error("cell spec must be a JSON object");
    CellSpec s = base;
    if (j.contains("shape")) {
        const auto shape = j.at("shape").is_string() ? parse_shape(j.at("shape").get<std::string>()) : std::nullopt;
        if (!shape)
            config_error("'shape' must be circle, square or hexagon");
        s.shape = *shape;
    }
    json_number(j, "cross_section", s.cross_section);
    json_number(j, "gap", s.gap);
    json_number(j, "cell_depth", s.cell_depth);
    json_number(j, "screen_thickness", s.screen_thickness);
    return s;
}

Json to_json(const PrinterProfile &p)
{
    return {{"fdm_nozzle_diameter", p.fdm_nozzle_diameter},
            {"injector_nozzle_diameter", p.injector_nozzle_diameter},
            {"layer_height", p.layer_height},
            {"max_overhang", p.max_overhang},
            {"injector_offset", {p.injector_offset.x(), p.injector_offset.y(), p.injector_offset.z()}},
            {"bed_size", pair_json(p.bed_size)},
            {"dump_area", pair_json(p.dump_area)},
            {"brush_area", pair_json(p.brush_area)},
            {"engage_macro", p.engage_macro},
            {"disengage_macro", p.disengage_macro},
            {"retraction_volume", p.retraction_volume},
            {"purge_volume", p.purge_volume},
            {"filament_retract", p.filament_retract},
            {"e_per_mm3", p.e_per_mm3},
            {"travel_feedrate", p.travel_feedrate},
            {"injection_feedrate", p.injection_feedrate},
            {"z_clearance", p.z_clearance},
            {"injection_clearance", p.injection_clearance},
            {"fill_fraction", p.fill_fraction},
            {"syringe_capacity", p.syringe_capacity},
            {"offset_inward", p.offset_inward}};
}

PrinterProfile profile_from_json(const Json &j, const PrinterProfile &base)
{
    if (!j.is_object())
        config_error("printer profile must be a JSON object");
    PrinterProfile p = base;
    static const char *known[] = {"fdm_nozzle_diameter", "injector_nozzle_diameter", "layer_height",
                                  "max_overhang",        "injector_offset",          "bed_size",
                                  "dump_area",           "brush_area",               "engage_macro",
                                  "disengage_macro",     "retraction_volume",        "purge_volume",
                                  "filament_retract",    "e_per_mm3",                "travel_feedrate",
                                  "injection_feedrate",  "z_clearance",              "injection_clearance",
                                  "fill_fraction",       "syringe_capacity",         "offset_inward"};
    for (const auto &item : j.items())
        if (std::find_if(std::begin(known), std::end(known), [&](const char *k) { return item.key() == k; }) ==
            std::end(known))
            config_error("unknown profile key '" + item.key() + "'");
    json_number(j, "fdm_nozzle_diameter", p.fdm_nozzle_diameter);
    json_number(j, "injector_nozzle_diameter", p.injector_nozzle_diameter);
    json_number(j, "layer_height", p.layer_height);
    json_number(j, "max_overhang", p.max_overhang);
    if (j.contains("injector_offset")) {
        const Json &o = j.at("injector_offset");
        if (!o.is_array() || o.size() != 3)
            config_error("'injector_offset' must be [dx, dy, dz]");
        p.injector_offset = Vec3(o[0].get<double>(), o[1].get<double>(), o[2].get<double>());
    }
    if (j.contains("bed_size"))
        p.bed_size = pair_from(j.at("bed_size"), "bed_size");
    if (j.contains("dump_area"))
        p.dump_area = pair_from(j.at("dump_area"), "dump_area");
    if (j.contains("brush_area"))
        p.brush_area = pair_from(j.at("brush_area"), "brush_area");
    if (j.contains("engage_macro"))
        p.engage_macro = j.at("engage_macro").get<std::string>();
    if (j.contains("disengage_macro"))
        p.disengage_macro = j.at("disengage_macro").get<std::string>();
    json_number(j, "retraction_volume", p.retraction_volume);
    json_number(j, "purge_volume", p.purge_volume);
    json_number(j, "filament_retract", p.filament_retract);
    json_number(j, "e_per_mm3", p.e_per_mm3);
    json_number(j, "travel_feedrate", p.travel_feedrate);
    json_number(j, "injection_feedrate", p.injection_feedrate);
    json_number(j, "z_clearance", p.z_clearance);
    json_number(j, "injection_clearance", p.injection_clearance);
    json_number(j, "fill_fraction", p.fill_fraction);
    json_number(j, "syringe_capacity", p.syringe_capacity);
    if (j.contains("offset_inward"))
        p.offset_inward = j.at("offset_inward").get<bool>();
    return p;
}

Json to_json(const Violation &v)
{
    return {{"code", to_string(v.code)},
            {"field", v.field},
            {"value", v.value},
            {"bound", v.bound},
            {"message", v.message}};
}

Violation violation_from_json(const Json &j)
{
    const auto code = parse_violation_code(j.at("code").get<std::string>());
    if (!code)
        config_error("unknown violation code " + j.at("code").get<std::string>());
    return {*code, j.at("field").get<std::string>(), j.at("value").get<double>(), j.at("bound").get<double>(),
            j.at("message").get<std::string>()};
}

Json violation_report(const std::vector<Violation> &violations)
{
    Json list = Json::array();
    for (const auto &v : violations)
        list.push_back(to_json(v));
    return {{"valid", violations.empty()}, {"violations", list}};
}

std::vector<Violation> violations_from_report(const Json &report)
{
    std::vector<Violation> out;
    for (const auto &item : report.at("violations"))
        out.push_back(violation_from_json(item));
    return out;
}

Json to_json(const MixtureRecipe &r)
{
    return {{"oil_g", r.oil},
            {"talc_g", r.talc},
            {"iron_g", r.iron},
            {"dye_g", r.dye},
            {"persistence", to_string(r.persistence)}};
}

Json limits_json(const PrinterProfile &profile)
{
    Json shapes = Json::object();
    for (CellShape s : {CellShape::Circle, CellShape::Square, CellShape::Hexagon}) {
        const double k = inscribed_ratio(s);
        shapes[std::string(to_string(s))] = {{"cross_section_min", kLimits.min_inscribed / k},
                                             {"cross_section_max", kLimits.max_inscribed / k}};
    }
    return {{"inscribed_diameter", {{"min", kLimits.min_inscribed}, {"max", kLimits.max_inscribed}}},
            {"screen_thickness", {{"min", kLimits.min_screen}, {"max", kLimits.max_screen}}},
            {"cell_depth", {{"min", 0.0}, {"max", kLimits.max_depth}}},
            {"gap", {{"min", profile.extrusion_width()}}},
            {"injector_nozzle_diameter", profile.injector_nozzle_diameter},
            {"shapes", shapes}};
}

} // namespace magneto
