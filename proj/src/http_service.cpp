#include "magneto/http_service.hpp"

#include "magneto/config.hpp"
#include "magneto/mesh_io.hpp"

#include <httplib.h>

namespace magneto {

int http_status(ErrorCode code)
{
    switch (code) {
    case ErrorCode::JobState: return 409;
    case ErrorCode::IoError: return 500;
    default: return 400;
    }
}

struct HttpService::Impl {
    Impl(JobService &j, PrinterProfile d) : jobs(j), defaults(std::move(d)) {}

    JobService &jobs;
    PrinterProfile defaults;
    httplib::Server server;

    static void send_json(httplib::Response &res, const Json &body, int status = 200)
    {
        res.status = status;
        res.set_content(body.dump(2) + "\n", "application/json");
    }

    static void send_error(httplib::Response &res, int status, ErrorCode code, const std::string &message)
    {
        send_json(res, error_json(code, message), status);
    }

    std::optional<JobInfo> find(const httplib::Request &req, httplib::Response &res) const
    {
        const std::string id = req.matches[1];
        auto info = jobs.info(id);
        if (!info)
            send_error(res, 404, ErrorCode::InvalidArgument, "no job " + id);
        return info;
    }

    void send_artifact(const httplib::Request &req, httplib::Response &res, const std::string &name,
                       bool attachment) const
    {
        const auto info = find(req, res);
        if (!info)
            return;
        const auto it = info->artifacts.find(name);
        if (it == info->artifacts.end()) {
            send_error(res, 404, ErrorCode::JobState, name + " is not available in state " +
                                                          std::string(to_string(info->state)));
            return;
        }
        const bool json = name.ends_with(".json");
        if (attachment)
            res.set_header("Content-Disposition", "attachment; filename=\"" + name + "\"");
        res.set_content(it->second, json ? "application/json"
                                         : name.ends_with(".gcode") ? "text/x-gcode" : "application/octet-stream");
    }

    void create(const httplib::Request &req, httplib::Response &res)
    {
        TriMesh mesh;
        Json spec_j = Json::object(), profile_j = Json::object(), options_j = Json::object();
        if (req.is_multipart_form_data()) {
            if (!req.has_file("mesh"))
                return send_error(res, 400, ErrorCode::InvalidArgument, "multipart field 'mesh' is required");
            const auto file = req.get_file_value("mesh");
            mesh = parse_mesh(file.content, detect_format(file.filename, file.content)).mesh;
            if (req.has_file("spec"))
                spec_j = Json::parse(req.get_file_value("spec").content);
            if (req.has_file("profile"))
                profile_j = Json::parse(req.get_file_value("profile").content);
            if (req.has_file("options"))
                options_j = Json::parse(req.get_file_value("options").content);
        } else {
            const Json body = Json::parse(req.body);
            if (!body.contains("mesh_path"))
                return send_error(res, 400, ErrorCode::InvalidArgument, "mesh_path or a multipart mesh is required");
            mesh = load_mesh(body.at("mesh_path").get<std::string>()).mesh;
            spec_j = body.value("spec", Json::object());
            profile_j = body.value("profile", Json::object());
            options_j = body.value("options", Json::object());
        }
        GenerateOptions options;
        for (const auto &[key, value] : options_j.items()) {
            if (key == "single_sided")
                options.mode = value.get<bool>() ? ShellMode::SingleSided : ShellMode::Auto;
            else if (key == "preview_only")
                options.preview_only = value.get<bool>();
            else if (key == "keep_position")
                options.keep_position = value.get<bool>();
            else
                throw Error(ErrorCode::ConfigError, "unknown option " + key);
        }
        const std::string id =
            jobs.create(std::move(mesh), spec_from_json(spec_j), profile_from_json(profile_j, defaults), options);
        send_json(res, to_json(*jobs.info(id)), 201);
    }

    void trigger(const httplib::Request &req, httplib::Response &res, JobAction action)
    {
        if (!find(req, res))
            return;
        std::string gcode;
        if (action == JobAction::Postprocess) {
            if (req.is_multipart_form_data() && req.has_file("gcode"))
                gcode = req.get_file_value("gcode").content;
            else
                gcode = req.body;
            if (gcode.empty())
                return send_error(res, 400, ErrorCode::InvalidArgument, "G-code body is required");
        }
        jobs.request(req.matches[1], action, std::move(gcode));
        send_json(res, to_json(*jobs.info(req.matches[1])), 202);
    }

    void routes()
    {
        server.Get("/limits", [this](const httplib::Request &, httplib::Response &res) {
            send_json(res, limits_json(defaults));
        });
        server.Post("/jobs", [this](const httplib::Request &req, httplib::Response &res) { create(req, res); });
        server.Get("/jobs", [this](const httplib::Request &, httplib::Response &res) {
            Json list = Json::array();
            for (const std::string &id : jobs.ids())
                if (const auto info = jobs.info(id))
                    list.push_back({{"id", id}, {"state", to_string(info->state)}});
            send_json(res, list);
        });
        server.Get(R"(/jobs/([\w-]+))", [this](const httplib::Request &req, httplib::Response &res) {
            if (const auto info = find(req, res))
                send_json(res, to_json(*info));
        });
        server.Get(R"(/jobs/([\w-]+)/violations)", [this](const httplib::Request &req, httplib::Response &res) {
            if (const auto info = find(req, res))
                send_json(res, info->validation);
        });
        server.Get(R"(/jobs/([\w-]+)/preview)", [this](const httplib::Request &req, httplib::Response &res) {
            send_artifact(req, res, artifact::kPreview, false);
        });
        server.Get(R"(/jobs/([\w-]+)/plan)", [this](const httplib::Request &req, httplib::Response &res) {
            send_artifact(req, res, artifact::kPlan, false);
        });
        server.Get(R"(/jobs/([\w-]+)/artifacts/([\w.-]+))",
                   [this](const httplib::Request &req, httplib::Response &res) {
                       send_artifact(req, res, req.matches[2], true);
                   });
        const std::pair<const char *, JobAction> actions[] = {
            {"generate", JobAction::Generate}, {"plan", JobAction::Plan}, {"postprocess", JobAction::Postprocess}};
        for (const auto &[name, action] : actions)
            server.Post(std::string(R"(/jobs/([\w-]+)/)") + name,
                        [this, action = action](const httplib::Request &req, httplib::Response &res) {
                            trigger(req, res, action);
                        });
        server.set_exception_handler([](const httplib::Request &, httplib::Response &res, std::exception_ptr ep) {
            try {
                std::rethrow_exception(ep);
            } catch (const Error &e) {
                send_error(res, http_status(e.code()), e.code(), e.what());
            } catch (const nlohmann::json::exception &e) {
                send_error(res, 400, ErrorCode::ParseError, e.what());
            } catch (const std::exception &e) {
                send_error(res, 500, ErrorCode::InvalidArgument, e.what());
            }
        });
    }
};

HttpService::HttpService(JobService &jobs, PrinterProfile defaults)
    : impl_(std::make_unique<Impl>(jobs, std::move(defaults)))
{
    impl_->routes();
}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string &host, int port)
{
    if (port == 0)
        return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

void HttpService::serve() { impl_->server.listen_after_bind(); }

void HttpService::stop() { impl_->server.stop(); }

} // namespace magneto
