#pragma once

#include "magneto/jobs.hpp"

#include <memory>
#include <string>

namespace magneto {

// HTTP front end of the job service:
//   GET  /limits                      cell envelope for the default profile
//   POST /jobs                        multipart (mesh, spec, profile, options) or JSON with mesh_path
//   GET  /jobs, /jobs/{id}            job snapshots
//   GET  /jobs/{id}/violations        validation report
//   GET  /jobs/{id}/preview, /plan    preview scene and plan JSON
//   POST /jobs/{id}/generate, /plan, /postprocess
//   GET  /jobs/{id}/artifacts/{name}  artifact download
// Failures carry {"error": {code, exit_code, message}}.
class HttpService {
public:
    explicit HttpService(JobService &jobs, PrinterProfile defaults = {});
    ~HttpService();

    // Binds to `port` (0 picks a free one) and returns the bound port, or -1.
    int bind(const std::string &host, int port);
    // Serves until stop(); call after bind().
    void serve();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Maps an error code onto the HTTP status of a failed request.
int http_status(ErrorCode code);

} // namespace magneto
