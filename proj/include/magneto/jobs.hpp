#pragma once

#include "magneto/error.hpp"
#include "magneto/pipeline.hpp"

#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace magneto {

enum class JobState { Created, Generated, Planned, Postprocessed, Failed };
enum class JobAction { Generate, Plan, Postprocess };

std::string_view to_string(JobState state);
std::string_view to_string(JobAction action);

struct JobError {
    ErrorCode code = ErrorCode::InvalidArgument;
    std::string message;
};

// Point-in-time copy of a job, safe to read while the worker runs.
struct JobInfo {
    std::string id;
    JobState state = JobState::Created;
    std::optional<JobAction> running;
    std::vector<JobAction> queued;
    CellSpec spec;
    PrinterProfile profile;
    GenerateOptions options;
    Json validation;
    std::map<std::string, std::string> artifacts;
    std::optional<JobError> error;
};

Json to_json(const JobInfo &info);
Json error_json(ErrorCode code, const std::string &message);

// Jobs advance created -> generated -> planned -> postprocessed, or to
// failed. Requested stages run one at a time on a single worker thread in
// request order, whatever job they belong to.
class JobService {
public:
    JobService();
    ~JobService();
    JobService(const JobService &) = delete;
    JobService &operator=(const JobService &) = delete;

    std::string create(TriMesh mesh, const CellSpec &spec, const PrinterProfile &profile,
                       const GenerateOptions &options = {});

    // Queue a stage. Throws JobState when the job, once its queued stages
    // finish, would not be in the state the stage needs, and InvalidArgument
    // for an unknown id.
    void request(const std::string &id, JobAction action, std::string gcode = {});

    std::optional<JobInfo> info(const std::string &id) const;
    std::vector<std::string> ids() const;

    // Blocks until nothing is queued or running.
    void wait_idle() const;

    // "start <action> <id>" and "end <action> <id>" in execution order.
    std::vector<std::string> history() const;

private:
    struct Job;
    struct Task {
        std::string id;
        JobAction action;
        std::string gcode;
    };

    void run();

    mutable std::mutex mutex_;
    mutable std::condition_variable changed_;
    std::map<std::string, std::shared_ptr<Job>> jobs_;
    std::deque<Task> queue_;
    bool busy_ = false;
    bool stopping_ = false;
    int next_id_ = 1;
    std::vector<std::string> history_;
    std::thread worker_;
};

} // namespace magneto
