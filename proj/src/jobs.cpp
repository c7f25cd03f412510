#include "magneto/jobs.hpp"

#include "magneto/config.hpp"

namespace magneto {

std::string_view to_string(JobState state)
{
    switch (state) {
    case JobState::Created: return "created";
    case JobState::Generated: return "generated";
    case JobState::Planned: return "planned";
    case JobState::Postprocessed: return "postprocessed";
    case JobState::Failed: return "failed";
    }
    return "unknown";
}

std::string_view to_string(JobAction action)
{
    switch (action) {
    case JobAction::Generate: return "generate";
    case JobAction::Plan: return "plan";
    case JobAction::Postprocess: return "postprocess";
    }
    return "unknown";
}

Json error_json(ErrorCode code, const std::string &message)
{
    return {{"error", {{"code", to_string(code)}, {"exit_code", exit_code(code)}, {"message", message}}}};
}

Json to_json(const JobInfo &info)
{
    Json queued = Json::array(), artifacts = Json::array();
    for (JobAction a : info.queued)
        queued.push_back(to_string(a));
    for (const auto &[name, bytes] : info.artifacts)
        artifacts.push_back(name);
    return {{"id", info.id},
            {"state", to_string(info.state)},
            {"running", info.running ? Json(to_string(*info.running)) : Json(nullptr)},
            {"queued", queued},
            {"spec", to_json(info.spec)},
            {"profile", to_json(info.profile)},
            {"options",
             {{"single_sided", info.options.mode == ShellMode::SingleSided},
              {"preview_only", info.options.preview_only},
              {"keep_position", info.options.keep_position}}},
            {"artifacts", artifacts},
            {"error", info.error ? error_json(info.error->code, info.error->message)["error"] : Json(nullptr)}};
}

struct JobService::Job {
    explicit Job(Session s) : session(std::move(s)) {}

    Session session; // touched only by the worker once created
    JobInfo info;    // guarded by the service mutex
};

namespace {

JobState after(JobAction action)
{
    switch (action) {
    case JobAction::Generate: return JobState::Generated;
    case JobAction::Plan: return JobState::Planned;
    case JobAction::Postprocess: return JobState::Postprocessed;
    }
    return JobState::Failed;
}

JobState needs(JobAction action)
{
    switch (action) {
    case JobAction::Generate: return JobState::Created;
    case JobAction::Plan: return JobState::Generated;
    case JobAction::Postprocess: return JobState::Planned;
    }
    return JobState::Failed;
}

} // namespace

JobService::JobService() : worker_([this] { run(); }) {}

JobService::~JobService()
{
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    changed_.notify_all();
    worker_.join();
}

std::string JobService::create(TriMesh mesh, const CellSpec &spec, const PrinterProfile &profile,
                               const GenerateOptions &options)
{
    auto job = std::make_shared<Job>(Session(std::move(mesh), spec, profile, options));
    std::lock_guard lock(mutex_);
    const std::string id = "job-" + std::to_string(next_id_++);
    job->info.id = id;
    job->info.spec = spec;
    job->info.profile = profile;
    job->info.options = options;
    job->info.validation = cmd_validate(spec, profile);
    jobs_[id] = job;
    return id;
}

void JobService::request(const std::string &id, JobAction action, std::string gcode)
{
    {
        std::lock_guard lock(mutex_);
        const auto it = jobs_.find(id);
        if (it == jobs_.end())
            throw Error(ErrorCode::InvalidArgument, "no job " + id);
        JobInfo &info = it->second->info;
        JobState projected = info.state;
        if (info.running)
            projected = after(*info.running);
        for (JobAction a : info.queued)
            projected = after(a);
        if (info.state == JobState::Failed || projected != needs(action))
            throw Error(ErrorCode::JobState, std::string("cannot ") + std::string(to_string(action)) + " job " + id +
                                                 " in state " + std::string(to_string(info.state)));
        info.queued.push_back(action);
        queue_.push_back({id, action, std::move(gcode)});
    }
    changed_.notify_all();
}

std::optional<JobInfo> JobService::info(const std::string &id) const
{
    std::lock_guard lock(mutex_);
    const auto it = jobs_.find(id);
    if (it == jobs_.end())
        return std::nullopt;
    return it->second->info;
}

std::vector<std::string> JobService::ids() const
{
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto &[id, job] : jobs_)
        out.push_back(id);
    return out;
}

void JobService::wait_idle() const
{
    std::unique_lock lock(mutex_);
    changed_.wait(lock, [this] { return queue_.empty() && !busy_; });
}

std::vector<std::string> JobService::history() const
{
    std::lock_guard lock(mutex_);
    return history_;
}

void JobService::run()
{
    for (;;) {
        Task task;
        std::shared_ptr<Job> job;
        {
            std::unique_lock lock(mutex_);
            changed_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
            if (stopping_)
                return;
            task = std::move(queue_.front());
            queue_.pop_front();
            job = jobs_.at(task.id);
            job->info.queued.erase(job->info.queued.begin());
            job->info.running = task.action;
            busy_ = true;
            history_.push_back("start " + std::string(to_string(task.action)) + " " + task.id);
        }
        std::optional<JobError> failure;
        try {
            switch (task.action) {
            case JobAction::Generate: job->session.generate(); break;
            case JobAction::Plan: job->session.plan(); break;
            case JobAction::Postprocess: job->session.postprocess(task.gcode); break;
            }
        } catch (const Error &e) {
            failure = JobError{e.code(), e.what()};
        } catch (const std::exception &e) {
            failure = JobError{ErrorCode::InvalidArgument, e.what()};
        }
        {
            std::lock_guard lock(mutex_);
            JobInfo &info = job->info;
            info.running.reset();
            info.artifacts = job->session.artifacts();
            if (failure) {
                info.state = JobState::Failed;
                info.error = failure;
                // Later stages of a failed job cannot run.
                std::erase_if(queue_, [&](const Task &t) { return t.id == task.id; });
                info.queued.clear();
            } else {
                info.state = after(task.action);
            }
            history_.push_back("end " + std::string(to_string(task.action)) + " " + task.id);
            busy_ = false;
        }
        changed_.notify_all();
    }
}

} // namespace magneto
