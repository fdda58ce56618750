#include "termweave/service.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "termweave/error.hpp"

namespace termweave {

std::string_view to_string(JobState state) {
  switch (state) {
    case JobState::Queued: return "queued";
    case JobState::Running: return "running";
    case JobState::Done: return "done";
    case JobState::Failed: return "failed";
  }
  return "queued";
}

namespace {

void send_json(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view error, std::string_view detail) {
  send_json(res, {{"error", error}, {"detail", detail}}, status);
}

Json job_json(const JobStatus& job) {
  Json j = {{"id", job.id},
            {"status", to_string(job.state)},
            {"params", to_json(job.params)},
            {"reduction", job.reduction}};
  if (job.state == JobState::Failed) j["error"] = job.error;
  return j;
}

Json run_json(const RunInfo& run) {
  return {{"id", run.id},
          {"status", "done"},
          {"graph", run.graph},
          {"reduction", run.reduction},
          {"params", to_json(run.params)},
          {"gamma", run.params.gamma},
          {"seed", run.params.seed},
          {"topic_count", run.topic_count},
          {"topic_sizes", run.topic_sizes},
          {"assigned", run.assigned},
          {"vertices", run.vertices},
          {"coverage", run.coverage()}};
}

std::size_t parse_index(const std::string& s) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    throw DataError("'" + s + "' is not a topic index");
  }
  if (pos != s.size()) throw DataError("'" + s + "' is not a topic index");
  return static_cast<std::size_t>(v);
}

std::string required_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) throw DataError(std::string("query parameter '") + name + "' is required");
  return req.get_param_value(name);
}

}  // namespace

struct Service::Impl {
  Workspace& workspace;
  ServeSettings settings;
  httplib::Server server;
  bool bound = false;

  mutable std::mutex mutex;
  std::condition_variable cv;
  std::condition_variable idle_cv;
  std::map<std::string, JobStatus> jobs;
  std::deque<std::string> queue;
  bool busy = false;
  bool stopping = false;
  std::thread worker;

  Impl(Workspace& w, ServeSettings s) : workspace(w), settings(std::move(s)) {
    routes();
    worker = std::thread([this] { work(); });
  }

  ~Impl() {
    {
      std::lock_guard lock(mutex);
      stopping = true;
    }
    cv.notify_all();
    server.stop();
    if (worker.joinable()) worker.join();
  }

  void work() {
    while (true) {
      std::string id;
      {
        std::unique_lock lock(mutex);
        cv.wait(lock, [&] { return stopping || !queue.empty(); });
        if (stopping) return;
        id = queue.front();
        queue.pop_front();
        jobs[id].state = JobState::Running;
        busy = true;
      }
      JobStatus job;
      {
        std::lock_guard lock(mutex);
        job = jobs[id];
      }
      try {
        workspace.detect(job.params, job.reduction);
        std::lock_guard lock(mutex);
        jobs[id].state = JobState::Done;
      } catch (const std::exception& e) {
        std::lock_guard lock(mutex);
        jobs[id].state = JobState::Failed;
        jobs[id].error = e.what();
      }
      {
        std::lock_guard lock(mutex);
        busy = false;
      }
      idle_cv.notify_all();
    }
  }

  JobStatus submit(const DetectParams& params, std::optional<double> reduction) {
    params.validate();
    const double p = reduction.value_or(workspace.config().graph.reduction);
    const auto graph = workspace.graph_id(p);
    const auto id = params_hash(params, p, graph);
    JobStatus status{id, JobState::Queued, {}, params, p};
    std::lock_guard lock(mutex);
    if (auto it = jobs.find(id); it != jobs.end() && it->second.state != JobState::Failed) return it->second;
    if (workspace.project().find(id)) {
      status.state = JobState::Done;
      jobs[id] = status;
      return status;
    }
    jobs[id] = status;
    queue.push_back(id);
    cv.notify_all();
    return status;
  }

  template <typename Handler>
  auto guarded(Handler handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(req, res);
      } catch (const DataError& e) {
        send_error(res, 400, "bad_request", e.what());
      } catch (const Json::exception& e) {
        send_error(res, 400, "bad_request", e.what());
      } catch (const NotFoundError& e) {
        send_error(res, 404, "not_found", e.what());
      } catch (const PrerequisiteError& e) {
        send_error(res, 409, "prerequisite", e.what());
      } catch (const ConflictError& e) {
        send_error(res, 409, "conflict", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    };
  }

  Json topic_list(const std::string& run) const {
    auto topics = workspace.topics(run);
    auto c = workspace.corpus();
    auto r = workspace.rankings();
    Json list = Json::array();
    for (std::size_t i = 0; i < topics->topics.size(); ++i) {
      auto terms = topics->topics[i];
      std::stable_sort(terms.begin(), terms.end(),
                       [&](TermId a, TermId b) { return r->corpus.r[a] > r->corpus.r[b]; });
      Json names = Json::array();
      for (TermId t : terms) names.push_back(c->vocabulary.term(t));
      list.push_back({{"id", i}, {"size", terms.size()}, {"terms", std::move(names)}});
    }
    return {{"run", run}, {"topics", std::move(list)}, {"unassigned", topics->unassigned.size()}};
  }

  SheetBundle sheets_for(const std::string& run) const {
    if (workspace.sheets_id(run)) return *workspace.sheet_bundle(run);
    return workspace.build_sheets(run);
  }

  std::size_t checked_topic(const std::string& run, const std::string& index) const {
    const auto i = parse_index(index);
    if (i >= workspace.topics(run)->topics.size()) {
      throw NotFoundError("run " + run + " has no topic " + index);
    }
    return i;
  }

  void routes() {
    server.Get("/api/project", guarded([this](const httplib::Request&, httplib::Response& res) {
      const auto m = workspace.project().manifest();
      Json graphs = Json::object();
      for (const auto& [key, id] : m.at("graphs").items()) {
        const auto info = workspace.project().find(id.get<std::string>());
        graphs[key] = {{"id", id}, {"vertices", info ? info->meta.value("vertices", 0) : 0},
                       {"edges", info ? info->meta.value("edges", 0) : 0}};
      }
      Json corpus = nullptr;
      if (m.at("corpus").is_string()) {
        const auto info = workspace.project().find(m["corpus"].get<std::string>());
        corpus = {{"id", m["corpus"]}, {"documents", info ? info->meta.value("documents", 0) : 0},
                  {"terms", info ? info->meta.value("terms", 0) : 0}};
      }
      send_json(res, {{"root", workspace.project().root().string()},
                      {"corpus", corpus},
                      {"rankings", m.at("rankings")},
                      {"graphs", graphs},
                      {"runs", m.at("runs").size()},
                      {"defaults",
                       {{"reduction", workspace.config().graph.reduction},
                        {"detect", to_json(workspace.config().detect)}}}});
    }));

    server.Get("/api/topics-terms", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto run = required_param(req, "run");
      send_json(res, to_json(*workspace.topics(run), workspace.corpus()->vocabulary));
    }));

    server.Post("/api/runs", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const Json body = req.body.empty() ? Json::object() : Json::parse(req.body);
      if (!body.is_object()) throw DataError("request body must be a JSON object");
      for (const auto& [key, value] : body.items()) {
        static const char* allowed[] = {"gamma", "reduction", "n_rep", "n_con", "min_size_frac", "seed"};
        if (std::find(std::begin(allowed), std::end(allowed), key) == std::end(allowed)) {
          throw DataError("unknown field '" + key + "'");
        }
      }
      Json params = to_json(workspace.config().detect);
      for (const auto& [key, value] : body.items()) {
        if (key != "reduction") params[key] = value;
      }
      std::optional<double> reduction;
      if (body.contains("reduction")) reduction = body["reduction"].get<double>();
      const auto job = submit(detect_params_from_json(params), reduction);
      if (job.state == JobState::Done) {
        Json out = run_json(workspace.run_info(job.id));
        out["cached"] = true;
        send_json(res, out);
      } else {
        send_json(res, job_json(job), 202);
      }
    }));

    server.Get("/api/runs", guarded([this](const httplib::Request&, httplib::Response& res) {
      Json list = Json::array();
      for (const auto& run : workspace.runs()) list.push_back(run_json(run));
      Json pending = Json::array();
      {
        std::lock_guard lock(mutex);
        for (const auto& [id, job] : jobs) {
          if (job.state != JobState::Done) pending.push_back(job_json(job));
        }
      }
      send_json(res, {{"runs", std::move(list)}, {"jobs", std::move(pending)}});
    }));

    server.Get(R"(/api/runs/([A-Za-z0-9_-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      {
        std::lock_guard lock(mutex);
        if (auto it = jobs.find(id); it != jobs.end() && it->second.state != JobState::Done) {
          send_json(res, job_json(it->second), it->second.state == JobState::Failed ? 500 : 202);
          return;
        }
      }
      send_json(res, run_json(workspace.run_info(id)));
    }));

    server.Get(R"(/api/jobs/([A-Za-z0-9_-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      std::lock_guard lock(mutex);
      auto it = jobs.find(id);
      if (it == jobs.end()) throw NotFoundError("unknown job '" + id + "'");
      send_json(res, job_json(it->second));
    }));

    server.Get(R"(/api/runs/([A-Za-z0-9_-]+)/topics)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 send_json(res, topic_list(req.matches[1]));
               }));

    server.Get(R"(/api/topics/([A-Za-z0-9_-]+)/([0-9]+)/sheet)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const std::string run = req.matches[1];
                 const auto i = checked_topic(run, req.matches[2]);
                 const auto bundle = sheets_for(run);
                 send_json(res, to_json(bundle.sheets.at(i), workspace.corpus()->vocabulary));
               }));

    server.Get(R"(/api/topics/([A-Za-z0-9_-]+)/([0-9]+)/coherence)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const std::string run = req.matches[1];
                 const auto i = checked_topic(run, req.matches[2]);
                 const auto bundle = sheets_for(run);
                 send_json(res, to_json(bundle.coherence.at(i)));
               }));

    server.Get(R"(/api/documents/([^/]+)/shares)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto run = required_param(req, "run");
                 send_json(res, to_json(workspace.shares(run, req.matches[1])));
               }));

    server.Get(R"(/api/runs/([A-Za-z0-9_-]+)/compare/([A-Za-z0-9_-]+))",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 send_json(res, to_json(workspace.compare(req.matches[1], req.matches[2])));
               }));

    server.Get("/api/eval/crosstable", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto run = required_param(req, "run");
      const auto e = workspace.evaluate(run);
      Json matching = Json::object();
      for (std::size_t i = 0; i < e.matching.size(); ++i) {
        matching[e.table.classes[i]] = e.matching[i] ? Json(e.table.topics[*e.matching[i]]) : Json(nullptr);
      }
      send_json(res, {{"run", run}, {"crosstable", to_json(e.table)}, {"matching", matching},
                      {"stats", to_json(e.stats)}});
    }));

    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (res.body.empty() && res.status == 404) {
        send_error(res, 404, "not_found", "no route for " + req.path);
      }
    });

    if (settings.static_dir && !server.set_mount_point("/", settings.static_dir->string())) {
      throw DataError("static directory " + settings.static_dir->string() + " does not exist");
    }
  }
};

Service::Service(Workspace& workspace, ServeSettings settings)
    : impl_(std::make_unique<Impl>(workspace, std::move(settings))) {}

Service::~Service() = default;

int Service::bind() {
  auto& s = *impl_;
  int port = s.settings.port;
  if (port == 0) {
    port = s.server.bind_to_any_port(s.settings.host);
    if (port < 0) throw Error("cannot bind " + s.settings.host);
  } else if (!s.server.bind_to_port(s.settings.host, port)) {
    throw Error("cannot bind " + s.settings.host + ":" + std::to_string(port) + " (port in use?)");
  }
  s.bound = true;
  return port;
}

void Service::run() {
  if (!impl_->bound) throw Error("service is not bound");
  impl_->server.listen_after_bind();
}

void Service::stop() { impl_->server.stop(); }

JobStatus Service::submit(const DetectParams& params, std::optional<double> reduction) {
  return impl_->submit(params, reduction);
}

std::optional<JobStatus> Service::job(const std::string& id) const {
  std::lock_guard lock(impl_->mutex);
  auto it = impl_->jobs.find(id);
  if (it == impl_->jobs.end()) return std::nullopt;
  return it->second;
}

void Service::wait_idle() {
  std::unique_lock lock(impl_->mutex);
  impl_->idle_cv.wait(lock, [&] { return impl_->queue.empty() && !impl_->busy; });
}

}  // namespace termweave
