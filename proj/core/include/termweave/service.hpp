#pragma once

#include <memory>
#include <optional>
#include <string>

#include "termweave/config.hpp"
#include "termweave/pipeline.hpp"

namespace termweave {

enum class JobState { Queued, Running, Done, Failed };

std::string_view to_string(JobState state);

struct JobStatus {
  std::string id;  // equals the run id the job will produce
  JobState state = JobState::Queued;
  std::string error;
  DetectParams params;
  double reduction = 0;
};

/// REST front end over a Workspace. Detection requests are queued and run by
/// a single background worker; everything else reads persisted artifacts.
class Service {
 public:
  Service(Workspace& workspace, ServeSettings settings);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the listening socket; port 0 picks a free port. Returns the bound port.
  int bind();
  /// Serves until stop() is called. bind() must have succeeded.
  void run();
  void stop();

  /// Queues a detection unless the run already exists. Returns the job state.
  JobStatus submit(const DetectParams& params, std::optional<double> reduction);
  std::optional<JobStatus> job(const std::string& id) const;
  /// Blocks until the queue is empty and the worker is idle.
  void wait_idle();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace termweave
