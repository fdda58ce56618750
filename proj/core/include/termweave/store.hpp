#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace termweave {

enum class ArtifactKind { Corpus, Rankings, Graph, Topics, Sheets, Eval };

std::string_view to_string(ArtifactKind kind);
ArtifactKind parse_artifact_kind(std::string_view name);

std::string sha256_hex(std::string_view bytes);

struct ArtifactInfo {
  std::string id;
  ArtifactKind kind = ArtifactKind::Corpus;
  std::string path;  // relative to the project root
  std::string sha256;
  std::uint64_t size = 0;
  nlohmann::json meta;
};

/// A project directory: manifest.json plus one subdirectory per artifact kind.
///
/// Artifacts are immutable and content addressed. Runs are the exception: they
/// are keyed by a hash of their parameters, and re-saving a run with different
/// bytes is a conflict.
class Project {
 public:
  enum class Mode { Read, Write };

  static Project init(const std::filesystem::path& root);
  static Project open(const std::filesystem::path& root, Mode mode = Mode::Read);
  static bool is_project(const std::filesystem::path& root);

  Project(Project&&) noexcept;
  Project& operator=(Project&&) noexcept;
  ~Project();

  const std::filesystem::path& root() const noexcept { return root_; }
  bool writable() const noexcept { return lock_fd_ >= 0; }

  /// Snapshot of the manifest as currently on disk.
  nlohmann::json manifest() const;

  /// Writes the payload (temp file then rename) and records it in the manifest.
  /// With no explicit id the id is a prefix of the payload's SHA-256.
  std::string save_artifact(ArtifactKind kind, std::string_view payload, const nlohmann::json& meta = {},
                            std::optional<std::string> id = std::nullopt);
  std::string load_artifact(std::string_view id) const;

  std::optional<ArtifactInfo> find(std::string_view id) const;
  std::vector<ArtifactInfo> artifacts(ArtifactKind kind) const;

  /// Applies `mutate` to the manifest under the project's write lock.
  void update_manifest(const std::function<void(nlohmann::json&)>& mutate);

  /// Writes an auxiliary file (exports) atomically below the project root.
  void write_file(const std::filesystem::path& relative, std::string_view bytes);

 private:
  Project(std::filesystem::path root, int lock_fd);
  nlohmann::json read_manifest() const;
  void write_manifest(nlohmann::json& manifest);
  void require_writable() const;

  std::filesystem::path root_;
  int lock_fd_ = -1;
  std::uint64_t revision_ = 0;
  std::unique_ptr<std::mutex> mutex_;
};

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace termweave
