#include "termweave/store.hpp"

#include <fcntl.h>
#include <openssl/evp.h>
#include <sys/file.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <utility>
#include <fstream>
#include <sstream>

#include "termweave/error.hpp"

namespace termweave {

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

constexpr int kFormat = 1;
constexpr std::size_t kIdLength = 16;

struct KindInfo {
  ArtifactKind kind;
  std::string_view name;
  std::string_view dir;
  std::string_view extension;
};

constexpr KindInfo kKinds[] = {
    {ArtifactKind::Corpus, "corpus", "corpus", ".json"},
    {ArtifactKind::Rankings, "rankings", "rankings", ".json"},
    {ArtifactKind::Graph, "graph", "graphs", ".bin"},
    {ArtifactKind::Topics, "topics", "runs", ".json"},
    {ArtifactKind::Sheets, "sheets", "sheets", ".json"},
    {ArtifactKind::Eval, "eval", "eval", ".json"},
};

const KindInfo& info(ArtifactKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k;
  }
  throw Error("unknown artifact kind");
}

std::string relative_path(ArtifactKind kind, const std::string& id) {
  const auto& k = info(kind);
  if (kind == ArtifactKind::Topics) return std::string(k.dir) + "/" + id + "/topics.json";
  return std::string(k.dir) + "/" + id + std::string(k.extension);
}

bool valid_id(std::string_view id) {
  if (id.empty() || id.size() > 128) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    if (!ok) return false;
  }
  return true;
}

ArtifactInfo info_from_json(const std::string& id, const Json& j) {
  ArtifactInfo a;
  a.id = id;
  a.kind = parse_artifact_kind(j.at("kind").get<std::string>());
  a.path = j.at("path").get<std::string>();
  a.sha256 = j.at("sha256").get<std::string>();
  a.size = j.at("size").get<std::uint64_t>();
  a.meta = j.value("meta", Json::object());
  return a;
}

Json empty_manifest() {
  return {{"format", kFormat},
          {"revision", 0},
          {"artifacts", Json::object()},
          {"corpus", nullptr},
          {"annotation", nullptr},
          {"rankings", nullptr},
          {"graphs", Json::object()},
          {"runs", Json::array()}};
}

}  // namespace

std::string_view to_string(ArtifactKind kind) { return info(kind).name; }

ArtifactKind parse_artifact_kind(std::string_view name) {
  for (const auto& k : kKinds) {
    if (k.name == name) return k.kind;
  }
  throw DataError("unknown artifact kind '" + std::string(name) + "'");
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  static std::atomic<std::uint64_t> counter{0};
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw Error("cannot create " + tmp.string() + ": " + std::strerror(errno));
  const char* p = bytes.data();
  std::size_t left = bytes.size();
  while (left > 0) {
    const auto n = ::write(fd, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      ::unlink(tmp.c_str());
      throw Error("write to " + tmp.string() + " failed: " + std::strerror(err));
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) {
    ::unlink(tmp.c_str());
    throw Error("cannot flush " + tmp.string());
  }
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    const int err = errno;
    ::unlink(tmp.c_str());
    throw Error("cannot rename onto " + path.string() + ": " + std::strerror(err));
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

Project::Project(fs::path root, int lock_fd)
    : root_(std::move(root)), lock_fd_(lock_fd), mutex_(std::make_unique<std::mutex>()) {}

Project::Project(Project&& other) noexcept
    : root_(std::move(other.root_)),
      lock_fd_(std::exchange(other.lock_fd_, -1)),
      revision_(other.revision_),
      mutex_(std::move(other.mutex_)) {}

Project& Project::operator=(Project&& other) noexcept {
  if (this != &other) {
    if (lock_fd_ >= 0) ::close(lock_fd_);
    root_ = std::move(other.root_);
    lock_fd_ = std::exchange(other.lock_fd_, -1);
    revision_ = other.revision_;
    mutex_ = std::move(other.mutex_);
  }
  return *this;
}

Project::~Project() {
  if (lock_fd_ >= 0) ::close(lock_fd_);
}

bool Project::is_project(const fs::path& root) { return fs::is_regular_file(root / "manifest.json"); }

Project Project::init(const fs::path& root) {
  if (is_project(root)) throw ConflictError("project already initialized at " + root.string());
  fs::create_directories(root);
  for (const auto& k : kKinds) fs::create_directories(root / k.dir);
  write_file_atomic(root / "manifest.json", empty_manifest().dump(2) + "\n");
  return open(root, Mode::Write);
}

Project Project::open(const fs::path& root, Mode mode) {
  if (!is_project(root)) throw PrerequisiteError("no project at " + root.string() + " (run init first)");
  int fd = -1;
  if (mode == Mode::Write) {
    fd = ::open((root / ".lock").c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd < 0) throw Error("cannot open project lock: " + std::string(std::strerror(errno)));
    if (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd);
      throw ConflictError("project " + root.string() + " is locked by another writer");
    }
  }
  Project project(root, fd);
  project.revision_ = project.read_manifest().at("revision").get<std::uint64_t>();
  return project;
}

Json Project::read_manifest() const {
  const auto text = read_file(root_ / "manifest.json");
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("revision") || !j.contains("artifacts")) {
    throw DataError("manifest.json is not a valid project manifest");
  }
  if (j.value("format", 0) != kFormat) throw DataError("unsupported manifest format");
  return j;
}

Json Project::manifest() const { return read_manifest(); }

void Project::require_writable() const {
  if (!writable()) throw Error("project was opened read-only");
}

void Project::write_manifest(Json& manifest) {
  manifest["revision"] = ++revision_;
  write_file_atomic(root_ / "manifest.json", manifest.dump(2) + "\n");
}

void Project::update_manifest(const std::function<void(Json&)>& mutate) {
  require_writable();
  std::lock_guard lock(*mutex_);
  Json m = read_manifest();
  if (m.at("revision").get<std::uint64_t>() != revision_) {
    throw ConflictError("manifest was modified by another process");
  }
  mutate(m);
  write_manifest(m);
}

std::string Project::save_artifact(ArtifactKind kind, std::string_view payload, const Json& meta,
                                   std::optional<std::string> id) {
  require_writable();
  const std::string digest = sha256_hex(payload);
  const std::string key = id ? *id : digest.substr(0, kIdLength);
  if (!valid_id(key)) throw DataError("invalid artifact id '" + key + "'");
  const std::string rel = relative_path(kind, key);

  std::lock_guard lock(*mutex_);
  Json m = read_manifest();
  if (m.at("revision").get<std::uint64_t>() != revision_) {
    throw ConflictError("manifest was modified by another process");
  }
  auto& artifacts = m["artifacts"];
  if (artifacts.contains(key)) {
    const auto existing = info_from_json(key, artifacts[key]);
    if (existing.kind != kind || existing.sha256 != digest) {
      throw ConflictError("artifact " + key + " already exists with different content");
    }
    if (fs::exists(root_ / rel) && sha256_hex(read_file(root_ / rel)) == digest) return key;
  }
  write_file_atomic(root_ / rel, payload);
  artifacts[key] = {{"kind", to_string(kind)},
                    {"path", rel},
                    {"sha256", digest},
                    {"size", payload.size()},
                    {"meta", meta.is_null() ? Json::object() : meta}};
  write_manifest(m);
  return key;
}

std::optional<ArtifactInfo> Project::find(std::string_view id) const {
  const Json m = read_manifest();
  const auto& artifacts = m.at("artifacts");
  auto it = artifacts.find(std::string(id));
  if (it == artifacts.end()) return std::nullopt;
  return info_from_json(std::string(id), *it);
}

std::vector<ArtifactInfo> Project::artifacts(ArtifactKind kind) const {
  const Json m = read_manifest();
  std::vector<ArtifactInfo> out;
  for (const auto& [id, j] : m.at("artifacts").items()) {
    auto a = info_from_json(id, j);
    if (a.kind == kind) out.push_back(std::move(a));
  }
  return out;
}

std::string Project::load_artifact(std::string_view id) const {
  const auto a = find(id);
  if (!a) throw NotFoundError("unknown artifact '" + std::string(id) + "'");
  std::string bytes;
  try {
    bytes = read_file(root_ / a->path);
  } catch (const NotFoundError&) {
    throw ChecksumError("artifact " + a->id + " is missing from disk");
  }
  if (bytes.size() != a->size || sha256_hex(bytes) != a->sha256) {
    throw ChecksumError("artifact " + a->id + " failed checksum verification");
  }
  return bytes;
}

void Project::write_file(const fs::path& relative, std::string_view bytes) {
  require_writable();
  if (relative.is_absolute() || relative.lexically_normal().string().starts_with("..")) {
    throw DataError("export path must stay inside the project");
  }
  write_file_atomic(root_ / relative, bytes);
}

}  // namespace termweave
