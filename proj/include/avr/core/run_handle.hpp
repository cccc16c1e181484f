#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "avr/core/types.hpp"

namespace avr {

using json = nlohmann::json;
namespace fs = std::filesystem;

/// Destination for persisted artifacts (transcripts, comparison records,
/// media). Paths are relative to root().
class ArtifactSink {
 public:
  virtual ~ArtifactSink() = default;
  virtual fs::path root() const = 0;
  virtual fs::path write(const fs::path& rel, std::string_view bytes) = 0;
};

/// Plain directory, no journal. Used by one-off eval and record commands.
class DirectorySink final : public ArtifactSink {
 public:
  explicit DirectorySink(fs::path root);
  fs::path root() const override { return root_; }
  fs::path write(const fs::path& rel, std::string_view bytes) override;

 private:
  fs::path root_;
  std::mutex mu_;
};

class RunHandle;

/// Files and versions produced by one pipeline step. Nothing a step writes
/// counts as persisted until RunHandle::commit records it in the journal.
class StepTx final : public ArtifactSink {
 public:
  StepTx(const StepTx&) = delete;
  StepTx& operator=(const StepTx&) = delete;
  StepTx(StepTx&&) noexcept;
  StepTx& operator=(StepTx&&) noexcept;
  ~StepTx() override;

  const std::string& name() const { return name_; }
  RunHandle& run() const { return *run_; }

  fs::path root() const override;
  fs::path write(const fs::path& rel, std::string_view bytes) override;
  fs::path copy_in(const fs::path& source, const fs::path& rel);
  /// Allocates the next version id and writes `versions/vNNN.html`.
  ContentVersion add_version(VersionStage stage, int iteration, std::optional<int> parent, std::string producer,
                             std::string source);

 private:
  friend class RunHandle;
  StepTx(RunHandle* run, std::string name);

  RunHandle* run_ = nullptr;
  std::string name_;
  std::unique_ptr<std::mutex> mu_;
  std::vector<std::string> files_;
  std::vector<ContentVersion> versions_;
};

struct StepRecord {
  std::string name;
  json data;
  std::vector<std::string> files;
  std::vector<int> version_ids;
};

/// One run directory: manifest, append-only journal, versions, recordings,
/// logs, transcripts, comparison records, copied assets and the result.
class RunHandle {
 public:
  /// Creates the layout, or resumes an existing run after its last committed
  /// step. Resuming with a different config or spec is refused.
  static std::shared_ptr<RunHandle> open(const fs::path& dir, const RunConfig& config, const ContentSpec& spec);
  /// Resumes using whatever the manifest says.
  static std::shared_ptr<RunHandle> open_existing(const fs::path& dir);

  const fs::path& dir() const { return dir_; }
  const RunConfig& config() const { return config_; }
  const ContentSpec& spec() const { return spec_; }
  bool resumed() const { return resumed_; }
  const std::vector<fs::path>& quarantined() const { return quarantined_; }

  StepTx begin_step(std::string name);
  /// Appends the step to the journal. Committing a name twice replaces the
  /// earlier record.
  void commit(StepTx& tx, json data = json::object());

  bool step_done(std::string_view name) const;
  std::optional<json> step_data(std::string_view name) const;
  std::optional<StepRecord> step(std::string_view name) const;
  std::vector<std::string> completed_steps() const;

  std::optional<ContentVersion> version(int version_id) const;
  std::vector<ContentVersion> versions() const;

  static constexpr const char* kManifest = "manifest";
  static constexpr const char* kJournal = "journal";
  static constexpr const char* kResult = "result";

 private:
  friend class StepTx;

  struct State {
    std::map<std::string, StepRecord, std::less<>> steps;
    std::vector<std::string> order;
    std::map<int, ContentVersion> versions;
    std::set<std::string> files;
  };

  RunHandle(fs::path dir, RunConfig config, ContentSpec spec);
  void load_journal();
  void quarantine_orphans();
  int allocate_version_id();
  std::shared_ptr<const State> snapshot() const;

  fs::path dir_;
  RunConfig config_;
  ContentSpec spec_;
  bool resumed_ = false;
  std::vector<fs::path> quarantined_;

  mutable std::mutex mu_;
  std::shared_ptr<const State> state_;
  int next_version_id_ = 1;
};

}  // namespace avr
