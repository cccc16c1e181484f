#include "avr/core/run_handle.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "avr/core/errors.hpp"
#include "avr/core/io.hpp"
#include "avr/core/kvtree.hpp"

namespace avr {
namespace {

constexpr std::array<const char*, 6> kManagedDirs{"versions", "recordings", "logs",
                                                  "transcripts", "comparisons", "assets"};

std::string rel_string(const fs::path& rel) {
  const auto norm = rel.lexically_normal();
  if (norm.is_absolute() || norm.empty() || *norm.begin() == "..")
    throw ValidationError("artifact path escapes its root: " + rel.string());
  return norm.generic_string();
}

json version_meta(const ContentVersion& v) {
  json j{{"id", v.version_id},
         {"stage", std::string(to_string(v.stage))},
         {"iteration", v.iteration},
         {"producer", v.producer}};
  j["parent"] = v.parent ? json(*v.parent) : json(nullptr);
  return j;
}

std::string manifest_text(const RunConfig& config, const ContentSpec& spec) {
  YAML::Node root;
  root["schema"] = kv::kSchemaVersion;
  root["config"] = kv::to_node(config);
  root["spec"] = kv::to_node(spec);
  return kv::emit(root);
}

std::vector<std::string> differing_keys(const YAML::Node& a, const YAML::Node& b, const std::string& prefix) {
  std::vector<std::string> out;
  std::set<std::string> keys;
  for (const auto& kv : a) keys.insert(kv.first.as<std::string>());
  for (const auto& kv : b) keys.insert(kv.first.as<std::string>());
  for (const auto& k : keys) {
    const auto x = a[k];
    const auto y = b[k];
    if (x && y && x.IsMap() && y.IsMap()) {
      auto sub = differing_keys(x, y, prefix + k + ".");
      out.insert(out.end(), sub.begin(), sub.end());
    } else if (!x || !y || kv::emit(x) != kv::emit(y)) {
      out.push_back(prefix + k);
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- sinks

DirectorySink::DirectorySink(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

fs::path DirectorySink::write(const fs::path& rel, std::string_view bytes) {
  const auto path = root_ / rel_string(rel);
  std::lock_guard lock(mu_);
  io::write_file_atomic(path, bytes);
  return path;
}

StepTx::StepTx(RunHandle* run, std::string name)
    : run_(run), name_(std::move(name)), mu_(std::make_unique<std::mutex>()) {}
StepTx::StepTx(StepTx&&) noexcept = default;
StepTx& StepTx::operator=(StepTx&&) noexcept = default;
StepTx::~StepTx() = default;

fs::path StepTx::root() const { return run_->dir(); }

fs::path StepTx::write(const fs::path& rel, std::string_view bytes) {
  const auto key = rel_string(rel);
  const auto path = run_->dir() / key;
  io::write_file_atomic(path, bytes);
  std::lock_guard lock(*mu_);
  if (std::find(files_.begin(), files_.end(), key) == files_.end()) files_.push_back(key);
  return path;
}

fs::path StepTx::copy_in(const fs::path& source, const fs::path& rel) {
  return write(rel, io::read_file(source));
}

ContentVersion StepTx::add_version(VersionStage stage, int iteration, std::optional<int> parent,
                                   std::string producer, std::string source) {
  ContentVersion v;
  v.version_id = run_->allocate_version_id();
  v.stage = stage;
  v.iteration = iteration;
  v.parent = parent;
  v.producer = std::move(producer);
  v.source = std::move(source);
  validate(v);
  write(fs::path("versions") / (version_stem(v.version_id) + ".html"), v.source);
  std::lock_guard lock(*mu_);
  versions_.push_back(v);
  return v;
}

// ---------------------------------------------------------------- run handle

RunHandle::RunHandle(fs::path dir, RunConfig config, ContentSpec spec)
    : dir_(std::move(dir)), config_(std::move(config)), spec_(std::move(spec)),
      state_(std::make_shared<State>()) {}

std::shared_ptr<RunHandle> RunHandle::open(const fs::path& dir, const RunConfig& config, const ContentSpec& spec) {
  validate(config);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw RuntimeFailure("cannot create run directory " + dir.string() + ": " + ec.message());

  const auto manifest_path = dir / kManifest;
  const auto wanted = manifest_text(config, spec);
  std::shared_ptr<RunHandle> run(new RunHandle(fs::absolute(dir), config, spec));

  if (fs::exists(manifest_path)) {
    const auto existing = io::read_file(manifest_path);
    if (existing != wanted) {
      const auto a = kv::parse(existing, manifest_path.string());
      const auto b = kv::parse(wanted, "requested config");
      std::string keys;
      for (const auto& k : differing_keys(a, b, "")) keys += (keys.empty() ? "" : ", ") + k;
      throw ValidationError("refusing to resume " + dir.string() + ": manifest differs in " + keys);
    }
    run->resumed_ = true;
  } else {
    for (const char* sub : kManagedDirs) fs::create_directories(dir / sub, ec);
    if (ec) throw RuntimeFailure("cannot create run layout in " + dir.string() + ": " + ec.message());
    io::write_file_atomic(manifest_path, wanted);
  }
  run->load_journal();
  run->quarantine_orphans();
  return run;
}

std::shared_ptr<RunHandle> RunHandle::open_existing(const fs::path& dir) {
  const auto manifest_path = dir / kManifest;
  if (!fs::exists(manifest_path)) throw ValidationError(dir.string() + " is not a run directory (no manifest)");
  const auto root = kv::load_file(manifest_path);
  kv::check_schema(root, manifest_path.string());
  const auto config = kv::run_config_from(root["config"]);
  const auto spec = kv::content_spec_from(root["spec"], manifest_path.string());
  return open(dir, config, spec);
}

void RunHandle::load_journal() {
  auto state = std::make_shared<State>();
  const auto path = dir_ / kJournal;
  if (fs::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      json entry;
      try {
        entry = json::parse(line);
      } catch (const json::exception&) {
        // An interrupted append leaves a torn final line; it was never committed.
        spdlog::warn("{}: ignoring torn journal line {}", path.string(), lineno);
        continue;
      }
      StepRecord rec;
      rec.name = entry.at("step").get<std::string>();
      rec.data = entry.value("data", json::object());
      rec.files = entry.value("files", std::vector<std::string>{});
      for (const auto& vm : entry.value("versions", json::array())) {
        ContentVersion v;
        v.version_id = vm.at("id").get<int>();
        v.stage = parse_version_stage(vm.at("stage").get<std::string>());
        v.iteration = vm.at("iteration").get<int>();
        if (!vm.at("parent").is_null()) v.parent = vm.at("parent").get<int>();
        v.producer = vm.value("producer", "");
        v.source = io::read_file(dir_ / "versions" / (version_stem(v.version_id) + ".html"));
        rec.version_ids.push_back(v.version_id);
        next_version_id_ = std::max(next_version_id_, v.version_id + 1);
        state->versions[v.version_id] = std::move(v);
      }
      state->files.insert(rec.files.begin(), rec.files.end());
      if (!state->steps.contains(rec.name)) state->order.push_back(rec.name);
      state->steps[rec.name] = std::move(rec);
    }
  }
  state_ = std::move(state);
}

void RunHandle::quarantine_orphans() {
  const auto state = snapshot();
  for (const char* sub : kManagedDirs) {
    const auto base = dir_ / sub;
    if (!fs::exists(base)) continue;
    std::vector<fs::path> orphans;
    for (const auto& entry : fs::recursive_directory_iterator(base)) {
      if (!entry.is_regular_file()) continue;
      const auto rel = fs::relative(entry.path(), dir_).generic_string();
      if (rel.ends_with(io::kPartialSuffix)) continue;
      if (!state->files.contains(rel)) orphans.push_back(entry.path());
    }
    for (const auto& p : orphans) {
      auto target = p;
      target += io::kPartialSuffix;
      fs::rename(p, target);
      spdlog::warn("quarantined uncommitted file {}", fs::relative(target, dir_).string());
      quarantined_.push_back(target);
    }
  }
}

int RunHandle::allocate_version_id() {
  std::lock_guard lock(mu_);
  return next_version_id_++;
}

std::shared_ptr<const RunHandle::State> RunHandle::snapshot() const {
  std::lock_guard lock(mu_);
  return state_;
}

StepTx RunHandle::begin_step(std::string name) { return StepTx(this, std::move(name)); }

void RunHandle::commit(StepTx& tx, json data) {
  if (tx.run_ != this) throw Error("step '" + tx.name() + "' belongs to another run");
  StepRecord rec;
  rec.name = tx.name();
  rec.data = std::move(data);
  {
    std::lock_guard tl(*tx.mu_);
    rec.files = tx.files_;
    std::sort(rec.files.begin(), rec.files.end());
    for (const auto& v : tx.versions_) rec.version_ids.push_back(v.version_id);
  }

  json entry{{"step", rec.name}, {"files", rec.files}, {"data", rec.data}};
  json versions = json::array();
  for (const auto& v : tx.versions_) versions.push_back(version_meta(v));
  entry["versions"] = std::move(versions);
  const auto line = entry.dump() + "\n";

  std::lock_guard lock(mu_);
  {
    std::ofstream out(dir_ / kJournal, std::ios::binary | std::ios::app);
    out << line;
    out.flush();
    if (!out) throw RuntimeFailure("cannot append to journal in " + dir_.string());
  }
  auto next = std::make_shared<State>(*state_);
  for (const auto& v : tx.versions_) next->versions[v.version_id] = v;
  next->files.insert(rec.files.begin(), rec.files.end());
  if (!next->steps.contains(rec.name)) next->order.push_back(rec.name);
  next->steps[rec.name] = std::move(rec);
  state_ = std::move(next);
  tx.files_.clear();
  tx.versions_.clear();
}

bool RunHandle::step_done(std::string_view name) const { return snapshot()->steps.contains(name); }

std::optional<json> RunHandle::step_data(std::string_view name) const {
  const auto s = snapshot();
  const auto it = s->steps.find(name);
  if (it == s->steps.end()) return std::nullopt;
  return it->second.data;
}

std::optional<StepRecord> RunHandle::step(std::string_view name) const {
  const auto s = snapshot();
  const auto it = s->steps.find(name);
  if (it == s->steps.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> RunHandle::completed_steps() const { return snapshot()->order; }

std::optional<ContentVersion> RunHandle::version(int version_id) const {
  const auto s = snapshot();
  const auto it = s->versions.find(version_id);
  if (it == s->versions.end()) return std::nullopt;
  return it->second;
}

std::vector<ContentVersion> RunHandle::versions() const {
  const auto s = snapshot();
  std::vector<ContentVersion> out;
  for (const auto& [id, v] : s->versions) out.push_back(v);
  return out;
}

}  // namespace avr
