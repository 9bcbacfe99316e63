#include "manifest.hpp"

#include <algorithm>

#include "io.hpp"

namespace scramblekit::cli {

namespace fs = std::filesystem;

namespace {

void add_files(nlohmann::ordered_json& list, const fs::path& path) {
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& e : fs::directory_iterator(path))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  for (const auto& f : files)
    list.push_back({{"path", f.string()}, {"sha256", sha256_file(f)}, {"bytes", fs::file_size(f)}});
}

}  // namespace

Manifest::Manifest(std::string subcommand, std::span<const std::string> args)
    : subcommand_(std::move(subcommand)), start_(std::chrono::steady_clock::now()) {
  argv_.push_back("scramblekit");
  argv_.insert(argv_.end(), args.begin(), args.end());
}

void Manifest::set_seed(std::uint64_t seed, std::optional<std::string> seed_mode) {
  seed_ = seed;
  seed_mode_ = std::move(seed_mode);
}

void Manifest::add_input(const fs::path& path) { add_files(inputs_, path); }
void Manifest::add_output(const fs::path& path) { add_files(outputs_, path); }

nlohmann::ordered_json Manifest::to_json() const {
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
  nlohmann::ordered_json j;
  j["tool"] = "scramblekit";
  j["version"] = SCRAMBLEKIT_VERSION;
  j["subcommand"] = subcommand_;
  j["argv"] = argv_;
  j["config"] = config_;
  j["global_seed"] = seed_ ? nlohmann::ordered_json(*seed_) : nlohmann::ordered_json(nullptr);
  j["seed_mode"] = seed_mode_ ? nlohmann::ordered_json(*seed_mode_) : nlohmann::ordered_json(nullptr);
  j["inputs"] = inputs_;
  j["outputs"] = outputs_;
  j["duration_seconds"] = elapsed.count();
  return j;
}

void Manifest::write(const fs::path& path) const { write_file_atomic(path, to_json().dump(2) + "\n"); }

fs::path Manifest::default_path(const fs::path& output) {
  auto p = output;
  if (!p.has_filename()) p = p.parent_path();
  p += ".manifest.json";
  return p;
}

}  // namespace scramblekit::cli
