#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace scramblekit::cli {

/// Self-describing record of one run: what was invoked, with which
/// resolved settings, and the digests of everything read and written.
class Manifest {
 public:
  Manifest(std::string subcommand, std::span<const std::string> args);

  nlohmann::ordered_json& config() { return config_; }
  void set_seed(std::uint64_t seed, std::optional<std::string> seed_mode = std::nullopt);
  /// Files are digested when added; a directory adds each regular file in it.
  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);

  nlohmann::ordered_json to_json() const;
  void write(const std::filesystem::path& path) const;

  /// `<output>.manifest.json`, with any trailing separator of a directory removed.
  static std::filesystem::path default_path(const std::filesystem::path& output);

 private:
  std::string subcommand_;
  std::vector<std::string> argv_;
  nlohmann::ordered_json config_ = nlohmann::ordered_json::object();
  std::optional<std::uint64_t> seed_;
  std::optional<std::string> seed_mode_;
  nlohmann::ordered_json inputs_ = nlohmann::ordered_json::array();
  nlohmann::ordered_json outputs_ = nlohmann::ordered_json::array();
  std::chrono::steady_clock::time_point start_;
};

}  // namespace scramblekit::cli
