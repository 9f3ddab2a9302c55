#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>

namespace cvplan::cli {

/// Plain-text run log, truncated on open. Lines look like
/// `INFO[0003] message` (seconds since open) or `INFO message` without
/// timestamps. Every line is also echoed to `echo` when given.
class RunLog {
 public:
  RunLog(const std::filesystem::path& path, bool timestamps, std::ostream* echo = nullptr);

  void info(const std::string& message) { write("INFO", message); }
  void warn(const std::string& message) { write("WARN", message); }
  void error(const std::string& message) { write("ERRO", message); }

  const std::filesystem::path& path() const { return path_; }

 private:
  void write(const char* level, const std::string& message);

  std::filesystem::path path_;
  std::ofstream file_;
  bool timestamps_;
  std::ostream* echo_;
  std::chrono::steady_clock::time_point start_;
};

/// One log line without the trailing newline.
std::string format_log_line(const char* level, const std::string& message, bool timestamps, long seconds);

}  // namespace cvplan::cli
