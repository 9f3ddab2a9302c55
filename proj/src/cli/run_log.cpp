#include "cvplan/cli/run_log.hpp"

#include <cstdio>
#include <stdexcept>

namespace cvplan::cli {

std::string format_log_line(const char* level, const std::string& message, bool timestamps, long seconds) {
  if (!timestamps) return std::string(level) + " " + message;
  char stamp[32];
  std::snprintf(stamp, sizeof stamp, "[%04ld]", seconds);
  return std::string(level) + stamp + " " + message;
}

RunLog::RunLog(const std::filesystem::path& path, bool timestamps, std::ostream* echo)
    : path_(path), timestamps_(timestamps), echo_(echo), start_(std::chrono::steady_clock::now()) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  file_.open(path, std::ios::binary | std::ios::trunc);
  if (!file_) throw std::runtime_error("cannot open log '" + path.string() + "'");
}

void RunLog::write(const char* level, const std::string& message) {
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(std::chrono::steady_clock::now() - start_).count();
  const auto line = format_log_line(level, message, timestamps_, static_cast<long>(secs));
  file_ << line << '\n';
  file_.flush();
  if (echo_ != nullptr) *echo_ << line << '\n';
}

}  // namespace cvplan::cli
