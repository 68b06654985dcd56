#include "webnav/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace webnav {
namespace {
std::atomic<bool> g_quiet{false};
std::mutex g_mutex;
}  // namespace

void SetQuiet(bool quiet) { g_quiet = quiet; }
bool IsQuiet() { return g_quiet; }

void Warn(std::string_view message) {
  if (g_quiet) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "warning: " << message << '\n';
}

void Info(std::string_view message) {
  if (g_quiet) return;
  std::lock_guard lock(g_mutex);
  std::cerr << message << '\n';
}

}  // namespace webnav
