// POSIX process launcher for the external executor.

#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include "hmpt/error.hpp"
#include "hmpt/harness.hpp"

namespace hmpt {

namespace {

std::string substitute(std::string text, const std::string& key, const std::string& value) {
  for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
  return text;
}

std::int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

RunRecord run_external(const ExternalExecutor& executor, const std::string& plan_path, std::size_t placement_index,
                       std::size_t run_index) {
  std::string command = substitute(executor.command, "{plan}", plan_path);
  command = substitute(command, "{placement}", std::to_string(placement_index));
  command = substitute(command, "{run}", std::to_string(run_index));
  const std::string default_pool = std::to_string(executor.default_pool);

  RunRecord record{placement_index, run_index, 0.0, RunStatus::Failed};
  record.start_ns = now_ns();

  const pid_t pid = fork();
  if (pid < 0) throw DataError("fork failed");
  if (pid == 0) {
    setpgid(0, 0);
    for (const auto& [key, value] : executor.environment) setenv(key.c_str(), value.c_str(), 1);
    setenv(kEnvPlan, plan_path.c_str(), 1);
    setenv(kEnvDefaultPool, default_pool.c_str(), 1);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);

  const auto deadline = executor.timeout_seconds > 0
                            ? record.start_ns + static_cast<std::int64_t>(executor.timeout_seconds * 1e9)
                            : std::int64_t{0};
  int status = 0;
  auto pause = std::chrono::microseconds(200);
  for (;;) {
    const pid_t done = waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0) {
      record.end_ns = now_ns();
      return record;
    }
    if (deadline != 0 && now_ns() >= deadline) {
      kill(-pid, SIGKILL);
      kill(pid, SIGKILL);
      waitpid(pid, &status, 0);
      record.end_ns = now_ns();
      record.seconds = static_cast<double>(record.end_ns - record.start_ns) / 1e9;
      record.status = RunStatus::Timeout;
      return record;
    }
    std::this_thread::sleep_for(pause);
    pause = std::min(pause * 2, std::chrono::microseconds(10'000));
  }

  record.end_ns = now_ns();
  record.seconds = static_cast<double>(record.end_ns - record.start_ns) / 1e9;
  record.status = (WIFEXITED(status) && WEXITSTATUS(status) == 0) ? RunStatus::Ok : RunStatus::Failed;
  return record;
}

}  // namespace hmpt
