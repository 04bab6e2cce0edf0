// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <sstream>
#include <vector>

#include "nrse/metrics.hpp"

namespace nrse::metrics {

namespace {

std::vector<std::string> split_words(const std::string &s)
{
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) { out.push_back(w); }
  return out;
}

std::optional<double> parse_first_float(const std::string &text)
{
  std::istringstream is(text);
  for (std::string tok; is >> tok;) {
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used == tok.size() && std::isfinite(v)) { return v; }
    } catch (const std::exception &) {
    }
  }
  return std::nullopt;
}

} // namespace

ExternalResult external_metric(const std::string &command, const std::filesystem::path &clean,
                               const std::filesystem::path &processed, std::chrono::milliseconds timeout)
{
  ExternalResult r;
  std::vector<std::string> args = split_words(command);
  if (args.empty()) {
    r.error = "empty metric command";
    return r;
  }
  args.push_back(clean.string());
  args.push_back(processed.string());
  std::vector<char *> argv;
  for (auto &a : args) { argv.push_back(a.data()); }
  argv.push_back(nullptr);

  int fds[2];
  if (pipe(fds) != 0) {
    r.error = "pipe failed";
    return r;
  }
  const pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    r.error = "fork failed";
    return r;
  }
  if (pid == 0) {
    setpgid(0, 0);
    dup2(fds[1], STDOUT_FILENO);
    close(fds[0]);
    close(fds[1]);
    const int devnull = open("/dev/null", O_RDONLY);
    if (devnull >= 0) { dup2(devnull, STDIN_FILENO); }
    execvp(argv[0], argv.data());
    _exit(127);
  }
  close(fds[1]);

  std::string out;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  char buf[4096];
  for (;;) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      r.timed_out = true;
      break;
    }
    pollfd p{fds[0], POLLIN, 0};
    const int ready = poll(&p, 1, int(std::min<long long>(left.count(), 1000)));
    if (ready < 0 && errno == EINTR) { continue; }
    if (ready <= 0) { continue; }
    const ssize_t n = read(fds[0], buf, sizeof buf);
    if (n <= 0) { break; }
    out.append(buf, std::size_t(n));
  }
  close(fds[0]);

  int status = 0;
  // The child may close stdout and keep running; the deadline still applies.
  while (!r.timed_out) {
    const pid_t done = waitpid(pid, &status, WNOHANG);
    if (done == pid) { break; }
    if (done < 0 && errno != EINTR) { break; }
    if (std::chrono::steady_clock::now() >= deadline) {
      r.timed_out = true;
      break;
    }
    usleep(2000);
  }
  if (r.timed_out) {
    kill(-pid, SIGKILL);
    waitpid(pid, &status, 0);
    r.error = "metric command timed out";
    return r;
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    r.error = "metric command failed with status " + std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1);
    return r;
  }
  r.value = parse_first_float(out);
  if (!r.value) { r.error = "metric command printed no number"; }
  return r;
}

} // namespace nrse::metrics
