// Copyright 2026 The layerbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "layerbench/exec.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

namespace layerbench {
namespace {

// Reads whatever is available on `fd` into `sink`, honoring the byte cap.
// Returns false once the stream reaches EOF.
bool drain(int fd, std::string& sink, std::size_t cap, bool& truncated) {
  char buf[4096];
  for (;;) {
    ssize_t n = read(fd, buf, sizeof(buf));
    if (n == 0) return false;
    if (n < 0) {
      if (errno == EAGAIN || errno == EWOULDBLOCK) return true;
      return errno == EINTR;
    }
    std::size_t keep = std::size_t(n);
    if (sink.size() + keep > cap) {
      keep = cap > sink.size() ? cap - sink.size() : 0;
      if (!truncated && keep < std::size_t(n)) {
        truncated = true;
      }
    }
    sink.append(buf, keep);
    if (truncated && sink.size() >= cap) {
      // Keep consuming so the child never blocks on a full pipe.
      continue;
    }
  }
}

void set_nonblocking(int fd) {
  int flags = fcntl(fd, F_GETFL, 0);
  fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

}  // namespace

ExecResult execute_build_test(const ExecRequest& request) {
  ExecResult result;
  auto start = std::chrono::steady_clock::now();
  auto finish = [&]() {
    result.duration_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
  };

  int out_pipe[2], err_pipe[2];
  if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0) {
    result.spawn_failed = true;
    result.stderr_text = std::string("pipe: ") + std::strerror(errno);
    return finish();
  }

  pid_t pid = fork();
  if (pid < 0) {
    result.spawn_failed = true;
    result.stderr_text = std::string("fork: ") + std::strerror(errno);
    return finish();
  }

  if (pid == 0) {
    // Child: own process group so a timeout can kill the whole tree.
    setpgid(0, 0);
    if (!request.workdir.empty() &&
        chdir(request.workdir.string().c_str()) != 0) {
      _exit(127);
    }
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    close(out_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[0]);
    close(err_pipe[1]);
    execl("/bin/sh", "sh", "-c", request.command.c_str(), (char*)nullptr);
    _exit(127);
  }

  close(out_pipe[1]);
  close(err_pipe[1]);
  set_nonblocking(out_pipe[0]);
  set_nonblocking(err_pipe[0]);

  auto deadline = start + std::chrono::duration<double>(request.timeout_s);
  bool out_open = true, err_open = true;
  while (out_open || err_open) {
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      result.timed_out = true;
      kill(-pid, SIGKILL);
      break;
    }
    int remaining_ms = int(
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
    struct pollfd fds[2];
    nfds_t nfds = 0;
    if (out_open) fds[nfds++] = {out_pipe[0], POLLIN, 0};
    if (err_open) fds[nfds++] = {err_pipe[0], POLLIN, 0};
    int rc = poll(fds, nfds, remaining_ms > 50 ? 50 : remaining_ms + 1);
    if (rc < 0 && errno != EINTR) break;
    if (out_open) {
      out_open = drain(out_pipe[0], result.stdout_text, request.max_output_bytes,
                       result.truncated);
    }
    if (err_open) {
      err_open = drain(err_pipe[0], result.stderr_text, request.max_output_bytes,
                       result.truncated);
    }
  }

  int status = 0;
  waitpid(pid, &status, 0);
  // Pick up anything left in the pipes after exit.
  drain(out_pipe[0], result.stdout_text, request.max_output_bytes, result.truncated);
  drain(err_pipe[0], result.stderr_text, request.max_output_bytes, result.truncated);
  close(out_pipe[0]);
  close(err_pipe[0]);

  if (result.truncated) {
    result.stdout_text += kTruncationMarker;
  }
  if (result.timed_out) {
    result.exit_code = 128 + SIGKILL;
  } else if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_code = 128 + WTERMSIG(status);
  }
  return finish();
}

}  // namespace layerbench
