// Copyright 2026 The pnas Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>

#include "pnas/error.h"
#include "pnas/evaluator.h"

extern char** environ;

namespace pnas {

namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

}  // namespace

WorkerProcess::WorkerProcess(const WorkerOptions& options) : options_(options) {
  if (options_.command.empty()) throw Error("worker command is empty");
  ignore_sigpipe();

  int in_pipe[2], out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw Error(std::string("pipe: ") + std::strerror(errno));
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

  std::vector<char*> argv;
  for (auto& a : options_.command) argv.push_back(a.data());
  argv.push_back(nullptr);

  pid_t pid = -1;
  const int rc = ::posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  if (rc != 0) {
    close_fd(to_child_);
    close_fd(from_child_);
    throw Error("cannot start worker '" + options_.command[0] + "': " + std::strerror(rc));
  }
  pid_ = pid;
  alive_ = true;

  std::string line;
  const auto status = read_line(line, options_.handshake_timeout);
  if (status != ReadStatus::kLine) {
    kill_child();
    throw Error("worker '" + options_.command[0] + "' " +
                (status == ReadStatus::kTimeout ? "did not send a handshake in time"
                                                : "exited before the handshake"));
  }
  try {
    const auto hello = Json::parse(line).at("hello");
    if (hello.at("protocol").get<int>() != kProtocolVersion) {
      kill_child();
      throw Error("worker speaks protocol " + hello.at("protocol").dump() + ", expected 1");
    }
    name_ = hello.value("name", std::string("worker"));
  } catch (const Json::exception&) {
    kill_child();
    throw Error("worker '" + options_.command[0] + "' sent a malformed handshake: " + line);
  }
}

WorkerProcess::~WorkerProcess() { kill_child(); }

void WorkerProcess::kill_child() {
  close_fd(to_child_);
  close_fd(from_child_);
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
  pid_ = -1;
  alive_ = false;
}

bool WorkerProcess::write_all(const std::string& data) {
  std::size_t done = 0;
  while (done < data.size()) {
    const auto n = ::write(to_child_, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    done += static_cast<std::size_t>(n);
  }
  return true;
}

WorkerProcess::ReadStatus WorkerProcess::read_line(std::string& out,
                                                   std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      out = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return ReadStatus::kLine;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return ReadStatus::kTimeout;
    pollfd pfd{from_child_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(std::min<std::int64_t>(left.count(), 1 << 30)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      return ReadStatus::kEof;
    }
    if (rc == 0) return ReadStatus::kTimeout;
    char chunk[4096];
    const auto n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      return ReadStatus::kEof;
    }
    if (n == 0) return ReadStatus::kEof;
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

EvalResponse WorkerProcess::evaluate(const EvalRequest& req) {
  if (!alive_) return EvalResponse::failure(req.trial_id, "worker is not running");
  if (!write_all(request_to_wire(req).dump() + "\n")) {
    kill_child();
    return EvalResponse::failure(req.trial_id, "worker closed its input");
  }
  std::string line;
  switch (read_line(line, options_.timeout)) {
    case ReadStatus::kTimeout:
      kill_child();
      return EvalResponse::failure(req.trial_id, "worker timed out");
    case ReadStatus::kEof:
      kill_child();
      return EvalResponse::failure(req.trial_id, "worker exited mid-request");
    case ReadStatus::kLine:
      break;
  }
  bool reported_error = false;
  try {
    const auto j = Json::parse(line);
    reported_error = j.contains("error") &&
                     j["error"].value("trial_id", std::uint64_t{0}) == req.trial_id;
  } catch (const Json::exception&) {
  }
  auto resp = check_response(req, response_from_wire(line));
  // Anything other than a well-formed error report for this trial means the
  // stream can no longer be trusted.
  if (!resp.ok && !reported_error) kill_child();
  return resp;
}

// ---------------------------------------------------------------------------

WorkerEvaluator::WorkerEvaluator(WorkerOptions options, int max_workers)
    : options_(std::move(options)), max_workers_(std::max(1, max_workers)) {
  idle_.push_back(std::make_unique<WorkerProcess>(options_));
}

std::unique_ptr<WorkerProcess> WorkerEvaluator::acquire() {
  {
    std::lock_guard lock(mu_);
    while (!idle_.empty()) {
      auto w = std::move(idle_.back());
      idle_.pop_back();
      if (w->alive()) return w;
    }
  }
  return std::make_unique<WorkerProcess>(options_);
}

void WorkerEvaluator::release(std::unique_ptr<WorkerProcess> w) {
  if (!w->alive()) return;
  std::lock_guard lock(mu_);
  if (static_cast<int>(idle_.size()) < max_workers_) idle_.push_back(std::move(w));
}

EvalResponse WorkerEvaluator::evaluate(const EvalRequest& req) {
  std::unique_ptr<WorkerProcess> w;
  try {
    w = acquire();
  } catch (const Error& e) {
    return EvalResponse::failure(req.trial_id, e.what());
  }
  auto resp = w->evaluate(req);
  release(std::move(w));
  return resp;
}

}  // namespace pnas
