// Copyright 2026 The Diet Helper Authors
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

#include "diethelper/capture.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>
#include <utility>

#include <sodium.h>

#include "diethelper/error.hpp"

extern char** environ;

namespace diethelper {

namespace {

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    reset();
    fd_ = std::exchange(o.fd_, -1);
    return *this;
  }
  ~Fd() { reset(); }
  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

[[noreturn]] void unavailable(const std::string& what) {
  throw Error(Errc::adapter_unavailable, "OCR adapter: " + what);
}

void make_pipe(Fd& read_end, Fd& write_end) {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) unavailable(std::strerror(errno));
  read_end = Fd(fds[0]);
  write_end = Fd(fds[1]);
}

// Blocks SIGPIPE on this thread for the lifetime of the guard and discards
// any SIGPIPE raised meanwhile, so a child closing stdin early shows up as
// EPIPE instead of killing the process.
class SigpipeGuard {
 public:
  SigpipeGuard() {
    sigemptyset(&pipe_set_);
    sigaddset(&pipe_set_, SIGPIPE);
    pthread_sigmask(SIG_BLOCK, &pipe_set_, &old_);
  }
  ~SigpipeGuard() {
    sigset_t pending;
    sigpending(&pending);
    if (sigismember(&pending, SIGPIPE)) {
      timespec zero{0, 0};
      sigtimedwait(&pipe_set_, nullptr, &zero);
    }
    pthread_sigmask(SIG_SETMASK, &old_, nullptr);
  }

 private:
  sigset_t pipe_set_{};
  sigset_t old_{};
};

}  // namespace

std::vector<TextFragment> split_lines(std::string_view output) {
  std::vector<TextFragment> out;
  while (!output.empty()) {
    auto nl = output.find('\n');
    auto line = output.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back({std::string(line)});
    if (nl == std::string_view::npos) break;
    output.remove_prefix(nl + 1);
  }
  return out;
}

CommandOcrAdapter::CommandOcrAdapter(std::vector<std::string> argv,
                                     std::chrono::milliseconds timeout)
    : argv_(std::move(argv)), timeout_(timeout) {
  if (argv_.empty() || argv_.front().empty()) {
    unavailable("no OCR command configured");
  }
}

std::vector<TextFragment> CommandOcrAdapter::recognize(
    std::span<const std::byte> image, std::string_view) const {
  Fd in_read, in_write, out_read, out_write;
  make_pipe(in_read, in_write);
  make_pipe(out_read, out_write);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_read.get(), STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_write.get(), STDOUT_FILENO);
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  sigset_t empty;
  sigemptyset(&empty);
  posix_spawnattr_setsigmask(&attr, &empty);
  sigset_t defaults;
  sigemptyset(&defaults);
  sigaddset(&defaults, SIGPIPE);
  posix_spawnattr_setsigdefault(&attr, &defaults);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETSIGMASK | POSIX_SPAWN_SETSIGDEF);

  std::vector<char*> args;
  for (const auto& a : argv_) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, args[0], &actions, &attr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) unavailable("cannot run \"" + argv_.front() + "\": " + std::strerror(rc));
  in_read.reset();
  out_write.reset();

  SigpipeGuard guard;
  ::fcntl(in_write.get(), F_SETFL, O_NONBLOCK);
  if (image.empty()) in_write.reset();

  std::string output;
  std::size_t written = 0;
  bool timed_out = false;
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  while (out_read.get() >= 0) {
    pollfd fds[2];
    nfds_t n = 0;
    fds[n++] = {out_read.get(), POLLIN, 0};
    if (in_write.get() >= 0) fds[n++] = {in_write.get(), POLLOUT, 0};
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      timed_out = true;
      break;
    }
    if (::poll(fds, n, static_cast<int>(left.count())) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (n == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const auto* data = reinterpret_cast<const char*>(image.data()) + written;
      const ssize_t w = ::write(in_write.get(), data, image.size() - written);
      if (w > 0) written += static_cast<std::size_t>(w);
      if ((w < 0 && errno != EAGAIN) || written == image.size()) in_write.reset();
    }
    if (fds[0].revents & (POLLIN | POLLERR | POLLHUP)) {
      char buf[4096];
      const ssize_t r = ::read(out_read.get(), buf, sizeof buf);
      if (r > 0) {
        output.append(buf, static_cast<std::size_t>(r));
      } else if (r == 0 || errno != EINTR) {
        out_read.reset();
      }
    }
  }
  in_write.reset();
  if (timed_out) ::kill(pid, SIGKILL);

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (timed_out) unavailable("\"" + argv_.front() + "\" timed out");
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    unavailable("\"" + argv_.front() + "\" failed with status " +
                std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1));
  }
  return split_lines(output);
}

FixtureOcrAdapter::FixtureOcrAdapter(std::filesystem::path directory)
    : directory_(std::move(directory)) {
  if (sodium_init() < 0) unavailable("libsodium failed to initialize");
}

std::string FixtureOcrAdapter::digest(std::span<const std::byte> image) {
  unsigned char hash[16];
  crypto_generichash(hash, sizeof hash,
                     reinterpret_cast<const unsigned char*>(image.data()),
                     image.size(), nullptr, 0);
  char hex[sizeof hash * 2 + 1];
  sodium_bin2hex(hex, sizeof hex, hash, sizeof hash);
  return hex;
}

std::vector<TextFragment> FixtureOcrAdapter::recognize(
    std::span<const std::byte> image, std::string_view name_hint) const {
  std::filesystem::path sidecar;
  if (!name_hint.empty()) {
    sidecar = directory_ /
              (std::filesystem::path(name_hint).filename().string() + ".txt");
  }
  if (sidecar.empty() || !std::filesystem::exists(sidecar)) {
    sidecar = directory_ / (digest(image) + ".txt");
  }
  std::ifstream in(sidecar, std::ios::binary);
  if (!in) return {};
  std::stringstream buf;
  buf << in.rdbuf();
  return split_lines(buf.str());
}

namespace {

bool any_text(const std::vector<TextFragment>& fragments) {
  return std::any_of(fragments.begin(), fragments.end(),
                     [](const TextFragment& f) { return !f.text.empty(); });
}

std::vector<TextFragment> run_adapter(const OcrAdapter* adapter,
                                      std::span<const std::byte> bytes,
                                      std::string_view name) {
  if (adapter == nullptr) unavailable("no OCR adapter is configured");
  return adapter->recognize(bytes, name);
}

}  // namespace

CaptureOutcome extract_fragments(const CaptureRequest& request,
                                 const OcrAdapter* adapter) {
  CaptureOutcome outcome;
  if (const auto* list = std::get_if<FragmentList>(&request)) {
    outcome.fragments = list->fragments;
  } else if (const auto* raw = std::get_if<RawText>(&request)) {
    outcome.fragments.push_back({raw->text});
  } else if (const auto* bytes = std::get_if<ImageBytes>(&request)) {
    outcome.fragments = run_adapter(adapter, bytes->data, bytes->name);
  } else if (const auto* file = std::get_if<ImageFile>(&request)) {
    if (adapter == nullptr) unavailable("no OCR adapter is configured");
    std::ifstream in(file->path, std::ios::binary);
    if (!in) unavailable("cannot read image " + file->path.string());
    std::vector<char> raw((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
    std::vector<std::byte> data(raw.size());
    if (!raw.empty()) std::memcpy(data.data(), raw.data(), raw.size());
    outcome.fragments = run_adapter(adapter, data, file->path.filename().string());
  }
  if (!any_text(outcome.fragments)) {
    throw Error(Errc::no_text_found,
                "no text was recognized on the label; retake the photo");
  }
  return outcome;
}

}  // namespace diethelper
