// Copyright 2026 The Groundcap Authors.
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

#include "groundcap/protocol/transport.h"

#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "groundcap/common/error.h"

extern char** environ;

namespace groundcap {
namespace {

[[noreturn]] void ThrowErrno(const std::string& what) {
  throw Error(ErrorCode::kTransport, what + ": " + std::strerror(errno));
}

void IgnoreSigpipe() {
  static const bool done = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)done;
}

class ProcessChannel : public LineChannel {
 public:
  ProcessChannel(pid_t pid, int read_fd, int write_fd)
      : pid_(pid), channel_(read_fd, write_fd) {}
  ~ProcessChannel() override {
    channel_.CloseWrite();
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
  void WriteLine(const std::string& line) override { channel_.WriteLine(line); }
  std::optional<std::string> ReadLine() override { return channel_.ReadLine(); }
  void CloseWrite() override { channel_.CloseWrite(); }

 private:
  pid_t pid_;
  FdLineChannel channel_;
};

}  // namespace

FdLineChannel::FdLineChannel(int read_fd, int write_fd)
    : read_fd_(read_fd), write_fd_(write_fd) {
  IgnoreSigpipe();
}

FdLineChannel::~FdLineChannel() {
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  if (read_fd_ >= 0) ::close(read_fd_);
}

void FdLineChannel::WriteLine(const std::string& line) {
  if (write_fd_ < 0) throw Error(ErrorCode::kTransport, "channel closed for writing");
  std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::write(write_fd_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      ThrowErrno("write");
    }
    off += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> FdLineChannel::ReadLine() {
  while (true) {
    auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    char chunk[65536];
    ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      ThrowErrno("read");
    }
    if (n == 0) {
      if (buffer_.empty()) return std::nullopt;
      std::string line = std::move(buffer_);
      buffer_.clear();
      return line;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void FdLineChannel::CloseWrite() {
  if (write_fd_ < 0) return;
  if (write_fd_ == read_fd_) {
    ::shutdown(write_fd_, SHUT_WR);
  } else {
    ::close(write_fd_);
  }
  write_fd_ = -1;
}

std::unique_ptr<LineChannel> ConnectUnixSocket(const std::string& path) {
  int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
  if (fd < 0) ThrowErrno("socket");
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  if (path.size() >= sizeof addr.sun_path) {
    ::close(fd);
    throw Error(ErrorCode::kTransport, "socket path too long: " + path);
  }
  std::strncpy(addr.sun_path, path.c_str(), sizeof addr.sun_path - 1);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    int saved = errno;
    ::close(fd);
    errno = saved;
    ThrowErrno("connect " + path);
  }
  return std::make_unique<FdLineChannel>(fd, fd);
}

std::unique_ptr<LineChannel> SpawnProcess(const std::vector<std::string>& argv) {
  if (argv.empty()) throw Error(ErrorCode::kTransport, "empty command");
  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0) ThrowErrno("pipe");
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    ThrowErrno("pipe");
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, to_child[1]);
  posix_spawn_file_actions_addclose(&actions, from_child[0]);

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  pid_t pid = 0;
  int rc = ::posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(to_child[0]);
  ::close(from_child[1]);
  if (rc != 0) {
    ::close(to_child[1]);
    ::close(from_child[0]);
    errno = rc;
    ThrowErrno("spawn " + argv[0]);
  }
  return std::make_unique<ProcessChannel>(pid, from_child[0], to_child[1]);
}

std::pair<std::unique_ptr<FdLineChannel>, std::unique_ptr<FdLineChannel>>
MakeChannelPair() {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) ThrowErrno("socketpair");
  return {std::make_unique<FdLineChannel>(fds[0], fds[0]),
          std::make_unique<FdLineChannel>(fds[1], fds[1])};
}

}  // namespace groundcap
