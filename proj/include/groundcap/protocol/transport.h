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

#ifndef GROUNDCAP_PROTOCOL_TRANSPORT_H_
#define GROUNDCAP_PROTOCOL_TRANSPORT_H_

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace groundcap {

// A bidirectional stream of newline-terminated messages. WriteLine may be
// called from several threads only under external synchronization.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void WriteLine(const std::string& line) = 0;
  // nullopt at end of stream.
  virtual std::optional<std::string> ReadLine() = 0;
  // Half-close so the peer sees end of stream.
  virtual void CloseWrite() = 0;
};

// Owns both descriptors (they may be the same socket).
class FdLineChannel : public LineChannel {
 public:
  FdLineChannel(int read_fd, int write_fd);
  ~FdLineChannel() override;
  FdLineChannel(const FdLineChannel&) = delete;
  FdLineChannel& operator=(const FdLineChannel&) = delete;

  void WriteLine(const std::string& line) override;
  std::optional<std::string> ReadLine() override;
  void CloseWrite() override;

 private:
  int read_fd_;
  int write_fd_;
  std::string buffer_;
};

std::unique_ptr<LineChannel> ConnectUnixSocket(const std::string& path);

// Starts argv[0] (PATH lookup) with its stdin/stdout wired to the channel.
// The destructor closes the pipes and reaps the child.
std::unique_ptr<LineChannel> SpawnProcess(const std::vector<std::string>& argv);

// A connected pair of in-process channels backed by socketpair(2).
std::pair<std::unique_ptr<FdLineChannel>, std::unique_ptr<FdLineChannel>>
MakeChannelPair();

}  // namespace groundcap

#endif  // GROUNDCAP_PROTOCOL_TRANSPORT_H_
