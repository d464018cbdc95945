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

#include "groundcap/protocol/server.h"

#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "groundcap/common/error.h"
#include "groundcap/protocol/wire.h"

namespace groundcap {

std::string ProtocolServer::HandleLine(std::string_view line) {
  Json id = nullptr;
  try {
    Json req;
    try {
      req = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::kProtocol, std::string("malformed request: ") + e.what());
    }
    if (!req.is_object()) throw Error(ErrorCode::kProtocol, "request must be an object");
    id = req.value("id", Json(nullptr));
    const auto rid = wire::Field<std::uint64_t>(req, "id");
    const auto op = wire::Field<std::string>(req, "op");

    Json payload;
    if (op == wire::kOpTopKNext) {
      payload = wire::EncodeStepResult(backend_.TopKNext(
          wire::DecodeContext(wire::Field<Json>(req, "ctx")),
          wire::Field<std::size_t>(req, "k"), wire::Field<bool>(req, "with_image")));
    } else if (op == wire::kOpGreedyExtend) {
      payload = wire::EncodeGreedyResult(backend_.GreedyExtend(
          wire::DecodeContext(wire::Field<Json>(req, "ctx")),
          wire::Field<std::vector<TokenId>>(req, "stop_tokens"),
          wire::Field<bool>(req, "with_image")));
    } else if (op == wire::kOpHiddenStates) {
      const auto tokens = wire::Field<std::vector<TokenId>>(req, "tokens");
      payload = wire::EncodeHiddenStates(backend_.FinalHiddenStates(
          wire::DecodeContext(wire::Field<Json>(req, "ctx")), tokens,
          wire::Field<bool>(req, "with_image")));
    } else if (op == wire::kOpDiscriminative) {
      payload = {{"reply", backend_.DiscriminativeReply(
                               wire::Field<std::string>(req, "image_ref"),
                               wire::Field<std::string>(req, "object"))}};
    } else if (op == wire::kOpInfo) {
      payload = wire::EncodeInfo(backend_.Info());
    } else {
      throw Error(ErrorCode::kProtocol, "unknown op '" + op + "'");
    }
    return wire::OkResponse(rid, std::move(payload)).dump();
  } catch (const Error& e) {
    return wire::ErrorResponse(id, e.code(), e.what(), e.detail()).dump();
  } catch (const std::exception& e) {
    return wire::ErrorResponse(id, ErrorCode::kProtocol, e.what()).dump();
  }
}

void ProtocolServer::Serve(LineChannel& channel) {
  while (auto line = channel.ReadLine()) {
    if (line->empty()) continue;
    channel.WriteLine(HandleLine(*line));
  }
  channel.CloseWrite();
}

void ProtocolServer::ServeUnixSocket(const std::string& path,
                                     std::size_t max_connections) {
  int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
  if (fd < 0) throw Error(ErrorCode::kTransport, std::strerror(errno));
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  if (path.size() >= sizeof addr.sun_path) {
    ::close(fd);
    throw Error(ErrorCode::kTransport, "socket path too long: " + path);
  }
  std::strncpy(addr.sun_path, path.c_str(), sizeof addr.sun_path - 1);
  ::unlink(path.c_str());
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(fd, 4) != 0) {
    std::string msg = std::strerror(errno);
    ::close(fd);
    throw Error(ErrorCode::kTransport, "listen on " + path + ": " + msg);
  }
  for (std::size_t served = 0; max_connections == 0 || served < max_connections;
       ++served) {
    int conn = ::accept(fd, nullptr, nullptr);
    if (conn < 0) {
      if (errno == EINTR) continue;
      break;
    }
    FdLineChannel channel(conn, conn);
    Serve(channel);
  }
  ::close(fd);
  ::unlink(path.c_str());
}

}  // namespace groundcap
