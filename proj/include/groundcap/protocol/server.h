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

#ifndef GROUNDCAP_PROTOCOL_SERVER_H_
#define GROUNDCAP_PROTOCOL_SERVER_H_

#include <string>
#include <string_view>

#include "groundcap/protocol/backend.h"
#include "groundcap/protocol/transport.h"

namespace groundcap {

// Serves a Backend over the line protocol. Requests on one channel are
// answered in arrival order.
class ProtocolServer {
 public:
  explicit ProtocolServer(Backend& backend) : backend_(backend) {}

  // One request line in, one response line out (without the newline). Never
  // throws: failures become error responses.
  std::string HandleLine(std::string_view line);

  // Until the peer closes its end.
  void Serve(LineChannel& channel);

  // Accepts connections one at a time on a Unix socket; stops after
  // max_connections (0 = forever).
  void ServeUnixSocket(const std::string& path, std::size_t max_connections = 0);

 private:
  Backend& backend_;
};

}  // namespace groundcap

#endif  // GROUNDCAP_PROTOCOL_SERVER_H_
