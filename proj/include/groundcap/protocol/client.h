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

#ifndef GROUNDCAP_PROTOCOL_CLIENT_H_
#define GROUNDCAP_PROTOCOL_CLIENT_H_

#include <atomic>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "groundcap/common/jsonl.h"
#include "groundcap/protocol/backend.h"
#include "groundcap/protocol/transport.h"

namespace groundcap {

// Backend that forwards every call over a LineChannel. Any number of
// requests may be in flight; a reader thread matches responses to callers by
// request id. The sequence cap is enforced here, before anything is sent.
class ProtocolClient : public Backend {
 public:
  // Fetches the backend's info eagerly; throws Error(kTransport) when the
  // peer is unreachable.
  explicit ProtocolClient(std::unique_ptr<LineChannel> channel);
  ~ProtocolClient() override;

  const BackendInfo& Info() const override { return info_; }

  // Assigns the id and sends; the future yields the payload or throws.
  std::future<Json> CallAsync(Json request);
  Json Call(Json request) { return CallAsync(std::move(request)).get(); }

 protected:
  StepResult DoTopKNext(const SequenceContext& ctx, std::size_t k,
                        bool with_image) override;
  GreedyResult DoGreedyExtend(const SequenceContext& ctx,
                              const std::vector<TokenId>& stop_tokens,
                              bool with_image, std::size_t max_new_tokens) override;
  std::vector<std::vector<float>> DoFinalHiddenStates(const SequenceContext& ctx,
                                                      std::span<const TokenId> tokens,
                                                      bool with_image) override;
  std::string DoDiscriminativeQuery(const std::string& image_ref,
                                    const std::string& object,
                                    const std::string& question) override;

 private:
  void ReadLoop();
  void FailPending(const std::string& why);

  std::unique_ptr<LineChannel> channel_;
  std::mutex write_mu_;
  std::mutex pending_mu_;
  std::map<std::uint64_t, std::promise<Json>> pending_;
  bool closed_ = false;
  std::atomic<std::uint64_t> next_id_{1};
  std::thread reader_;
  BackendInfo info_;
};

// "unix:/path/to.sock" or "stdio:command arg ...".
std::unique_ptr<ProtocolClient> ConnectBackend(const std::string& target);

}  // namespace groundcap

#endif  // GROUNDCAP_PROTOCOL_CLIENT_H_
