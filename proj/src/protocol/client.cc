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

#include "groundcap/protocol/client.h"

#include <sstream>

#include "groundcap/common/error.h"
#include "groundcap/protocol/wire.h"

namespace groundcap {

ProtocolClient::ProtocolClient(std::unique_ptr<LineChannel> channel)
    : channel_(std::move(channel)) {
  reader_ = std::thread([this] { ReadLoop(); });
  try {
    info_ = wire::DecodeInfo(Call({{"op", wire::kOpInfo}}));
  } catch (...) {
    channel_->CloseWrite();
    reader_.join();
    throw;
  }
}

ProtocolClient::~ProtocolClient() {
  {
    std::lock_guard<std::mutex> lock(write_mu_);
    channel_->CloseWrite();
  }
  if (reader_.joinable()) reader_.join();
}

std::future<Json> ProtocolClient::CallAsync(Json request) {
  const std::uint64_t id = next_id_.fetch_add(1);
  request["id"] = id;
  std::future<Json> fut;
  {
    std::lock_guard<std::mutex> lock(pending_mu_);
    if (closed_) throw Error(ErrorCode::kTransport, "backend connection closed");
    fut = pending_[id].get_future();
  }
  try {
    std::lock_guard<std::mutex> lock(write_mu_);
    channel_->WriteLine(request.dump());
  } catch (...) {
    std::lock_guard<std::mutex> lock(pending_mu_);
    pending_.erase(id);
    throw;
  }
  return fut;
}

void ProtocolClient::ReadLoop() {
  try {
    while (auto line = channel_->ReadLine()) {
      Json resp;
      try {
        resp = Json::parse(*line);
      } catch (const Json::parse_error&) {
        continue;  // not attributable to any request
      }
      if (!resp.is_object() || !resp.contains("id") ||
          !resp["id"].is_number_unsigned()) {
        continue;
      }
      std::promise<Json> promise;
      {
        std::lock_guard<std::mutex> lock(pending_mu_);
        auto it = pending_.find(resp["id"].get<std::uint64_t>());
        if (it == pending_.end()) continue;
        promise = std::move(it->second);
        pending_.erase(it);
      }
      try {
        promise.set_value(wire::UnwrapResponse(resp));
      } catch (...) {
        promise.set_exception(std::current_exception());
      }
    }
    FailPending("backend closed the connection");
  } catch (const std::exception& e) {
    FailPending(e.what());
  }
}

void ProtocolClient::FailPending(const std::string& why) {
  std::lock_guard<std::mutex> lock(pending_mu_);
  closed_ = true;
  for (auto& [id, promise] : pending_) {
    promise.set_exception(
        std::make_exception_ptr(Error(ErrorCode::kTransport, why)));
  }
  pending_.clear();
}

StepResult ProtocolClient::DoTopKNext(const SequenceContext& ctx, std::size_t k,
                                      bool with_image) {
  return wire::DecodeStepResult(Call({{"op", wire::kOpTopKNext},
                                      {"ctx", wire::EncodeContext(ctx)},
                                      {"k", k},
                                      {"with_image", with_image}}));
}

GreedyResult ProtocolClient::DoGreedyExtend(const SequenceContext& ctx,
                                            const std::vector<TokenId>& stop_tokens,
                                            bool with_image,
                                            std::size_t /*max_new_tokens*/) {
  // The base class truncates to the remaining budget.
  return wire::DecodeGreedyResult(Call({{"op", wire::kOpGreedyExtend},
                                        {"ctx", wire::EncodeContext(ctx)},
                                        {"stop_tokens", stop_tokens},
                                        {"with_image", with_image}}));
}

std::vector<std::vector<float>> ProtocolClient::DoFinalHiddenStates(
    const SequenceContext& ctx, std::span<const TokenId> tokens, bool with_image) {
  return wire::DecodeHiddenStates(
      Call({{"op", wire::kOpHiddenStates},
            {"ctx", wire::EncodeContext(ctx)},
            {"tokens", std::vector<TokenId>(tokens.begin(), tokens.end())},
            {"with_image", with_image}}));
}

std::string ProtocolClient::DoDiscriminativeQuery(const std::string& image_ref,
                                                  const std::string& object,
                                                  const std::string& question) {
  return wire::Field<std::string>(Call({{"op", wire::kOpDiscriminative},
                                        {"image_ref", image_ref},
                                        {"object", object},
                                        {"question", question}}),
                                  "reply");
}

std::unique_ptr<ProtocolClient> ConnectBackend(const std::string& target) {
  if (target.rfind("unix:", 0) == 0) {
    return std::make_unique<ProtocolClient>(ConnectUnixSocket(target.substr(5)));
  }
  if (target.rfind("stdio:", 0) == 0) {
    std::istringstream ss(target.substr(6));
    std::vector<std::string> argv;
    for (std::string a; ss >> a;) argv.push_back(a);
    return std::make_unique<ProtocolClient>(SpawnProcess(argv));
  }
  throw Error(ErrorCode::kUsage, "backend target must be unix:PATH or stdio:COMMAND");
}

}  // namespace groundcap
