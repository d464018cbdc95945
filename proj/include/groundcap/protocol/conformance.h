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

#ifndef GROUNDCAP_PROTOCOL_CONFORMANCE_H_
#define GROUNDCAP_PROTOCOL_CONFORMANCE_H_

#include <string>
#include <vector>

#include "groundcap/protocol/backend.h"

namespace groundcap {

struct ConformanceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ConformanceOptions {
  std::string image_ref;
  // An object the discriminative query can be asked about.
  std::string probe_object = "dog";
  std::size_t greedy_steps = 24;
};

// Shape and determinism checks every backend must pass, whatever its model:
// canonical top-k ordering and prefix stability, a normalized full
// distribution, greedy == iterated top-1, length-preserving hidden states,
// bit-identical repeats, the client-side cap, and a parseable yes/no reply.
// No accuracy is asserted.
std::vector<ConformanceCheck> RunConformanceSuite(Backend& backend,
                                                  const ConformanceOptions& options);

}  // namespace groundcap

#endif  // GROUNDCAP_PROTOCOL_CONFORMANCE_H_
