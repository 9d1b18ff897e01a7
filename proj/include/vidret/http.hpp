// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <string>

#include <nlohmann/json.hpp>

namespace vidret {

struct RemoteOptions {
  std::string endpoint;  // e.g. "http://127.0.0.1:8080"
  int max_in_flight = 4;
  int batch_size = 32;
  int attempts = 3;
  std::chrono::milliseconds backoff_base{250};
  std::chrono::milliseconds timeout{30000};
};

/// POSTs `body` (serialized JSON, sent verbatim) to endpoint+path and parses
/// the reply.
///
/// Connection failures and 5xx replies are retried `attempts` times with
/// exponential backoff, then raise kProviderUnavailable. Any other non-200
/// status or an unparseable body raises kMalformedResponse.
nlohmann::json post_json(const RemoteOptions& options, const std::string& path,
                         const std::string& body);

}  // namespace vidret
