// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidret/http.hpp"

#include <thread>

#include <httplib.h>

#include "vidret/error.hpp"

namespace vidret {

nlohmann::json post_json(const RemoteOptions& options, const std::string& path,
                         const std::string& body) {
  httplib::Client client(options.endpoint);
  if (!client.is_valid()) {
    throw Error(ErrorCode::kInvalidArgument, "bad endpoint '" + options.endpoint + "'");
  }
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  std::string last_failure = "no attempt made";
  const int attempts = std::max(1, options.attempts);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(options.backoff_base * (1 << (attempt - 1)));
    auto res = client.Post(path, body, "application/json");
    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kMalformedResponse,
                  "POST " + path + " returned HTTP " + std::to_string(res->status));
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedResponse, std::string("unparseable reply: ") + e.what());
    }
  }
  throw Error(ErrorCode::kProviderUnavailable, "POST " + options.endpoint + path + " failed after " +
                                                   std::to_string(attempts) +
                                                   " attempts (" + last_failure + ")");
}

}  // namespace vidret
