/*
 * Copyright 2026 The NTL Workbench Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef NTLWB_SERVICE_SERVICE_H_
#define NTLWB_SERVICE_SERVICE_H_

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>

#include "ntlwb/util/error.h"

namespace ntlwb::service {

struct ServiceOptions {
  // Sessions live under <data_dir>/sessions/<id>/; dataset paths in requests
  // are resolved against data_dir.
  std::filesystem::path data_dir = "ntlwb-data";
  std::string cors_origin = "*";
  // Fixed journal timestamps.
  bool deterministic = false;
  // Replay journals found under data_dir at startup.
  bool restore_sessions = true;
  // Seconds a client may wait for a training response.
  int write_timeout_seconds = 900;
};

// HTTP status for a library error: 404 for missing iterations, 422 for
// rejected input, 500 for internal failures.
int HttpStatusFor(ErrorCode code);

// JSON API over loop sessions. No authentication.
//
//   POST /sessions                                   -> 201 session
//   GET  /sessions                                   -> session list
//   GET  /sessions/{id}                              -> snapshot
//   POST /sessions/{id}/iterations                   -> 201 iteration record
//   GET  /sessions/{id}/iterations/{n}               -> iteration record
//   GET  /sessions/{id}/iterations/{n}/shap?scope=global|topk&k=200
//   POST /sessions/{id}/actions                      -> snapshot
//   GET  /sessions/{id}/history                      -> iteration list
//   GET  /sessions/{id}/compare?a=&b=                -> comparison
//
// Errors: {"v":1,"error_code":...,"message":...,"detail":{...}}.
// One writer per session: a second concurrent mutation gets 409.
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Blocks until Stop().
  bool Listen(const std::string& host, int port);
  // Returns the bound port, or -1.
  int BindToAnyPort(const std::string& host);
  bool ListenAfterBind();
  void WaitUntilReady() const;
  void Stop();

  std::size_t session_count() const;
  // Occupies the writer slot of a session as an in-flight mutation would.
  // Throws if the session does not exist.
  std::unique_lock<std::mutex> HoldWriter(const std::string& session_id);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ntlwb::service

#endif  // NTLWB_SERVICE_SERVICE_H_
