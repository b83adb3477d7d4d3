// Copyright 2026 The pnas Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Scripted worker for protocol tests. The first argument picks the behaviour.
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include "json.hpp"

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "fixed";
  if (mode == "silent") {
    std::this_thread::sleep_for(std::chrono::hours(1));
    return 0;
  }
  if (mode == "no-hello") return 0;
  std::cout << (mode == "old-protocol" ? R"({"hello":{"protocol":0,"name":"stub"}})"
                                       : R"({"hello":{"protocol":1,"name":"stub"}})")
            << std::endl;

  std::string line;
  int served = 0;
  while (std::getline(std::cin, line)) {
    const auto req = nlohmann::json::parse(line).at("eval");
    const auto id = req.at("trial_id").get<std::uint64_t>();
    const auto samples = req.at("eval_samples").get<std::int64_t>();
    ++served;
    nlohmann::json out;
    if (mode == "fixed") {
      out = {{"result", {{"trial_id", id}, {"top1", 0.5}, {"evaluated_samples", samples}}}};
    } else if (mode == "echo-seed") {
      const double top1 = static_cast<double>(req.at("seed").get<std::uint64_t>() % 101) / 100;
      out = {{"result", {{"trial_id", id}, {"top1", top1}, {"evaluated_samples", samples}}}};
    } else if (mode == "too-high") {
      out = {{"result", {{"trial_id", id}, {"top1", 1.2}, {"evaluated_samples", samples}}}};
    } else if (mode == "wrong-id") {
      out = {{"result", {{"trial_id", id + 1}, {"top1", 0.5}, {"evaluated_samples", samples}}}};
    } else if (mode == "error") {
      out = {{"error", {{"trial_id", id}, {"message", "cannot train"}}}};
    } else if (mode == "garbage") {
      std::cout << "not json" << std::endl;
      continue;
    } else if (mode == "hang") {
      std::this_thread::sleep_for(std::chrono::hours(1));
    } else if (mode == "die") {
      std::_Exit(3);
    } else if (mode == "die-second") {
      if (served == 2) std::_Exit(3);
      out = {{"result", {{"trial_id", id}, {"top1", 0.5}, {"evaluated_samples", samples}}}};
    }
    std::cout << out.dump() << std::endl;
  }
  return 0;
}
