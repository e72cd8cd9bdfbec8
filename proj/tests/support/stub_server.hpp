/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <tokenaudit/backend.hpp>

namespace httplib {
class Server;
}

namespace tokenaudit::testing {

// Serves the /v1 score/meta protocol on a loopback port in front of a local
// backend. Incoming segment texts are named positionally from `segment_names`.
class StubScoreServer {
public:
    enum class Fault { none, drop_last_logit, jitter };

    StubScoreServer(std::shared_ptr<const Backend> model, std::vector<std::string> segment_names,
                    Fault fault = Fault::none);
    ~StubScoreServer();

    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
    std::uint64_t score_requests() const noexcept { return requests_.load(); }
    std::uint64_t rows_scored() const noexcept { return rows_.load(); }
    int peak_in_flight() const noexcept { return peak_.load(); }
    void set_delay_ms(int ms) noexcept { delay_ms_ = ms; }

private:
    std::shared_ptr<const Backend> model_;
    std::vector<std::string> names_;
    Fault fault_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<std::uint64_t> requests_{0};
    std::atomic<std::uint64_t> rows_{0};
    std::atomic<int> in_flight_{0};
    std::atomic<int> peak_{0};
    std::atomic<int> delay_ms_{0};
    std::atomic<std::uint64_t> jitter_{0};
};

}  // namespace tokenaudit::testing
