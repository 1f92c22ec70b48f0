#pragma once

#include <string>

#include "kubediag/synthesizer.hpp"

namespace kubediag::synth {

struct HttpClientConfig {
    std::string base_url = "http://127.0.0.1:8080";  // http://host[:port]
    std::string path = "/v1/solve";
    double timeout_seconds = 30.0;
    std::string bearer_token;  // sent as Authorization when non-empty
};

/// POSTs the request JSON and returns the response body. Connection errors,
/// timeouts and 5xx answers are retryable failures; other non-2xx answers
/// are not. One connection per call, so concurrent use is safe.
class HttpSynthesisClient final : public SynthesisClient {
public:
    explicit HttpSynthesisClient(HttpClientConfig cfg);
    std::string complete(const std::string& request) override;

private:
    HttpClientConfig cfg_;
};

}  // namespace kubediag::synth
