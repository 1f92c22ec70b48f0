#include "kubediag/http_client.hpp"

#include <chrono>

#include <httplib.h>

#include "kubediag/errors.hpp"

namespace kubediag::synth {

HttpSynthesisClient::HttpSynthesisClient(HttpClientConfig cfg) : cfg_(std::move(cfg)) {
    // Built without TLS support.
    if (cfg_.base_url.rfind("http://", 0) != 0)
        throw Error(ErrorCode::InvalidArgument, "synthesis endpoint must start with http://");
    if (!(cfg_.timeout_seconds > 0.0)) throw Error(ErrorCode::InvalidArgument, "synthesis timeout must be positive");
}

std::string HttpSynthesisClient::complete(const std::string& request) {
    httplib::Client client(cfg_.base_url);
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(cfg_.timeout_seconds));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    if (!cfg_.bearer_token.empty()) client.set_bearer_token_auth(cfg_.bearer_token);

    auto res = client.Post(cfg_.path, request, "application/json");
    if (!res) throw SynthesisFailure("synthesis transport error: " + httplib::to_string(res.error()), true);
    if (res->status >= 500) throw SynthesisFailure("synthesis server error " + std::to_string(res->status), true);
    if (res->status < 200 || res->status >= 300)
        throw SynthesisFailure("synthesis request rejected with status " + std::to_string(res->status), false);
    return res->body;
}

}  // namespace kubediag::synth
