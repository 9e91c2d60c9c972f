#pragma once

#include "gnv/image.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace gnv {

enum class BackendRole {
    Chat,
    VisionChat,
    ImageGen,
    MockChat,
    MockVision,
    MockImage,
};

bool is_mock_role(BackendRole role);
std::string to_string(BackendRole role);
BackendRole backend_role_from_string(const std::string& name);

// Single-turn chat call. Defaults mirror the serving configuration the
// pipeline assumes everywhere.
struct ChatRequest {
    std::string system_prompt;
    std::string user_prompt;
    double temperature = 0.7;
    double top_p = 0.9;
    int max_new_tokens = 256;
};

struct ImageGenRequest {
    std::string positive_prompt;
    std::string negative_prompt;
    int steps = 25;
    double guidance_scale = 7.0;
    double strength = 1.0;
    int width = 640;
    int height = 640;
    bool wants_alpha = true;
    std::uint64_t seed = 0;
};

// One configured model role. Network roles point at an HTTP base URL;
// mock roles point at a JSON script file.
struct BackendEndpoint {
    BackendRole role = BackendRole::MockChat;
    std::string base_url;
    std::optional<std::string> auth_token;
    double timeout_seconds = 30.0;
    int max_retries = 3;
    int backoff_ms = 100;
    std::string model = "default";
    std::size_t max_image_bytes = 20ull * 1024 * 1024;
};

// Throws ConfigError when an endpoint violates its invariants.
void check_endpoint(const BackendEndpoint& endpoint);

// Full text reply from the chat model. Retries transport failures up to
// max_retries with exponential backoff; 4xx responses never retry.
std::string chat(const BackendEndpoint& endpoint, const ChatRequest& req);

// Same contract as chat(); the image travels base64-encoded in the body.
std::string vision_chat(const BackendEndpoint& endpoint, const RgbaImage& image,
                        const ChatRequest& req);

// Returns an image of exactly req.width x req.height, four channels.
RgbaImage generate_image(const BackendEndpoint& endpoint, const ImageGenRequest& req);

// Resolves the bearer token: endpoint.auth_token, else env GNV_API_TOKEN.
std::optional<std::string> resolve_auth_token(const BackendEndpoint& endpoint);

// JSON POST against {base_url}{path} with this endpoint's auth/timeout and
// the same retry behavior as the chat clients.
nlohmann::json http_post_json(const BackendEndpoint& endpoint, const std::string& path,
                              const nlohmann::json& body);

}  // namespace gnv
