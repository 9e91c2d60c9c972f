#include "gnv/backend.hpp"

#include "gnv/base64.hpp"
#include "gnv/errors.hpp"
#include "gnv/mock_backend.hpp"
#include "gnv/png_io.hpp"
#include "gnv/util.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <thread>

namespace gnv {

namespace {

using json = nlohmann::json;

void check_chat_request(const ChatRequest& req) {
    if (trim(req.system_prompt).empty()) throw InvalidArgument("system_prompt must be nonempty");
    if (trim(req.user_prompt).empty()) throw InvalidArgument("user_prompt must be nonempty");
    if (req.max_new_tokens < 1) throw InvalidArgument("max_new_tokens must be >= 1");
    if (req.temperature < 0.0 || req.temperature > 2.0) {
        throw InvalidArgument("temperature must be in [0, 2]");
    }
    if (req.top_p <= 0.0 || req.top_p > 1.0) throw InvalidArgument("top_p must be in (0, 1]");
}

void check_image_request(const ImageGenRequest& req) {
    if (trim(req.positive_prompt).empty()) throw InvalidArgument("positive_prompt must be nonempty");
    if (req.steps < 1) throw InvalidArgument("steps must be >= 1");
    if (req.strength < 0.0 || req.strength > 1.0) throw InvalidArgument("strength must be in [0, 1]");
    if (req.width < 64 || req.height < 64 || req.width % 8 != 0 || req.height % 8 != 0) {
        throw InvalidArgument("width and height must be >= 64 and multiples of 8");
    }
}

httplib::Client make_client(const BackendEndpoint& endpoint) {
    httplib::Client client(endpoint.base_url);
    auto timeout = std::chrono::milliseconds(
        static_cast<long long>(endpoint.timeout_seconds * 1000.0));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    if (auto token = resolve_auth_token(endpoint)) {
        client.set_bearer_token_auth(*token);
    }
    return client;
}

// One POST; classifies the outcome into the retry/no-retry error split.
json post_json(const BackendEndpoint& endpoint, const std::string& path, const json& body) {
    httplib::Client client = make_client(endpoint);
    auto result = client.Post(path, body.dump(), "application/json");
    if (!result) {
        throw TransportError("POST " + endpoint.base_url + path + " failed: " +
                             httplib::to_string(result.error()));
    }
    if (result->status == 401 || result->status == 403) {
        throw AuthError("HTTP " + std::to_string(result->status) + " from " + path);
    }
    if (result->status >= 500) {
        throw TransportError("HTTP " + std::to_string(result->status) + " from " + path);
    }
    if (result->status >= 400) {
        throw ProtocolError("HTTP " + std::to_string(result->status) + " from " + path);
    }
    try {
        return json::parse(result->body);
    } catch (const json::exception& ex) {
        throw ProtocolError("response is not valid JSON: " + std::string(ex.what()));
    }
}

// Retries fn on TransportError with exponential backoff. Total invocations
// are at most max_retries + 1.
template <typename Fn>
auto with_retries(const BackendEndpoint& endpoint, Fn&& fn) {
    int attempt = 0;
    for (;;) {
        try {
            return fn();
        } catch (const TransportError&) {
            if (attempt >= endpoint.max_retries) throw;
            auto delay = std::chrono::milliseconds(
                static_cast<long long>(endpoint.backoff_ms) << attempt);
            std::this_thread::sleep_for(delay);
            ++attempt;
        }
    }
}

std::string extract_chat_reply(const json& payload) {
    if (!payload.contains("choices") || !payload.at("choices").is_array() ||
        payload.at("choices").empty()) {
        throw ProtocolError("chat reply missing choices[0]");
    }
    const json& first = payload.at("choices").at(0);
    if (!first.contains("message") || !first.at("message").contains("content") ||
        !first.at("message").at("content").is_string()) {
        throw ProtocolError("chat reply missing choices[0].message.content");
    }
    return first.at("message").at("content").get<std::string>();
}

json chat_body(const BackendEndpoint& endpoint, const ChatRequest& req, json user_content) {
    return json{
        {"model", endpoint.model},
        {"messages",
         json::array({json{{"role", "system"}, {"content", req.system_prompt}},
                      json{{"role", "user"}, {"content", std::move(user_content)}}})},
        {"temperature", req.temperature},
        {"top_p", req.top_p},
        {"max_tokens", req.max_new_tokens},
    };
}

}  // namespace

bool is_mock_role(BackendRole role) {
    return role == BackendRole::MockChat || role == BackendRole::MockVision ||
           role == BackendRole::MockImage;
}

std::string to_string(BackendRole role) {
    switch (role) {
        case BackendRole::Chat: return "chat";
        case BackendRole::VisionChat: return "vision_chat";
        case BackendRole::ImageGen: return "image_gen";
        case BackendRole::MockChat: return "mock_chat";
        case BackendRole::MockVision: return "mock_vision";
        case BackendRole::MockImage: return "mock_image";
    }
    return "unknown";
}

BackendRole backend_role_from_string(const std::string& name) {
    if (name == "chat") return BackendRole::Chat;
    if (name == "vision_chat") return BackendRole::VisionChat;
    if (name == "image_gen") return BackendRole::ImageGen;
    if (name == "mock_chat") return BackendRole::MockChat;
    if (name == "mock_vision") return BackendRole::MockVision;
    if (name == "mock_image") return BackendRole::MockImage;
    throw ConfigError("unknown backend role: " + name);
}

void check_endpoint(const BackendEndpoint& endpoint) {
    if (endpoint.timeout_seconds <= 0.0) throw ConfigError("endpoint timeout must be > 0");
    if (endpoint.max_retries < 0) throw ConfigError("max_retries must be >= 0");
    if (endpoint.base_url.empty()) throw ConfigError("endpoint base_url/script path must be set");
    bool looks_like_url = endpoint.base_url.starts_with("http://") ||
                          endpoint.base_url.starts_with("https://");
    if (is_mock_role(endpoint.role) && looks_like_url) {
        throw ConfigError("mock endpoints reference a script file, not a URL");
    }
    if (!is_mock_role(endpoint.role) && !looks_like_url) {
        throw ConfigError("network endpoints need an http(s) base_url");
    }
}

std::optional<std::string> resolve_auth_token(const BackendEndpoint& endpoint) {
    if (endpoint.auth_token && !endpoint.auth_token->empty()) return endpoint.auth_token;
    if (const char* env = std::getenv("GNV_API_TOKEN")) {
        if (*env != '\0') return std::string(env);
    }
    return std::nullopt;
}

nlohmann::json http_post_json(const BackendEndpoint& endpoint, const std::string& path,
                              const nlohmann::json& body) {
    return with_retries(endpoint, [&] { return post_json(endpoint, path, body); });
}

std::string chat(const BackendEndpoint& endpoint, const ChatRequest& req) {
    if (endpoint.role != BackendRole::Chat && endpoint.role != BackendRole::MockChat) {
        throw InvalidArgument("chat requires a chat or mock_chat endpoint");
    }
    check_chat_request(req);
    return with_retries(endpoint, [&]() -> std::string {
        if (endpoint.role == BackendRole::MockChat) return mock_chat_call(endpoint, req);
        json payload = post_json(endpoint, "/v1/chat/completions",
                                 chat_body(endpoint, req, req.user_prompt));
        return extract_chat_reply(payload);
    });
}

std::string vision_chat(const BackendEndpoint& endpoint, const RgbaImage& image,
                        const ChatRequest& req) {
    if (endpoint.role != BackendRole::VisionChat && endpoint.role != BackendRole::MockVision) {
        throw InvalidArgument("vision_chat requires a vision_chat or mock_vision endpoint");
    }
    check_chat_request(req);
    check_image(image);
    if (image.empty()) throw InvalidArgument("vision_chat image must be nonempty");

    if (endpoint.role == BackendRole::MockVision) {
        return with_retries(endpoint, [&] { return mock_vision_call(endpoint, image, req); });
    }

    std::vector<std::uint8_t> png = encode_png_rgba(image);
    std::string encoded = base64_encode(png);
    if (encoded.size() > endpoint.max_image_bytes) {
        throw ImageTooLarge("encoded image payload of " + std::to_string(encoded.size()) +
                            " bytes exceeds limit");
    }
    json content = json::array(
        {json{{"type", "text"}, {"text", req.user_prompt}},
         json{{"type", "image_url"},
              {"image_url", json{{"url", "data:image/png;base64," + encoded}}}}});
    return with_retries(endpoint, [&]() -> std::string {
        json payload = post_json(endpoint, "/v1/chat/completions",
                                 chat_body(endpoint, req, content));
        return extract_chat_reply(payload);
    });
}

RgbaImage generate_image(const BackendEndpoint& endpoint, const ImageGenRequest& req) {
    if (endpoint.role != BackendRole::ImageGen && endpoint.role != BackendRole::MockImage) {
        throw InvalidArgument("generate_image requires an image_gen or mock_image endpoint");
    }
    check_image_request(req);

    RgbaImage image = with_retries(endpoint, [&]() -> RgbaImage {
        if (endpoint.role == BackendRole::MockImage) return mock_image_call(endpoint, req);
        json body{
            {"prompt", req.positive_prompt},
            {"negative_prompt", req.negative_prompt},
            {"steps", req.steps},
            {"guidance_scale", req.guidance_scale},
            {"strength", req.strength},
            {"width", req.width},
            {"height", req.height},
            {"seed", req.seed},
            {"alpha", req.wants_alpha},
        };
        json payload = post_json(endpoint, "/v1/images/generate", body);
        if (!payload.contains("image_png_base64") || !payload.at("image_png_base64").is_string()) {
            throw ProtocolError("image reply missing image_png_base64");
        }
        auto png = base64_decode(payload.at("image_png_base64").get<std::string>());
        bool had_alpha = false;
        RgbaImage decoded = decode_png_rgba(std::span<const std::uint8_t>(png), &had_alpha);
        if (req.wants_alpha && !had_alpha) {
            throw ProtocolError("backend returned an image without an alpha channel");
        }
        return decoded;
    });

    if (image.width != req.width || image.height != req.height) {
        throw ShapeMismatch("backend returned " + std::to_string(image.width) + "x" +
                            std::to_string(image.height) + ", requested " +
                            std::to_string(req.width) + "x" + std::to_string(req.height));
    }
    return image;
}

}  // namespace gnv
