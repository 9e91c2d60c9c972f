#include "gnv/mock_backend.hpp"

#include "gnv/errors.hpp"
#include "gnv/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <random>

namespace gnv {

namespace {

using json = nlohmann::json;

struct MockState {
    std::size_t calls = 0;
};

std::mutex g_registry_mutex;
std::map<std::string, MockState>& registry() {
    static std::map<std::string, MockState> instance;
    return instance;
}

std::string canonical_key(const std::filesystem::path& path) {
    std::error_code ec;
    auto canonical = std::filesystem::weakly_canonical(path, ec);
    return ec ? path.string() : canonical.string();
}

json load_script(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw TransportError("mock script not found: " + path.string());
    json script;
    try {
        in >> script;
    } catch (const json::exception& ex) {
        throw ProtocolError("mock script is not valid JSON: " + std::string(ex.what()));
    }
    if (!script.is_object()) throw ProtocolError("mock script must be a JSON object");
    return script;
}

void append_log(const json& script, const std::filesystem::path& script_path, json entry) {
    if (!script.contains("log")) return;
    std::filesystem::path log_path = script.at("log").get<std::string>();
    if (log_path.is_relative()) log_path = script_path.parent_path() / log_path;
    if (log_path.has_parent_path()) std::filesystem::create_directories(log_path.parent_path());
    std::ofstream out(log_path, std::ios::app);
    out << entry.dump() << "\n";
}

std::string resolve_reply(const json& entry, const std::filesystem::path& script_path) {
    if (entry.contains("reply")) return entry.at("reply").get<std::string>();
    if (entry.contains("reply_file")) {
        std::filesystem::path p = entry.at("reply_file").get<std::string>();
        if (p.is_relative()) p = script_path.parent_path() / p;
        return read_text_file(p);
    }
    throw ProtocolError("mock script entry needs \"reply\" or \"reply_file\"");
}

// Shared begin/end of every scripted call: bump the counter, honor
// fail_first, append the log line.
struct CallTicket {
    json script;
    std::size_t index = 0;
};

CallTicket begin_call(const std::filesystem::path& script_path) {
    CallTicket ticket;
    ticket.script = load_script(script_path);
    std::lock_guard<std::mutex> lock(g_registry_mutex);
    MockState& state = registry()[canonical_key(script_path)];
    ticket.index = state.calls++;
    return ticket;
}

void log_call(const CallTicket& ticket, const std::filesystem::path& script_path,
              const char* op, bool ok, json details) {
    details["index"] = ticket.index;
    details["op"] = op;
    details["ok"] = ok;
    std::lock_guard<std::mutex> lock(g_registry_mutex);
    append_log(ticket.script, script_path, std::move(details));
}

void maybe_fail(const CallTicket& ticket, const std::filesystem::path& script_path,
                const char* op, json details) {
    std::size_t fail_first = ticket.script.value("fail_first", 0u);
    if (ticket.index < fail_first) {
        log_call(ticket, script_path, op, false, std::move(details));
        throw TransportError("mock scripted transport failure #" + std::to_string(ticket.index + 1));
    }
}

std::string select_reply(const CallTicket& ticket, const std::filesystem::path& script_path,
                         const ChatRequest& req, const RgbaImage* image) {
    const json& script = ticket.script;
    if (script.contains("keyed")) {
        for (const auto& entry : script.at("keyed")) {
            if (entry.contains("user_contains") &&
                req.user_prompt.find(entry.at("user_contains").get<std::string>()) == std::string::npos) {
                continue;
            }
            if (entry.contains("system_contains") &&
                req.system_prompt.find(entry.at("system_contains").get<std::string>()) == std::string::npos) {
                continue;
            }
            if (entry.contains("image_checksum")) {
                if (!image) continue;
                if (hex64(image_checksum(*image)) != entry.at("image_checksum").get<std::string>()) {
                    continue;
                }
            }
            return resolve_reply(entry, script_path);
        }
    }
    if (script.contains("replies") && !script.at("replies").empty()) {
        const auto& replies = script.at("replies");
        std::size_t fail_first = script.value("fail_first", 0u);
        std::size_t serial = ticket.index >= fail_first ? ticket.index - fail_first : 0;
        std::size_t idx = std::min(serial, replies.size() - 1);
        const json& entry = replies.at(idx);
        if (entry.is_string()) return entry.get<std::string>();
        return resolve_reply(entry, script_path);
    }
    throw ProtocolError("mock script has no reply for call #" + std::to_string(ticket.index));
}

// ── procedural image generators ─────────────────────────────────

struct Rgb {
    std::uint8_t r, g, b;
};

Rgb seed_color(std::mt19937_64& rng) {
    return Rgb{static_cast<std::uint8_t>(64 + rng() % 160),
               static_cast<std::uint8_t>(64 + rng() % 160),
               static_cast<std::uint8_t>(64 + rng() % 160)};
}

void paint_disk(RgbaImage& img, double cx, double cy, double radius, Rgb color) {
    int x0 = std::max(0, static_cast<int>(std::floor(cx - radius)) - 1);
    int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(cx + radius)) + 1);
    int y0 = std::max(0, static_cast<int>(std::floor(cy - radius)) - 1);
    int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(cy + radius)) + 1);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            double dx = x - cx;
            double dy = y - cy;
            double d = std::sqrt(dx * dx + dy * dy);
            if (d > radius) continue;
            double shade = 1.0 - 0.35 * (d / radius);
            std::uint8_t* p = img.at(x, y);
            p[0] = static_cast<std::uint8_t>(color.r * shade);
            p[1] = static_cast<std::uint8_t>(color.g * shade);
            p[2] = static_cast<std::uint8_t>(color.b * shade);
            p[3] = 255;
        }
    }
}

void add_alpha_specks(RgbaImage& img, std::mt19937_64& rng, int count) {
    for (int i = 0; i < count; ++i) {
        int x = static_cast<int>(rng() % static_cast<std::uint64_t>(img.width));
        int y = static_cast<int>(rng() % static_cast<std::uint64_t>(img.height));
        std::uint8_t* p = img.at(x, y);
        p[3] = p[3] > 128 ? 0 : 255;
    }
}

RgbaImage generate_foreground(const std::string& kind, const ImageGenRequest& req,
                              int alpha_noise) {
    std::mt19937_64 rng(req.seed);
    RgbaImage img(req.width, req.height);
    const double m = std::min(req.width, req.height);
    if (kind == "blank") {
        Rgb c = seed_color(rng);
        for (std::size_t i = 0; i < img.pixel_count(); ++i) {
            std::uint8_t* p = img.pixels.data() + i * 4;
            p[0] = c.r;
            p[1] = c.g;
            p[2] = c.b;
            p[3] = 0;
        }
    } else if (kind == "opaque") {
        Rgb c = seed_color(rng);
        for (std::size_t i = 0; i < img.pixel_count(); ++i) {
            std::uint8_t* p = img.pixels.data() + i * 4;
            p[0] = c.r;
            p[1] = c.g;
            p[2] = c.b;
            p[3] = 255;
        }
    } else if (kind == "two_disks") {
        Rgb c1 = seed_color(rng);
        Rgb c2 = seed_color(rng);
        double r1 = m / 10.0 + (rng() % 100) / 100.0 * m / 20.0;
        double r2 = m / 10.0 + (rng() % 100) / 100.0 * m / 20.0;
        paint_disk(img, req.width * 0.25, req.height * 0.5, r1, c1);
        paint_disk(img, req.width * 0.75, req.height * 0.5, r2, c2);
    } else {  // "disk"
        Rgb c = seed_color(rng);
        double radius = m / 6.0 + (rng() % 100) / 100.0 * m / 6.0;
        double cx = req.width * 0.5 + static_cast<double>(static_cast<std::int64_t>(rng() % 41) - 20) / 100.0 * m / 4.0;
        double cy = req.height * 0.5 + static_cast<double>(static_cast<std::int64_t>(rng() % 41) - 20) / 100.0 * m / 4.0;
        paint_disk(img, cx, cy, radius, c);
    }
    if (alpha_noise > 0) add_alpha_specks(img, rng, alpha_noise);
    return img;
}

RgbaImage generate_background(const ImageGenRequest& req) {
    std::mt19937_64 rng(req.seed);
    Rgb top = seed_color(rng);
    Rgb bottom = seed_color(rng);
    RgbaImage img(req.width, req.height);
    for (int y = 0; y < req.height; ++y) {
        double t = req.height > 1 ? static_cast<double>(y) / (req.height - 1) : 0.0;
        for (int x = 0; x < req.width; ++x) {
            std::uint8_t* p = img.at(x, y);
            // small positional hash keeps rows from being flat
            std::uint64_t n = mix_seed(req.seed, "bg", (static_cast<std::uint64_t>(y) << 32) | static_cast<std::uint32_t>(x));
            int dither = static_cast<int>(n % 13) - 6;
            auto ch = [&](int a, int b) {
                double v = a * (1.0 - t) + b * t + dither;
                return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
            };
            p[0] = ch(top.r, bottom.r);
            p[1] = ch(top.g, bottom.g);
            p[2] = ch(top.b, bottom.b);
            p[3] = 255;
        }
    }
    return img;
}

}  // namespace

std::string mock_chat_call(const BackendEndpoint& endpoint, const ChatRequest& req) {
    std::filesystem::path script_path = endpoint.base_url;
    CallTicket ticket = begin_call(script_path);
    json details{{"system_prompt", req.system_prompt}, {"user_prompt", req.user_prompt}};
    maybe_fail(ticket, script_path, "chat", details);
    std::string reply = select_reply(ticket, script_path, req, nullptr);
    log_call(ticket, script_path, "chat", true, std::move(details));
    return reply;
}

std::string mock_vision_call(const BackendEndpoint& endpoint, const RgbaImage& image,
                             const ChatRequest& req) {
    std::filesystem::path script_path = endpoint.base_url;
    CallTicket ticket = begin_call(script_path);
    json details{{"system_prompt", req.system_prompt},
                 {"user_prompt", req.user_prompt},
                 {"image_checksum", hex64(image_checksum(image))}};
    maybe_fail(ticket, script_path, "vision_chat", details);
    std::string reply = select_reply(ticket, script_path, req, &image);
    log_call(ticket, script_path, "vision_chat", true, std::move(details));
    return reply;
}

RgbaImage mock_image_call(const BackendEndpoint& endpoint, const ImageGenRequest& req) {
    std::filesystem::path script_path = endpoint.base_url;
    CallTicket ticket = begin_call(script_path);
    json details{{"prompt", req.positive_prompt},
                 {"seed", req.seed},
                 {"width", req.width},
                 {"height", req.height},
                 {"wants_alpha", req.wants_alpha}};
    maybe_fail(ticket, script_path, "generate_image", details);

    ImageGenRequest effective = req;
    if (ticket.script.contains("override_size")) {
        effective.width = ticket.script.at("override_size").at(0).get<int>();
        effective.height = ticket.script.at("override_size").at(1).get<int>();
    }
    std::string kind = ticket.script.value("generator", "disk");
    int alpha_noise = ticket.script.value("alpha_noise", 0);
    RgbaImage img = req.wants_alpha ? generate_foreground(kind, effective, alpha_noise)
                                    : generate_background(effective);
    log_call(ticket, script_path, "generate_image", true, std::move(details));
    return img;
}

std::size_t mock_invocation_count(const std::filesystem::path& script_path) {
    std::lock_guard<std::mutex> lock(g_registry_mutex);
    auto it = registry().find(canonical_key(script_path));
    return it == registry().end() ? 0 : it->second.calls;
}

void reset_mock_registry() {
    std::lock_guard<std::mutex> lock(g_registry_mutex);
    registry().clear();
}

}  // namespace gnv
