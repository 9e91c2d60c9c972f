#pragma once

#include "gnv/backend.hpp"
#include "gnv/image.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace gnv {

// Deterministic scripted backends, addressed by a JSON script file so whole
// pipeline runs reproduce offline. Script schema:
//
//   {
//     "fail_first": 2,            // first N invocations raise TransportError
//     "replies": ["..."],         // sequential; the last entry repeats
//     "keyed": [                  // checked before "replies"; first match wins
//       {"user_contains": "...", "reply": "..."},
//       {"system_contains": "...", "reply_file": "relative/to/script.txt"},
//       {"image_checksum": "<hex64>", "reply_file": "..."}
//     ],
//     "generator": "disk",        // image scripts: disk|two_disks|blank|opaque
//     "alpha_noise": 0,           // image scripts: isolated alpha specks to add
//     "override_size": [w, h],    // image scripts: reply with the wrong shape
//     "log": "invocations.jsonl"  // appended per call, relative to the script
//   }
//
// Call counters live in-process (per script path); the log file persists
// across processes so resumed runs can be audited.

std::string mock_chat_call(const BackendEndpoint& endpoint, const ChatRequest& req);
std::string mock_vision_call(const BackendEndpoint& endpoint, const RgbaImage& image,
                             const ChatRequest& req);
RgbaImage mock_image_call(const BackendEndpoint& endpoint, const ImageGenRequest& req);

// Invocations recorded in this process for the given script (including failures).
std::size_t mock_invocation_count(const std::filesystem::path& script_path);

// Drops all in-process mock state; log files are left alone.
void reset_mock_registry();

}  // namespace gnv
