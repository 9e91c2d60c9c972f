#pragma once

#include "gnv/backend.hpp"
#include "gnv/image.hpp"

#include <array>
#include <string>
#include <vector>

namespace gnv {

enum class CriterionName {
    SingleObject,
    SingleView,
    IntactObject,
    PlainBackground,
};

enum class CriterionOutcome {
    Meet,
    Fail,
    NotApplicable,
};

enum class FinalDecision {
    Keep,
    FilterOut,
};

std::string to_string(CriterionName name);
std::string to_string(CriterionOutcome outcome);
std::string to_string(FinalDecision final);

struct CriterionResult {
    CriterionName name = CriterionName::SingleObject;
    CriterionOutcome outcome = CriterionOutcome::NotApplicable;
    std::string explanation;
};

// Parsed four-criterion verdict. `consistent` is false when the transcript
// argues against its own final Result line (rule mismatch or a conclusion
// that points the other way); the final line always stands.
struct ValidationVerdict {
    std::string category;
    std::vector<CriterionResult> criteria;  // exactly 4 when parsed
    FinalDecision final = FinalDecision::FilterOut;
    std::string description;
    std::string raw_transcript;
    bool consistent = false;
};

// Pure text parser for the structured verdict grammar: an image-description
// block, four numbered criterion sections each ending in a "Result:" line
// (Meet / Fail / N/A), a conclusion, and a final "Result: Keep|Filter Out"
// line. Tolerates markdown emphasis, numbering styles, case, and the
// category name inside criterion headers. Throws Unparseable when fewer
// than four criterion results or no final Result line can be found.
ValidationVerdict parse_verdict(const std::string& transcript, const std::string& category);

// Sends the instance (flattened over opaque black) to the vision backend
// and parses the reply. One retry on unparseable output, then fail-closed:
// final = FilterOut, consistent = false, transcript preserved.
ValidationVerdict validate_instance(const RgbaImage& asset_image, const std::string& category,
                                    const std::string& system_prompt,
                                    const BackendEndpoint& endpoint);

std::string verdict_to_json_text(const ValidationVerdict& verdict);
ValidationVerdict verdict_from_json_text(const std::string& text);

}  // namespace gnv
