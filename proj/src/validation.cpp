#include "gnv/validation.hpp"

#include "gnv/errors.hpp"
#include "gnv/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <optional>
#include <sstream>

namespace gnv {

namespace {

using json = nlohmann::json;

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(current);
            current.clear();
        } else if (c != '\r') {
            current.push_back(c);
        }
    }
    lines.push_back(current);
    return lines;
}

// Strips markdown emphasis, bullets and stray backticks; collapses runs of
// whitespace so header matching is layout-independent.
std::string clean_line(const std::string& line) {
    std::string out;
    out.reserve(line.size());
    bool last_space = true;
    for (char c : line) {
        if (c == '*' || c == '_' || c == '#' || c == '`') continue;
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!last_space) out.push_back(' ');
            last_space = true;
        } else {
            out.push_back(c);
            last_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    // leading list bullets ("- foo", "+ foo") once emphasis is gone
    if (out.size() >= 2 && (out[0] == '-' || out[0] == '+') && out[1] == ' ') {
        out.erase(0, 2);
    }
    return out;
}

bool starts_with_ci(const std::string& text, const std::string& prefix) {
    return to_lower(text).rfind(to_lower(prefix), 0) == 0;
}

// "1. Single orange:" -> {1, "Single orange"}
std::optional<std::pair<int, std::string>> parse_criterion_header(const std::string& cleaned) {
    std::size_t i = 0;
    while (i < cleaned.size() && std::isdigit(static_cast<unsigned char>(cleaned[i]))) ++i;
    if (i == 0 || i > 2) return std::nullopt;
    std::size_t after_number = i;
    if (after_number >= cleaned.size() ||
        (cleaned[after_number] != '.' && cleaned[after_number] != ')')) {
        return std::nullopt;
    }
    std::string rest = trim(cleaned.substr(after_number + 1));
    if (rest.size() < 2 || rest.back() != ':') return std::nullopt;
    rest.pop_back();
    return std::make_pair(std::stoi(cleaned.substr(0, i)), trim(rest));
}

std::optional<std::string> result_line_value(const std::string& cleaned) {
    if (!starts_with_ci(cleaned, "result:")) return std::nullopt;
    return trim(cleaned.substr(7));
}

std::optional<CriterionOutcome> parse_outcome(const std::string& value) {
    std::string v = to_lower(trim(value));
    while (!v.empty() && (v.back() == '.' || v.back() == '!')) v.pop_back();
    if (v == "meet" || v == "meets" || v == "met") return CriterionOutcome::Meet;
    if (v == "fail" || v == "fails" || v == "failed") return CriterionOutcome::Fail;
    if (v == "n/a" || v == "na" || v == "not applicable" || v == "notapplicable") {
        return CriterionOutcome::NotApplicable;
    }
    return std::nullopt;
}

std::optional<FinalDecision> parse_final(const std::string& value) {
    std::string v = to_lower(trim(value));
    while (!v.empty() && (v.back() == '.' || v.back() == '!')) v.pop_back();
    if (v == "keep") return FinalDecision::Keep;
    if (v == "filter out" || v == "filterout" || v == "filter") return FinalDecision::FilterOut;
    return std::nullopt;
}

CriterionName name_from_header(const std::string& header, int position) {
    std::string h = to_lower(header);
    if (h.find("single view") != std::string::npos) return CriterionName::SingleView;
    if (h.rfind("single", 0) == 0) return CriterionName::SingleObject;
    if (h.rfind("intact", 0) == 0) return CriterionName::IntactObject;
    if (h.find("background") != std::string::npos) return CriterionName::PlainBackground;
    switch (position) {
        case 1: return CriterionName::SingleObject;
        case 2: return CriterionName::SingleView;
        case 3: return CriterionName::IntactObject;
        default: return CriterionName::PlainBackground;
    }
}

// The conclusion sometimes argues a verdict in prose; the latest keep-ish or
// filter-ish phrase is taken as its position.
std::optional<FinalDecision> conclusion_sentiment(const std::string& conclusion) {
    static const std::vector<std::string> keepish = {
        "should be kept", "should be retained", "is suitable", "meets all the criteria",
        "meets all criteria", "meets all of the criteria"};
    static const std::vector<std::string> filterish = {
        "filter out", "filtered out", "is not suitable", "unsuitable",
        "does not meet", "do not meet", "fails to meet", "doesn't meet",
        "should be removed", "should be discarded"};
    std::string text = to_lower(conclusion);
    std::size_t best_pos = std::string::npos;
    std::optional<FinalDecision> best;
    auto scan = [&](const std::vector<std::string>& phrases, FinalDecision decision) {
        for (const auto& phrase : phrases) {
            std::size_t pos = text.rfind(phrase);
            if (pos != std::string::npos && (best_pos == std::string::npos || pos > best_pos)) {
                best_pos = pos;
                best = decision;
            }
        }
    };
    scan(keepish, FinalDecision::Keep);
    scan(filterish, FinalDecision::FilterOut);
    return best;
}

std::string join_nonempty(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& line : lines) {
        std::string t = trim(line);
        if (t.empty()) continue;
        if (!out.empty()) out.push_back('\n');
        out += t;
    }
    return out;
}

}  // namespace

std::string to_string(CriterionName name) {
    switch (name) {
        case CriterionName::SingleObject: return "SingleObject";
        case CriterionName::SingleView: return "SingleView";
        case CriterionName::IntactObject: return "IntactObject";
        case CriterionName::PlainBackground: return "PlainBackground";
    }
    return "SingleObject";
}

std::string to_string(CriterionOutcome outcome) {
    switch (outcome) {
        case CriterionOutcome::Meet: return "Meet";
        case CriterionOutcome::Fail: return "Fail";
        case CriterionOutcome::NotApplicable: return "NotApplicable";
    }
    return "NotApplicable";
}

std::string to_string(FinalDecision final) {
    return final == FinalDecision::Keep ? "Keep" : "FilterOut";
}

ValidationVerdict parse_verdict(const std::string& transcript, const std::string& category) {
    std::vector<std::string> raw_lines = split_lines(transcript);
    std::vector<std::string> cleaned(raw_lines.size());
    std::transform(raw_lines.begin(), raw_lines.end(), cleaned.begin(), clean_line);

    auto find_header = [&](const std::string& label) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < cleaned.size(); ++i) {
            if (starts_with_ci(cleaned[i], label)) return i;
        }
        return std::nullopt;
    };

    auto description_at = find_header("image description:");
    auto criteria_at = find_header("evaluation criteria:");
    auto conclusion_at = find_header("conclusion:");

    ValidationVerdict verdict;
    verdict.category = category;
    verdict.raw_transcript = transcript;

    if (description_at) {
        std::size_t end = criteria_at.value_or(cleaned.size());
        std::vector<std::string> block;
        for (std::size_t i = *description_at + 1; i < end; ++i) block.push_back(cleaned[i]);
        verdict.description = join_nonempty(block);
    }

    // criterion sections: numbered headers ending in ':'
    struct Section {
        int number;
        std::string title;
        std::size_t line;
    };
    std::vector<Section> sections;
    std::size_t scan_begin = criteria_at ? *criteria_at + 1 : 0;
    std::size_t scan_end = conclusion_at.value_or(cleaned.size());
    for (std::size_t i = scan_begin; i < scan_end; ++i) {
        if (auto header = parse_criterion_header(cleaned[i])) {
            sections.push_back({header->first, header->second, i});
        }
    }

    for (std::size_t s = 0; s < sections.size() && verdict.criteria.size() < 4; ++s) {
        std::size_t begin = sections[s].line + 1;
        std::size_t end = s + 1 < sections.size() ? sections[s + 1].line : scan_end;
        std::optional<CriterionOutcome> outcome;
        std::vector<std::string> explanation;
        for (std::size_t i = begin; i < end; ++i) {
            if (auto value = result_line_value(cleaned[i])) {
                if (auto parsed = parse_outcome(*value)) {
                    outcome = parsed;
                    continue;
                }
            }
            explanation.push_back(cleaned[i]);
        }
        if (!outcome) continue;
        CriterionResult result;
        result.name = name_from_header(sections[s].title,
                                       static_cast<int>(verdict.criteria.size()) + 1);
        result.outcome = *outcome;
        result.explanation = join_nonempty(explanation);
        verdict.criteria.push_back(std::move(result));
    }

    if (verdict.criteria.size() < 4) {
        throw Unparseable("found " + std::to_string(verdict.criteria.size()) +
                          " criterion results, need 4");
    }

    // final decision: last Result line carrying Keep/Filter Out
    std::optional<FinalDecision> final;
    std::size_t final_line = cleaned.size();
    for (std::size_t i = cleaned.size(); i-- > 0;) {
        if (auto value = result_line_value(cleaned[i])) {
            if (auto parsed = parse_final(*value)) {
                final = parsed;
                final_line = i;
                break;
            }
        }
    }
    if (!final) throw Unparseable("no final Result: Keep/Filter Out line");
    verdict.final = *final;

    bool all_meet = std::all_of(verdict.criteria.begin(), verdict.criteria.end(),
                                [](const CriterionResult& c) {
                                    return c.outcome == CriterionOutcome::Meet;
                                });
    bool rule_agrees = (verdict.final == FinalDecision::Keep) == all_meet;

    bool conclusion_agrees = true;
    if (conclusion_at && *conclusion_at < final_line) {
        std::vector<std::string> block;
        for (std::size_t i = *conclusion_at + 1; i < final_line; ++i) block.push_back(cleaned[i]);
        if (auto sentiment = conclusion_sentiment(join_nonempty(block))) {
            conclusion_agrees = *sentiment == verdict.final;
        }
    }
    verdict.consistent = rule_agrees && conclusion_agrees;
    return verdict;
}

ValidationVerdict validate_instance(const RgbaImage& asset_image, const std::string& category,
                                    const std::string& system_prompt,
                                    const BackendEndpoint& endpoint) {
    if (trim(category).empty()) throw InvalidArgument("category must be nonempty");
    if (system_prompt.find("[Category Name]") != std::string::npos) {
        throw InvalidArgument("system prompt still contains the [Category Name] placeholder");
    }

    RgbaImage flattened = flatten_over_black(asset_image);
    ChatRequest req;
    req.system_prompt = system_prompt;
    req.user_prompt = "Evaluate the attached image for the category \"" + category + "\".";

    std::string transcript;
    for (int attempt = 0; attempt < 2; ++attempt) {
        transcript = vision_chat(endpoint, flattened, req);
        try {
            return parse_verdict(transcript, category);
        } catch (const Unparseable&) {
            // retry once, then fail closed
        }
    }

    ValidationVerdict verdict;
    verdict.category = category;
    verdict.raw_transcript = transcript;
    verdict.final = FinalDecision::FilterOut;
    verdict.consistent = false;
    for (int i = 0; i < 4; ++i) {
        CriterionResult result;
        result.name = static_cast<CriterionName>(i);
        result.outcome = CriterionOutcome::NotApplicable;
        result.explanation = "transcript unparseable";
        verdict.criteria.push_back(std::move(result));
    }
    return verdict;
}

std::string verdict_to_json_text(const ValidationVerdict& verdict) {
    json j{{"category", verdict.category},
           {"final", to_string(verdict.final)},
           {"description", verdict.description},
           {"raw_transcript", verdict.raw_transcript},
           {"consistent", verdict.consistent},
           {"criteria", json::array()}};
    for (const auto& c : verdict.criteria) {
        j["criteria"].push_back(json{{"name", to_string(c.name)},
                                     {"outcome", to_string(c.outcome)},
                                     {"explanation", c.explanation}});
    }
    return j.dump(2) + "\n";
}

ValidationVerdict verdict_from_json_text(const std::string& text) {
    json j = json::parse(text);
    ValidationVerdict verdict;
    verdict.category = j.at("category").get<std::string>();
    verdict.description = j.at("description").get<std::string>();
    verdict.raw_transcript = j.at("raw_transcript").get<std::string>();
    verdict.consistent = j.at("consistent").get<bool>();
    std::string final = j.at("final").get<std::string>();
    verdict.final = final == "Keep" ? FinalDecision::Keep : FinalDecision::FilterOut;
    for (const auto& c : j.at("criteria")) {
        CriterionResult result;
        std::string name = c.at("name").get<std::string>();
        if (name == "SingleObject") result.name = CriterionName::SingleObject;
        else if (name == "SingleView") result.name = CriterionName::SingleView;
        else if (name == "IntactObject") result.name = CriterionName::IntactObject;
        else result.name = CriterionName::PlainBackground;
        std::string outcome = c.at("outcome").get<std::string>();
        if (outcome == "Meet") result.outcome = CriterionOutcome::Meet;
        else if (outcome == "Fail") result.outcome = CriterionOutcome::Fail;
        else result.outcome = CriterionOutcome::NotApplicable;
        result.explanation = c.at("explanation").get<std::string>();
        verdict.criteria.push_back(std::move(result));
    }
    return verdict;
}

}  // namespace gnv
