#include <doctest.h>

#include "gnv/errors.hpp"
#include "gnv/mock_backend.hpp"
#include "gnv/util.hpp"
#include "gnv/validation.hpp"
#include "support.hpp"

#include <nlohmann/json.hpp>

using namespace gnv;
using namespace gnv_test;
using nlohmann::json;

namespace {

std::string golden(const std::string& name) {
    return read_text_file(std::filesystem::path(GNV_ASSETS_DIR) / "golden" / name);
}

CriterionOutcome outcome_of(const ValidationVerdict& v, CriterionName name) {
    for (const auto& c : v.criteria) {
        if (c.name == name) return c.outcome;
    }
    FAIL("criterion not present");
    return CriterionOutcome::NotApplicable;
}

}  // namespace

TEST_CASE("golden transcript: orange fails the single-object criterion") {
    ValidationVerdict v = parse_verdict(golden("transcript_orange.txt"), "orange");
    REQUIRE(v.criteria.size() == 4);
    CHECK(outcome_of(v, CriterionName::SingleObject) == CriterionOutcome::Fail);
    CHECK(outcome_of(v, CriterionName::SingleView) == CriterionOutcome::Meet);
    CHECK(outcome_of(v, CriterionName::IntactObject) == CriterionOutcome::Meet);
    CHECK(outcome_of(v, CriterionName::PlainBackground) == CriterionOutcome::Meet);
    CHECK(v.final == FinalDecision::FilterOut);
    CHECK(v.consistent);
    CHECK(v.description.find("potted tree") != std::string::npos);
}

TEST_CASE("golden transcript: clock fails only the plain-background criterion") {
    ValidationVerdict v = parse_verdict(golden("transcript_clock.txt"), "clock");
    REQUIRE(v.criteria.size() == 4);
    CHECK(outcome_of(v, CriterionName::SingleObject) == CriterionOutcome::Meet);
    CHECK(outcome_of(v, CriterionName::SingleView) == CriterionOutcome::Meet);
    CHECK(outcome_of(v, CriterionName::IntactObject) == CriterionOutcome::Meet);
    CHECK(outcome_of(v, CriterionName::PlainBackground) == CriterionOutcome::Fail);
    CHECK(v.final == FinalDecision::FilterOut);
    CHECK(v.consistent);
}

TEST_CASE("golden transcript: birthday card conflicts with its own conclusion") {
    ValidationVerdict v = parse_verdict(golden("transcript_birthday_card.txt"), "birthday card");
    REQUIRE(v.criteria.size() == 4);
    CHECK(outcome_of(v, CriterionName::SingleObject) == CriterionOutcome::Fail);
    CHECK(outcome_of(v, CriterionName::SingleView) == CriterionOutcome::Meet);
    CHECK(outcome_of(v, CriterionName::IntactObject) == CriterionOutcome::NotApplicable);
    CHECK(outcome_of(v, CriterionName::PlainBackground) == CriterionOutcome::Meet);
    // the final line is authoritative; the "suitable" conclusion is flagged
    CHECK(v.final == FinalDecision::FilterOut);
    CHECK_FALSE(v.consistent);
}

TEST_CASE("golden transcript: pancake has two not-applicable outcomes") {
    ValidationVerdict v = parse_verdict(golden("transcript_pancake.txt"), "pancake");
    REQUIRE(v.criteria.size() == 4);
    CHECK(outcome_of(v, CriterionName::SingleObject) == CriterionOutcome::Fail);
    CHECK(outcome_of(v, CriterionName::SingleView) == CriterionOutcome::NotApplicable);
    CHECK(outcome_of(v, CriterionName::IntactObject) == CriterionOutcome::NotApplicable);
    CHECK(outcome_of(v, CriterionName::PlainBackground) == CriterionOutcome::Meet);
    CHECK(v.final == FinalDecision::FilterOut);
    CHECK(v.consistent);
}

TEST_CASE("minimal all-meet transcript keeps") {
    std::string transcript =
        "Image Description:\n\nA single red apple.\n\n"
        "Evaluation Criteria:\n\n"
        "1. Single apple:\n    - one apple only\n    - Result: Meet\n"
        "2. Single View:\n    - one view\n    - Result: Meet\n"
        "3. Intact apple:\n    - whole fruit\n    - Result: Meet\n"
        "4. Plain Background:\n    - black\n    - Result: Meet\n\n"
        "Conclusion:\n\nAll good.\n\nResult: Keep\n";
    ValidationVerdict v = parse_verdict(transcript, "apple");
    CHECK(v.final == FinalDecision::Keep);
    CHECK(v.consistent);
    for (const auto& c : v.criteria) CHECK(c.outcome == CriterionOutcome::Meet);
}

TEST_CASE("parser tolerates numbering, emphasis and case variants") {
    std::string transcript =
        "**IMAGE DESCRIPTION:** something\n"
        "EVALUATION CRITERIA:\n"
        "1) **Single pancake:**\n   * explanation\n   * **RESULT:** meet\n"
        "2) Single View:\n   - RESULT: FAIL\n"
        "3) Intact pancake:\n   * result: Not Applicable\n"
        "4) PLAIN BACKGROUND:\n   * Result: N/A.\n"
        "Conclusion:\nmixed bag\n"
        "RESULT: filter out\n";
    ValidationVerdict v = parse_verdict(transcript, "pancake");
    REQUIRE(v.criteria.size() == 4);
    CHECK(v.criteria[0].outcome == CriterionOutcome::Meet);
    CHECK(v.criteria[1].outcome == CriterionOutcome::Fail);
    CHECK(v.criteria[2].outcome == CriterionOutcome::NotApplicable);
    CHECK(v.criteria[3].outcome == CriterionOutcome::NotApplicable);
    CHECK(v.final == FinalDecision::FilterOut);
}

TEST_CASE("unparseable transcripts throw") {
    CHECK_THROWS_AS(parse_verdict("complete nonsense", "x"), Unparseable);
    CHECK_THROWS_AS(parse_verdict("1. Single x:\n Result: Meet\nResult: Keep", "x"), Unparseable);
    std::string no_final =
        "1. Single x:\n- Result: Meet\n2. Single View:\n- Result: Meet\n"
        "3. Intact x:\n- Result: Meet\n4. Plain Background:\n- Result: Meet\n";
    CHECK_THROWS_AS(parse_verdict(no_final, "x"), Unparseable);
}

TEST_CASE("fail-closed rule: no Keep without a parsed Keep token") {
    // final says Keep while a criterion fails: kept, but flagged inconsistent
    std::string conflicting =
        "1. Single x:\n- Result: Fail\n2. Single View:\n- Result: Meet\n"
        "3. Intact x:\n- Result: Meet\n4. Plain Background:\n- Result: Meet\n"
        "Conclusion:\n\nResult: Keep\n";
    ValidationVerdict v = parse_verdict(conflicting, "x");
    CHECK(v.final == FinalDecision::Keep);
    CHECK_FALSE(v.consistent);
}

TEST_CASE("validate_instance parses the scripted transcript and flattens over black") {
    TempDir dir;
    RgbaImage image(32, 32);
    for (std::size_t i = 0; i < image.pixel_count(); ++i) {
        image.pixels[i * 4 + 0] = 200;
        image.pixels[i * 4 + 3] = (i % 3 == 0) ? 255 : 0;
    }
    // the mock sees the flattened image, not the raw RGBA
    RgbaImage flattened = flatten_over_black(image);
    auto script = write_script(
        dir / "vision.json",
        json{{"keyed",
              json::array({json{{"image_checksum", hex64(image_checksum(flattened))},
                                {"reply_file", "orange.txt"}}})}});
    write_text_file(dir / "orange.txt", golden("transcript_orange.txt"));
    auto endpoint = mock_endpoint(BackendRole::MockVision, script);

    ValidationVerdict v = validate_instance(image, "orange", "judge the image", endpoint);
    CHECK(v.final == FinalDecision::FilterOut);
    CHECK(outcome_of(v, CriterionName::SingleObject) == CriterionOutcome::Fail);
    CHECK(v.raw_transcript == golden("transcript_orange.txt"));
}

TEST_CASE("validate_instance fails closed after one retry on garbage") {
    TempDir dir;
    auto script = write_script(dir / "vision.json",
                               json{{"replies", json::array({"garbage", "more garbage"})}});
    auto endpoint = mock_endpoint(BackendRole::MockVision, script);
    reset_mock_registry();

    RgbaImage image(8, 8);
    ValidationVerdict v = validate_instance(image, "orange", "judge", endpoint);
    CHECK(v.final == FinalDecision::FilterOut);
    CHECK_FALSE(v.consistent);
    CHECK(v.raw_transcript == "more garbage");
    CHECK(mock_invocation_count(script) == 2);  // exactly one retry
    REQUIRE(v.criteria.size() == 4);
    for (const auto& c : v.criteria) CHECK(c.outcome == CriterionOutcome::NotApplicable);
}

TEST_CASE("validate_instance precondition: placeholder must be substituted") {
    TempDir dir;
    auto script = write_script(dir / "vision.json", json{{"replies", json::array({"x"})}});
    auto endpoint = mock_endpoint(BackendRole::MockVision, script);
    RgbaImage image(8, 8);
    CHECK_THROWS_AS(validate_instance(image, "orange",
                                      "Evaluate 1. Single [Category Name]:", endpoint),
                    InvalidArgument);
    CHECK_THROWS_AS(validate_instance(image, " ", "prompt", endpoint), InvalidArgument);
}

TEST_CASE("verdict json round trip") {
    ValidationVerdict v = parse_verdict(golden("transcript_pancake.txt"), "pancake");
    ValidationVerdict back = verdict_from_json_text(verdict_to_json_text(v));
    CHECK(back.category == v.category);
    CHECK(back.final == v.final);
    CHECK(back.consistent == v.consistent);
    CHECK(back.raw_transcript == v.raw_transcript);
    REQUIRE(back.criteria.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(back.criteria[i].name == v.criteria[i].name);
        CHECK(back.criteria[i].outcome == v.criteria[i].outcome);
    }
}
