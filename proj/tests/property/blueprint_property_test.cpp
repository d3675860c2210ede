#include "arq/blueprint.hpp"

#include "blueprint_gen.hpp"

#include <gtest/gtest.h>

using namespace arq;
using namespace arq::testing;

namespace {

// Every key of sub is in super with an equal value, recursively through objects and arrays.
bool is_sub_object(const Json& sub, const Json& super) {
    if (sub.is_object()) {
        if (!super.is_object()) return false;
        for (auto it = sub.begin(); it != sub.end(); ++it) {
            if (!super.contains(it.key()) || !is_sub_object(it.value(), super.at(it.key()))) return false;
        }
        return true;
    }
    if (sub.is_array()) {
        if (!super.is_array() || sub.size() != super.size()) return false;
        for (std::size_t i = 0; i < sub.size(); ++i) {
            if (!is_sub_object(sub[i], super[i])) return false;
        }
        return true;
    }
    return sub == super;
}

}  // namespace

TEST(BlueprintProperty, ConformingCompletionsRoundTrip) {
    std::mt19937_64 rng(20240601);
    for (int i = 0; i < 1000; ++i) {
        const auto bp = random_blueprint(rng);
        ASSERT_TRUE(validate_blueprint(bp).empty()) << to_json(bp).dump();
        const Json obj = conforming_object(bp, rng);
        const std::string raw = wrap_in_prose(obj, rng);
        const auto r = parse_completion(bp, raw);
        ASSERT_TRUE(r.ok()) << raw << "\n" << (r.violations.empty() ? "no object" : r.violations[0].message);
        EXPECT_EQ(r.completion->object, obj);
        EXPECT_EQ(r.completion->answers, reference_leaves(bp, obj));
        EXPECT_TRUE(is_sub_object(extract_answers(bp, *r.completion), obj));
        EXPECT_NO_THROW(render_schema_instruction(bp));
    }
}

TEST(BlueprintProperty, MutationsAreReportedAtTheirPath) {
    std::mt19937_64 rng(99);
    int checked = 0;
    while (checked < 1000) {
        const auto bp = random_blueprint(rng);
        const Json obj = conforming_object(bp, rng);
        Mutation m;
        if (!mutate(bp, obj, rng, m)) continue;
        ++checked;
        const auto vs = validate_object(bp, m.mutated);
        bool found = false;
        for (const auto& v : vs) found = found || (v.kind == m.expected && v.path == m.path);
        EXPECT_TRUE(found) << m.description << "\n" << m.mutated.dump() << "\n" << to_json(bp).dump();
    }
}
