#pragma once

#include "arq/json.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace arq {

enum class ReasoningMode { Arq, Cot, Direct };

std::string to_string(ReasoningMode mode);
ReasoningMode reasoning_mode_from(std::string_view text);

struct ArqQuery;

/// Typed answer slot of an attentive query.
struct Slot {
    enum class Kind { Boolean, Integer, Text, Enum, List, Record, Map, Any };

    Kind kind = Kind::Text;
    std::int64_t min = 0;                        // Integer
    std::int64_t max = 0;                        // Integer
    std::vector<std::string> values;             // Enum
    std::size_t min_items = 0;                   // List
    std::size_t max_items = std::numeric_limits<std::size_t>::max();
    std::shared_ptr<const Slot> element;         // List items, Map values
    std::string key_hint;                        // Map keys, as shown in templates
    std::vector<ArqQuery> fields;                // Record

    static Slot boolean();
    static Slot integer(std::int64_t lo, std::int64_t hi);
    static Slot text();
    static Slot enumeration(std::vector<std::string> allowed);
    static Slot list(Slot item, std::size_t lo = 0,
                     std::size_t hi = std::numeric_limits<std::size_t>::max());
    static Slot record(std::vector<ArqQuery> group);
    static Slot map(Slot value, std::string key_hint);
    static Slot any();

    bool bounded_list() const { return max_items != std::numeric_limits<std::size_t>::max(); }
};

/// Makes a query required only when a previously declared sibling has (or,
/// for NotEquals, lacks) one of the listed values.
struct RequiredIf {
    enum class Op { Equals, NotEquals };
    std::string key;
    Op op = Op::Equals;
    std::vector<Json> values;

    bool holds(const Json& group_object) const;
};

struct ArqQuery {
    std::string key;
    std::string instruction;
    Slot slot;
    bool optional = false;
    std::optional<RequiredIf> required_if;
    std::optional<Json> constant;  // rendered literally instead of a placeholder

    bool required_in(const Json& group_object) const;
};

struct ReasoningBlueprint {
    ReasoningMode mode = ReasoningMode::Arq;
    std::vector<ArqQuery> queries;
    std::vector<std::string> answer_keys;  // dotted key paths; lists and maps are traversed implicitly
};

struct Violation {
    enum class Kind { NoObject, Missing, Type, Range, Enum, Length, Constraint };
    Kind kind = Kind::Constraint;
    std::string path;
    std::string expected;
    std::string message;
};

std::string to_string(Violation::Kind kind);
Json to_json(const Violation& v);

struct StructuredCompletion {
    Json object;                                      // parsed object, unknown keys included
    std::vector<std::pair<std::string, Json>> answers; // leaf path -> value, declaration order
    std::string raw_text;
    std::size_t span_begin = 0;
    std::size_t span_end = 0;                          // one past the closing brace
    std::vector<std::string> warnings;
};

struct ParseResult {
    std::optional<StructuredCompletion> completion;
    std::vector<Violation> violations;

    bool ok() const { return completion.has_value() && violations.empty(); }
};

class InvalidBlueprintError : public Error {
public:
    explicit InvalidBlueprintError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

std::vector<std::string> validate_blueprint(const ReasoningBlueprint& bp);

/// Output-format instruction for the blueprint's mode. Throws
/// InvalidBlueprintError for an invalid blueprint.
std::string render_schema_instruction(const ReasoningBlueprint& bp);

/// The JSON template alone (keys in declaration order, placeholders as values).
std::string render_template(const std::vector<ArqQuery>& queries);

/// Locates the last well-formed JSON object in raw and validates it.
ParseResult parse_completion(const ReasoningBlueprint& bp, const std::string& raw);

/// Validates an already parsed object against the blueprint's queries.
std::vector<Violation> validate_object(const ReasoningBlueprint& bp, const Json& object,
                                       std::vector<std::string>* warnings = nullptr);

/// Projection of the completion onto the blueprint's answer keys. Absent
/// optional answers are omitted; list-valued answers are returned whole.
Json extract_answers(const ReasoningBlueprint& bp, const StructuredCompletion& sc);
Json project_answers(const ReasoningBlueprint& bp, const Json& object);

/// Same answer keys, with every non-answer query pruned away.
ReasoningBlueprint degenerate_blueprint(const ReasoningBlueprint& arq, ReasoningMode mode);

/// Position and text of the last well-formed top-level JSON object.
struct LocatedObject {
    std::size_t begin = 0;
    std::size_t end = 0;
    Json value;
};
std::optional<LocatedObject> find_last_json_object(std::string_view raw);

Json to_json(const ReasoningBlueprint& bp);
ReasoningBlueprint blueprint_from_json(const Json& j);
ReasoningBlueprint load_blueprint_file(const std::string& path);

}  // namespace arq
