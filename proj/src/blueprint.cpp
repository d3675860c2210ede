#include "arq/blueprint.hpp"

#include <map>
#include <set>
#include <sstream>

namespace arq {

// ---------------------------------------------------------------------------
// Slot construction
// ---------------------------------------------------------------------------

Slot Slot::boolean() {
    Slot s;
    s.kind = Kind::Boolean;
    return s;
}

Slot Slot::integer(std::int64_t lo, std::int64_t hi) {
    Slot s;
    s.kind = Kind::Integer;
    s.min = lo;
    s.max = hi;
    return s;
}

Slot Slot::text() { return Slot{}; }

Slot Slot::enumeration(std::vector<std::string> allowed) {
    Slot s;
    s.kind = Kind::Enum;
    s.values = std::move(allowed);
    return s;
}

Slot Slot::list(Slot item, std::size_t lo, std::size_t hi) {
    Slot s;
    s.kind = Kind::List;
    s.element = std::make_shared<const Slot>(std::move(item));
    s.min_items = lo;
    s.max_items = hi;
    return s;
}

Slot Slot::record(std::vector<ArqQuery> group) {
    Slot s;
    s.kind = Kind::Record;
    s.fields = std::move(group);
    return s;
}

Slot Slot::map(Slot value, std::string key_hint) {
    Slot s;
    s.kind = Kind::Map;
    s.element = std::make_shared<const Slot>(std::move(value));
    s.key_hint = std::move(key_hint);
    return s;
}

Slot Slot::any() {
    Slot s;
    s.kind = Kind::Any;
    return s;
}

bool RequiredIf::holds(const Json& group_object) const {
    if (!group_object.is_object() || !group_object.contains(key)) return false;
    const Json& actual = group_object.at(key);
    bool matched = false;
    for (const auto& v : values) {
        if (actual == v) {
            matched = true;
            break;
        }
    }
    return op == Op::Equals ? matched : !matched;
}

bool ArqQuery::required_in(const Json& group_object) const {
    if (required_if) return required_if->holds(group_object);
    return !optional && !constant;
}

std::string to_string(ReasoningMode mode) {
    switch (mode) {
    case ReasoningMode::Arq: return "arq";
    case ReasoningMode::Cot: return "cot";
    case ReasoningMode::Direct: return "direct";
    }
    return "arq";
}

ReasoningMode reasoning_mode_from(std::string_view text) {
    if (text == "arq" || text == "ARQ") return ReasoningMode::Arq;
    if (text == "cot" || text == "CoT") return ReasoningMode::Cot;
    if (text == "direct" || text == "Direct" || text == "none") return ReasoningMode::Direct;
    throw Error("unknown reasoning mode '" + std::string(text) + "'");
}

std::string to_string(Violation::Kind kind) {
    switch (kind) {
    case Violation::Kind::NoObject: return "no-object";
    case Violation::Kind::Missing: return "missing";
    case Violation::Kind::Type: return "type";
    case Violation::Kind::Range: return "range";
    case Violation::Kind::Enum: return "enum";
    case Violation::Kind::Length: return "length";
    case Violation::Kind::Constraint: return "constraint";
    }
    return "constraint";
}

namespace {

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : path) {
        if (c == '.') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string join_path(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

/// Trie over answer key paths.
struct PathNode {
    bool leaf = false;
    std::map<std::string, PathNode> children;
};

PathNode build_trie(const std::vector<std::string>& paths) {
    PathNode root;
    for (const auto& p : paths) {
        PathNode* node = &root;
        for (const auto& seg : split_path(p)) node = &node->children[seg];
        node->leaf = true;
    }
    return root;
}

const ArqQuery* find_query(const std::vector<ArqQuery>& group, const std::string& key) {
    for (const auto& q : group) {
        if (q.key == key) return &q;
    }
    return nullptr;
}

/// Unwraps list/map layers down to the slot that holds named fields.
const Slot* container_fields(const Slot& slot) {
    const Slot* s = &slot;
    while (s->kind == Slot::Kind::List || s->kind == Slot::Kind::Map) {
        if (!s->element) return nullptr;
        s = s->element.get();
    }
    return s->kind == Slot::Kind::Record ? s : nullptr;
}

// ---------------------------------------------------------------------------
// Blueprint validation
// ---------------------------------------------------------------------------

void check_slot(const Slot& slot, const std::string& path, std::vector<std::string>& out);

void check_group(const std::vector<ArqQuery>& group, const std::string& prefix,
                 std::vector<std::string>& out) {
    std::set<std::string> seen;
    for (const auto& q : group) {
        const std::string path = join_path(prefix, q.key);
        if (q.key.empty()) out.push_back("empty query key under '" + prefix + "'");
        if (q.key.find('.') != std::string::npos) out.push_back("query key " + path + " contains '.'");
        if (q.required_if && !seen.count(q.required_if->key)) {
            out.push_back("required_if of " + path + " refers to undeclared or later key " +
                          q.required_if->key);
        }
        if (!seen.insert(q.key).second) out.push_back("duplicate query key " + path);
        check_slot(q.slot, path, out);
    }
}

void check_slot(const Slot& slot, const std::string& path, std::vector<std::string>& out) {
    switch (slot.kind) {
    case Slot::Kind::Integer:
        if (slot.min > slot.max) out.push_back("integer slot " + path + " has min > max");
        break;
    case Slot::Kind::Enum:
        if (slot.values.empty()) out.push_back("enum slot " + path + " has no values");
        break;
    case Slot::Kind::List:
        if (!slot.element) {
            out.push_back("list slot " + path + " has no item slot");
        } else {
            if (slot.min_items > slot.max_items) out.push_back("list slot " + path + " has min_items > max_items");
            check_slot(*slot.element, path + "[]", out);
        }
        break;
    case Slot::Kind::Map:
        if (!slot.element) {
            out.push_back("map slot " + path + " has no value slot");
        } else {
            check_slot(*slot.element, path + ".*", out);
        }
        break;
    case Slot::Kind::Record:
        check_group(slot.fields, path, out);
        break;
    default:
        break;
    }
}

bool resolves(const std::vector<ArqQuery>& group, const std::vector<std::string>& segs, std::size_t i) {
    const ArqQuery* q = find_query(group, segs[i]);
    if (!q) return false;
    if (i + 1 == segs.size()) return true;
    const Slot* rec = container_fields(q->slot);
    return rec && resolves(rec->fields, segs, i + 1);
}

/// Every query must sit on an answer path (used for Direct mode).
void check_only_answers(const std::vector<ArqQuery>& group, const PathNode& node,
                        const std::string& prefix, std::vector<std::string>& out) {
    for (const auto& q : group) {
        const std::string path = join_path(prefix, q.key);
        auto it = node.children.find(q.key);
        if (it == node.children.end()) {
            out.push_back("direct blueprint declares non-answer query " + path);
            continue;
        }
        if (it->second.leaf) continue;
        if (const Slot* rec = container_fields(q.slot)) check_only_answers(rec->fields, it->second, path, out);
    }
}

// ---------------------------------------------------------------------------
// Template rendering
// ---------------------------------------------------------------------------

std::string pad(int indent) { return std::string(static_cast<std::size_t>(indent) * 4, ' '); }

std::string default_hint(const Slot& slot) {
    switch (slot.kind) {
    case Slot::Kind::Boolean: return "BOOL";
    case Slot::Kind::Integer:
        return "INTEGER FROM " + std::to_string(slot.min) + " TO " + std::to_string(slot.max);
    case Slot::Kind::Enum: {
        std::string s = "one of:";
        for (std::size_t i = 0; i < slot.values.size(); ++i) s += (i ? ", '" : " '") + slot.values[i] + "'";
        return s;
    }
    case Slot::Kind::Any: return "VALUE";
    default: return "TEXT";
    }
}

std::string placeholder(const std::string& instruction, const Slot& slot) {
    return Json("<" + (instruction.empty() ? default_hint(slot) : instruction) + ">").dump();
}

std::string render_group(const std::vector<ArqQuery>& group, int indent,
                         std::vector<std::string>& notes, const std::string& prefix);

std::string render_slot(const Slot& slot, const std::string& instruction, int indent,
                        std::vector<std::string>& notes, const std::string& path) {
    switch (slot.kind) {
    case Slot::Kind::Record:
        if (!instruction.empty()) notes.push_back(path + ": " + instruction);
        return render_group(slot.fields, indent, notes, path);
    case Slot::Kind::List: {
        const Slot& item = *slot.element;
        const bool scalar_item = item.kind != Slot::Kind::Record && item.kind != Slot::Kind::List &&
                                 item.kind != Slot::Kind::Map;
        std::string note = scalar_item ? std::string() : instruction;
        if (slot.min_items > 0 || slot.bounded_list()) {
            std::ostringstream bounds;
            bounds << "between " << slot.min_items << " and ";
            if (slot.bounded_list()) bounds << slot.max_items; else bounds << "any number of";
            bounds << " entries";
            note = note.empty() ? bounds.str() : note + " (" + bounds.str() + ")";
        }
        if (!note.empty()) notes.push_back(path + ": " + note);
        return "[\n" + pad(indent + 1) +
               render_slot(item, scalar_item ? instruction : std::string(), indent + 1, notes, path + "[]") +
               "\n" + pad(indent) + "]";
    }
    case Slot::Kind::Map: {
        const Slot& value = *slot.element;
        const std::string hint = slot.key_hint.empty() ? "KEY" : slot.key_hint;
        return "{\n" + pad(indent + 1) + Json("<" + hint + ">").dump() + ": " +
               render_slot(value, instruction, indent + 1, notes, path + ".*") + "\n" + pad(indent) + "}";
    }
    default:
        return placeholder(instruction, slot);
    }
}

std::string render_group(const std::vector<ArqQuery>& group, int indent,
                         std::vector<std::string>& notes, const std::string& prefix) {
    if (group.empty()) return "{}";
    std::string out = "{\n";
    for (std::size_t i = 0; i < group.size(); ++i) {
        const ArqQuery& q = group[i];
        const std::string path = join_path(prefix, q.key);
        out += pad(indent + 1) + Json(q.key).dump() + ": ";
        out += q.constant ? q.constant->dump() : render_slot(q.slot, q.instruction, indent + 1, notes, path);
        out += (i + 1 < group.size() ? ",\n" : "\n");
    }
    return out + pad(indent) + "}";
}

constexpr const char* kFillRules =
    "Text in angle brackets describes what to write in that position; it is not literal output.\n"
    "Use JSON true/false for boolean fields and JSON numbers for integer fields.\n";

// ---------------------------------------------------------------------------
// Completion validation
// ---------------------------------------------------------------------------

std::string type_name(const Json& v) {
    switch (v.type()) {
    case Json::value_t::null: return "null";
    case Json::value_t::boolean: return "boolean";
    case Json::value_t::number_integer:
    case Json::value_t::number_unsigned: return "integer";
    case Json::value_t::number_float: return "number";
    case Json::value_t::string: return "string";
    case Json::value_t::array: return "array";
    case Json::value_t::object: return "object";
    default: return "value";
    }
}

std::string slot_type_name(const Slot& s) {
    switch (s.kind) {
    case Slot::Kind::Boolean: return "boolean";
    case Slot::Kind::Integer: return "integer";
    case Slot::Kind::Text: return "text";
    case Slot::Kind::Enum: return "enum";
    case Slot::Kind::List: return "list";
    case Slot::Kind::Record: return "record";
    case Slot::Kind::Map: return "map";
    case Slot::Kind::Any: return "any";
    }
    return "value";
}

class Validator {
public:
    std::vector<Violation> violations;
    std::vector<std::string> warnings;

    void group(const Json& obj, const std::vector<ArqQuery>& queries, const std::string& prefix) {
        for (const auto& q : queries) {
            const std::string path = join_path(prefix, q.key);
            if (!obj.contains(q.key)) {
                if (q.required_in(obj)) {
                    add(Violation::Kind::Missing, path, slot_type_name(q.slot), "missing required key " + path);
                }
                continue;
            }
            slot(obj.at(q.key), q.slot, path);
        }
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            if (!find_query(queries, it.key())) warnings.push_back("unknown key " + join_path(prefix, it.key()));
        }
    }

    void slot(const Json& v, const Slot& s, const std::string& path) {
        switch (s.kind) {
        case Slot::Kind::Boolean:
            if (!v.is_boolean()) type(path, "boolean", v);
            break;
        case Slot::Kind::Integer:
            if (!v.is_number_integer()) {
                type(path, "integer", v);
            } else {
                const bool too_big = v.is_number_unsigned() &&
                                     v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX);
                const std::int64_t n = too_big ? INT64_MAX : v.get<std::int64_t>();
                if (too_big || n < s.min || n > s.max) {
                    add(Violation::Kind::Range, path,
                        "integer in [" + std::to_string(s.min) + ", " + std::to_string(s.max) + "]",
                        path + " out of range: " + v.dump() + " not in [" + std::to_string(s.min) + ", " +
                            std::to_string(s.max) + "]");
                }
            }
            break;
        case Slot::Kind::Text:
            if (!v.is_string()) type(path, "text", v);
            break;
        case Slot::Kind::Enum:
            if (!v.is_string()) {
                type(path, "enum", v);
            } else {
                bool ok = false;
                for (const auto& allowed : s.values) ok = ok || allowed == v.get<std::string>();
                if (!ok) {
                    std::string expected;
                    for (std::size_t i = 0; i < s.values.size(); ++i) expected += (i ? ", " : "") + s.values[i];
                    add(Violation::Kind::Enum, path, "one of " + expected,
                        "invalid value at " + path + ": " + v.dump() + " (expected one of " + expected + ")");
                }
            }
            break;
        case Slot::Kind::List:
            if (!v.is_array()) {
                type(path, "list", v);
            } else {
                if (v.size() < s.min_items || v.size() > s.max_items) {
                    std::string bounds = "between " + std::to_string(s.min_items) + " and " +
                                         (s.bounded_list() ? std::to_string(s.max_items) : std::string("unbounded"));
                    add(Violation::Kind::Length, path, bounds + " items",
                        path + " has " + std::to_string(v.size()) + " items; expected " + bounds);
                }
                for (std::size_t i = 0; i < v.size(); ++i) slot(v[i], *s.element, path + "[" + std::to_string(i) + "]");
            }
            break;
        case Slot::Kind::Record:
            if (!v.is_object()) type(path, "record", v); else group(v, s.fields, path);
            break;
        case Slot::Kind::Map:
            if (!v.is_object()) {
                type(path, "map", v);
            } else {
                for (auto it = v.begin(); it != v.end(); ++it) slot(it.value(), *s.element, path + "." + it.key());
            }
            break;
        case Slot::Kind::Any:
            break;
        }
    }

private:
    void add(Violation::Kind kind, const std::string& path, std::string expected, std::string message) {
        violations.push_back({kind, path, std::move(expected), std::move(message)});
    }

    void type(const std::string& path, const std::string& expected, const Json& v) {
        add(Violation::Kind::Type, path, expected,
            "type mismatch at " + path + ": expected " + expected + ", got " + type_name(v));
    }
};

// ---------------------------------------------------------------------------
// Flattening and projection
// ---------------------------------------------------------------------------

void flatten_group(const Json& obj, const std::vector<ArqQuery>& group, const std::string& prefix,
                   std::vector<std::pair<std::string, Json>>& out);

void flatten_slot(const Json& v, const Slot& s, const std::string& path,
                  std::vector<std::pair<std::string, Json>>& out) {
    if (s.kind == Slot::Kind::Record && v.is_object()) {
        flatten_group(v, s.fields, path, out);
    } else if (s.kind == Slot::Kind::List && v.is_array() && !v.empty()) {
        for (std::size_t i = 0; i < v.size(); ++i) flatten_slot(v[i], *s.element, path + "[" + std::to_string(i) + "]", out);
    } else if (s.kind == Slot::Kind::Map && v.is_object() && !v.empty()) {
        for (auto it = v.begin(); it != v.end(); ++it) flatten_slot(it.value(), *s.element, path + "." + it.key(), out);
    } else {
        out.emplace_back(path, v);
    }
}

void flatten_group(const Json& obj, const std::vector<ArqQuery>& group, const std::string& prefix,
                   std::vector<std::pair<std::string, Json>>& out) {
    for (const auto& q : group) {
        if (obj.contains(q.key)) flatten_slot(obj.at(q.key), q.slot, join_path(prefix, q.key), out);
    }
}

Json project_group(const Json& obj, const std::vector<ArqQuery>& group, const PathNode& node);

Json project_slot(const Json& v, const Slot& s, const PathNode& node) {
    switch (s.kind) {
    case Slot::Kind::Record:
        return v.is_object() ? project_group(v, s.fields, node) : v;
    case Slot::Kind::List: {
        if (!v.is_array()) return v;
        Json out = Json::array();
        for (const auto& item : v) out.push_back(project_slot(item, *s.element, node));
        return out;
    }
    case Slot::Kind::Map: {
        if (!v.is_object()) return v;
        Json out = Json::object();
        for (auto it = v.begin(); it != v.end(); ++it) out[it.key()] = project_slot(it.value(), *s.element, node);
        return out;
    }
    default:
        return v;
    }
}

Json project_group(const Json& obj, const std::vector<ArqQuery>& group, const PathNode& node) {
    Json out = Json::object();
    for (const auto& q : group) {
        auto it = node.children.find(q.key);
        if (it == node.children.end() || !obj.contains(q.key)) continue;
        out[q.key] = it->second.leaf ? obj.at(q.key) : project_slot(obj.at(q.key), q.slot, it->second);
    }
    return out;
}

std::vector<ArqQuery> prune_group(const std::vector<ArqQuery>& group, const PathNode& node);

Slot prune_slot(const Slot& s, const PathNode& node) {
    switch (s.kind) {
    case Slot::Kind::Record:
        return Slot::record(prune_group(s.fields, node));
    case Slot::Kind::List: {
        Slot out = s;
        out.element = std::make_shared<const Slot>(prune_slot(*s.element, node));
        return out;
    }
    case Slot::Kind::Map: {
        Slot out = s;
        out.element = std::make_shared<const Slot>(prune_slot(*s.element, node));
        return out;
    }
    default:
        return s;
    }
}

std::vector<ArqQuery> prune_group(const std::vector<ArqQuery>& group, const PathNode& node) {
    std::vector<ArqQuery> out;
    std::set<std::string> kept;
    for (const auto& q : group) {
        auto it = node.children.find(q.key);
        if (it == node.children.end()) continue;
        ArqQuery copy = q;
        if (!it->second.leaf) copy.slot = prune_slot(q.slot, it->second);
        if (copy.required_if && !kept.count(copy.required_if->key)) {
            // The predicate's subject was pruned; the answer can no longer be conditioned on it.
            copy.required_if.reset();
            copy.optional = true;
        }
        kept.insert(copy.key);
        out.push_back(std::move(copy));
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON form
// ---------------------------------------------------------------------------

Json slot_to_json(const Slot& s);
std::vector<ArqQuery> group_from_json(const Json& j, const std::string& where);

Json query_to_json(const ArqQuery& q) {
    Json j = {{"key", q.key}, {"instruction", q.instruction}, {"slot", slot_to_json(q.slot)}};
    if (q.optional) j["optional"] = true;
    if (q.constant) j["constant"] = *q.constant;
    if (q.required_if) {
        Json r = {{"key", q.required_if->key}};
        const bool single = q.required_if->values.size() == 1;
        if (q.required_if->op == RequiredIf::Op::Equals) {
            if (single) r["equals"] = q.required_if->values[0]; else r["in"] = q.required_if->values;
        } else {
            if (single) r["not_equals"] = q.required_if->values[0]; else r["not_in"] = q.required_if->values;
        }
        j["required_if"] = r;
    }
    return j;
}

Json slot_to_json(const Slot& s) {
    Json j = {{"type", slot_type_name(s)}};
    switch (s.kind) {
    case Slot::Kind::Integer:
        j["min"] = s.min;
        j["max"] = s.max;
        break;
    case Slot::Kind::Enum:
        j["values"] = s.values;
        break;
    case Slot::Kind::List:
        j["items"] = slot_to_json(*s.element);
        if (s.min_items) j["min_items"] = s.min_items;
        if (s.bounded_list()) j["max_items"] = s.max_items;
        break;
    case Slot::Kind::Map:
        j["values"] = slot_to_json(*s.element);
        if (!s.key_hint.empty()) j["key_hint"] = s.key_hint;
        break;
    case Slot::Kind::Record: {
        Json fields = Json::array();
        for (const auto& q : s.fields) fields.push_back(query_to_json(q));
        j["fields"] = fields;
        break;
    }
    default:
        break;
    }
    return j;
}

Slot slot_from_json(const Json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
        throw Error(where + ": slot needs a string 'type'");
    }
    const std::string type = j.at("type").get<std::string>();
    if (type == "boolean") return Slot::boolean();
    if (type == "text") return Slot::text();
    if (type == "any") return Slot::any();
    if (type == "integer") {
        if (!j.contains("min") || !j.contains("max")) throw Error(where + ": integer slot needs min and max");
        return Slot::integer(j.at("min").get<std::int64_t>(), j.at("max").get<std::int64_t>());
    }
    if (type == "enum") {
        if (!j.contains("values") || !j.at("values").is_array()) throw Error(where + ": enum slot needs values");
        return Slot::enumeration(j.at("values").get<std::vector<std::string>>());
    }
    if (type == "list") {
        if (!j.contains("items")) throw Error(where + ": list slot needs items");
        Slot item = slot_from_json(j.at("items"), where + ".items");
        std::size_t lo = j.value("min_items", std::size_t{0});
        std::size_t hi = j.contains("max_items") ? j.at("max_items").get<std::size_t>()
                                                 : std::numeric_limits<std::size_t>::max();
        return Slot::list(std::move(item), lo, hi);
    }
    if (type == "record") {
        if (!j.contains("fields")) throw Error(where + ": record slot needs fields");
        return Slot::record(group_from_json(j.at("fields"), where + ".fields"));
    }
    if (type == "map") {
        if (!j.contains("values")) throw Error(where + ": map slot needs values");
        return Slot::map(slot_from_json(j.at("values"), where + ".values"), j.value("key_hint", std::string()));
    }
    throw Error(where + ": unknown slot type '" + type + "'");
}

std::vector<ArqQuery> group_from_json(const Json& j, const std::string& where) {
    if (!j.is_array()) throw Error(where + ": expected array of queries");
    std::vector<ArqQuery> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string w = where + "[" + std::to_string(i) + "]";
        const Json& qj = j[i];
        if (!qj.is_object() || !qj.contains("key") || !qj.at("key").is_string()) {
            throw Error(w + ": query needs a string 'key'");
        }
        ArqQuery q;
        q.key = qj.at("key").get<std::string>();
        q.instruction = qj.value("instruction", std::string());
        q.slot = slot_from_json(qj.contains("slot") ? qj.at("slot") : Json{{"type", "text"}}, w + ".slot");
        q.optional = qj.value("optional", false);
        if (qj.contains("constant")) q.constant = qj.at("constant");
        if (qj.contains("required_if")) {
            const Json& r = qj.at("required_if");
            if (!r.is_object() || !r.contains("key")) throw Error(w + ".required_if: needs 'key'");
            RequiredIf pred;
            pred.key = r.at("key").get<std::string>();
            if (r.contains("equals")) {
                pred.values = {r.at("equals")};
            } else if (r.contains("in")) {
                pred.values = r.at("in").get<std::vector<Json>>();
            } else if (r.contains("not_equals")) {
                pred.op = RequiredIf::Op::NotEquals;
                pred.values = {r.at("not_equals")};
            } else if (r.contains("not_in")) {
                pred.op = RequiredIf::Op::NotEquals;
                pred.values = r.at("not_in").get<std::vector<Json>>();
            } else {
                throw Error(w + ".required_if: needs equals, in, not_equals or not_in");
            }
            q.required_if = std::move(pred);
        }
        out.push_back(std::move(q));
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public surface
// ---------------------------------------------------------------------------

InvalidBlueprintError::InvalidBlueprintError(std::vector<std::string> problems)
    : Error("invalid blueprint: " + (problems.empty() ? std::string() : problems.front())),
      problems_(std::move(problems)) {}

std::vector<std::string> validate_blueprint(const ReasoningBlueprint& bp) {
    std::vector<std::string> out;
    if (bp.mode == ReasoningMode::Arq && bp.queries.empty()) out.push_back("ARQ blueprint has no queries");
    check_group(bp.queries, "", out);
    for (const auto& key : bp.answer_keys) {
        if (!resolves(bp.queries, split_path(key), 0)) out.push_back("answer key " + key + " does not resolve");
    }
    if (bp.mode == ReasoningMode::Direct) check_only_answers(bp.queries, build_trie(bp.answer_keys), "", out);
    return out;
}

std::string render_template(const std::vector<ArqQuery>& queries) {
    std::vector<std::string> notes;
    return render_group(queries, 0, notes, "");
}

std::string render_schema_instruction(const ReasoningBlueprint& bp) {
    auto problems = validate_blueprint(bp);
    if (!problems.empty()) throw InvalidBlueprintError(std::move(problems));

    std::vector<std::string> notes;
    const std::string tmpl = render_group(bp.queries, 0, notes, "");

    std::string out;
    switch (bp.mode) {
    case ReasoningMode::Arq:
        out = "Produce a valid JSON object according to the following format:\n";
        break;
    case ReasoningMode::Cot:
        out = "First, think through the task step by step in free-form prose, reasoning about everything "
              "relevant before committing to an answer.\n"
              "After your reasoning, produce a valid JSON object containing only the following fields:\n";
        break;
    case ReasoningMode::Direct:
        out = "Respond directly, without writing out any reasoning.\n"
              "Produce only a valid JSON object according to the following format:\n";
        break;
    }
    out += "```json\n" + tmpl + "\n```\n";
    if (!notes.empty()) {
        out += "Field notes:\n";
        for (const auto& n : notes) out += "- " + n + "\n";
    }
    out += kFillRules;
    return out;
}

std::optional<LocatedObject> find_last_json_object(std::string_view raw) {
    std::optional<LocatedObject> last;
    std::size_t i = 0;
    while (i < raw.size()) {
        if (raw[i] != '{') {
            ++i;
            continue;
        }
        // Find the brace that balances this one, skipping string literals.
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        std::size_t end = std::string_view::npos;
        for (std::size_t k = i; k < raw.size(); ++k) {
            const char c = raw[k];
            if (in_string) {
                if (escaped) escaped = false;
                else if (c == '\\') escaped = true;
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            else if (c == '{') ++depth;
            else if (c == '}' && --depth == 0) {
                end = k + 1;
                break;
            }
        }
        if (end != std::string_view::npos) {
            Json parsed = Json::parse(raw.substr(i, end - i), nullptr, false);
            if (!parsed.is_discarded() && parsed.is_object()) {
                last = LocatedObject{i, end, std::move(parsed)};
                i = end;
                continue;
            }
        }
        ++i;
    }
    return last;
}

std::vector<Violation> validate_object(const ReasoningBlueprint& bp, const Json& object,
                                       std::vector<std::string>* warnings) {
    Validator v;
    v.group(object, bp.queries, "");
    if (warnings) *warnings = std::move(v.warnings);
    return std::move(v.violations);
}

ParseResult parse_completion(const ReasoningBlueprint& bp, const std::string& raw) {
    ParseResult result;
    auto located = find_last_json_object(raw);
    if (!located) {
        result.violations.push_back(
            {Violation::Kind::NoObject, "", "JSON object", "no parseable JSON object found in completion"});
        return result;
    }
    StructuredCompletion sc;
    sc.raw_text = raw;
    sc.span_begin = located->begin;
    sc.span_end = located->end;
    sc.object = std::move(located->value);
    result.violations = validate_object(bp, sc.object, &sc.warnings);
    flatten_group(sc.object, bp.queries, "", sc.answers);
    result.completion = std::move(sc);
    return result;
}

Json project_answers(const ReasoningBlueprint& bp, const Json& object) {
    return project_group(object, bp.queries, build_trie(bp.answer_keys));
}

Json extract_answers(const ReasoningBlueprint& bp, const StructuredCompletion& sc) {
    return project_answers(bp, sc.object);
}

ReasoningBlueprint degenerate_blueprint(const ReasoningBlueprint& arq, ReasoningMode mode) {
    if (mode == ReasoningMode::Arq) return arq;
    ReasoningBlueprint out;
    out.mode = mode;
    out.answer_keys = arq.answer_keys;
    out.queries = prune_group(arq.queries, build_trie(arq.answer_keys));
    return out;
}

Json to_json(const ReasoningBlueprint& bp) {
    Json queries = Json::array();
    for (const auto& q : bp.queries) queries.push_back(query_to_json(q));
    return {{"mode", to_string(bp.mode)}, {"queries", queries}, {"answer_keys", bp.answer_keys}};
}

ReasoningBlueprint blueprint_from_json(const Json& j) {
    if (!j.is_object()) throw Error("blueprint: expected object");
    ReasoningBlueprint bp;
    bp.mode = reasoning_mode_from(j.value("mode", std::string("arq")));
    if (!j.contains("queries")) throw Error("blueprint: missing 'queries'");
    bp.queries = group_from_json(j.at("queries"), "blueprint.queries");
    if (j.contains("answer_keys")) bp.answer_keys = j.at("answer_keys").get<std::vector<std::string>>();
    auto problems = validate_blueprint(bp);
    if (!problems.empty()) throw InvalidBlueprintError(std::move(problems));
    return bp;
}

ReasoningBlueprint load_blueprint_file(const std::string& path) {
    return blueprint_from_json(load_json_file(path));
}

Json to_json(const Violation& v) {
    return {{"kind", to_string(v.kind)}, {"path", v.path}, {"expected", v.expected}, {"message", v.message}};
}

}  // namespace arq
