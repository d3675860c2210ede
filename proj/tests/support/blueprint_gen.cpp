#include "blueprint_gen.hpp"

#include <functional>

namespace arq::testing {

namespace {

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool coin(std::mt19937_64& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

std::string random_text(std::mt19937_64& rng) {
    static const std::vector<std::string> pieces = {
        "plain",  "with space", "{brace}", "\"quoted\"", "back\\slash", "new\nline", "café", "}{", "[list]", "",
        "tab\there", "emoji \xF0\x9F\x8D\x95"};
    std::string s;
    const int n = uniform(rng, 0, 3);
    for (int i = 0; i < n; ++i) s += pieces[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(pieces.size()) - 1))];
    return s;
}

Slot random_slot(std::mt19937_64& rng, int depth, int& counter);

std::vector<ArqQuery> random_group(std::mt19937_64& rng, int depth, int& counter) {
    std::vector<ArqQuery> group;
    const int n = uniform(rng, 1, depth == 0 ? 6 : 4);
    for (int i = 0; i < n; ++i) {
        ArqQuery q;
        q.key = "k" + std::to_string(counter++);
        q.instruction = coin(rng) ? "answer " + q.key : "";
        q.slot = random_slot(rng, depth, counter);
        const int r = uniform(rng, 0, 9);
        if (r == 0) {
            q.optional = true;
        } else if (r == 1 && !group.empty()) {
            // Condition on an earlier scalar sibling.
            std::vector<const ArqQuery*> subjects;
            for (const auto& s : group) {
                if (s.slot.kind == Slot::Kind::Boolean || s.slot.kind == Slot::Kind::Integer ||
                    s.slot.kind == Slot::Kind::Enum) {
                    subjects.push_back(&s);
                }
            }
            if (!subjects.empty()) {
                const ArqQuery* s = subjects[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(subjects.size()) - 1))];
                RequiredIf ri;
                ri.key = s->key;
                ri.op = coin(rng) ? RequiredIf::Op::Equals : RequiredIf::Op::NotEquals;
                switch (s->slot.kind) {
                case Slot::Kind::Boolean: ri.values = {Json(coin(rng))}; break;
                case Slot::Kind::Integer: ri.values = {Json(s->slot.min), Json(s->slot.max)}; break;
                default: ri.values = {Json(s->slot.values.front())}; break;
                }
                q.required_if = ri;
            }
        } else if (r == 2 && q.slot.kind == Slot::Kind::Boolean) {
            q.constant = true;
        }
        group.push_back(std::move(q));
    }
    return group;
}

Slot random_scalar(std::mt19937_64& rng) {
    switch (uniform(rng, 0, 4)) {
    case 0: return Slot::boolean();
    case 1: {
        const int lo = uniform(rng, -5, 5);
        return Slot::integer(lo, lo + uniform(rng, 0, 10));
    }
    case 2: return Slot::text();
    case 3: {
        std::vector<std::string> values;
        const int n = uniform(rng, 1, 4);
        for (int i = 0; i < n; ++i) values.push_back("v" + std::to_string(i));
        return Slot::enumeration(values);
    }
    default: return Slot::any();
    }
}

Slot random_slot(std::mt19937_64& rng, int depth, int& counter) {
    if (depth >= 3 || coin(rng, 0.6)) return random_scalar(rng);
    switch (uniform(rng, 0, 2)) {
    case 0: return Slot::record(random_group(rng, depth + 1, counter));
    case 1: {
        const std::size_t lo = static_cast<std::size_t>(uniform(rng, 0, 2));
        const std::size_t hi = coin(rng) ? lo + static_cast<std::size_t>(uniform(rng, 0, 3))
                                         : std::numeric_limits<std::size_t>::max();
        return Slot::list(random_slot(rng, depth + 1, counter), lo, hi);
    }
    default: return Slot::map(random_slot(rng, depth + 1, counter), "NAME");
    }
}

const Slot* fields_of(const Slot& slot) {
    const Slot* s = &slot;
    while (s->kind == Slot::Kind::List || s->kind == Slot::Kind::Map) s = s->element.get();
    return s->kind == Slot::Kind::Record ? s : nullptr;
}

void collect_paths(const std::vector<ArqQuery>& group, const std::string& prefix, std::vector<std::string>& out) {
    for (const auto& q : group) {
        const std::string path = prefix.empty() ? q.key : prefix + "." + q.key;
        out.push_back(path);
        if (const Slot* rec = fields_of(q.slot)) collect_paths(rec->fields, path, out);
    }
}

Json random_value(const Slot& s, std::mt19937_64& rng);

Json random_group_value(const std::vector<ArqQuery>& group, std::mt19937_64& rng) {
    Json obj = Json::object();
    for (const auto& q : group) {
        bool include = true;
        if (q.optional) include = coin(rng);
        else if (q.required_if && !q.required_if->holds(obj)) include = coin(rng);
        if (!include) continue;
        obj[q.key] = q.constant ? *q.constant : random_value(q.slot, rng);
    }
    return obj;
}

Json random_value(const Slot& s, std::mt19937_64& rng) {
    switch (s.kind) {
    case Slot::Kind::Boolean: return coin(rng);
    case Slot::Kind::Integer: return std::uniform_int_distribution<std::int64_t>(s.min, s.max)(rng);
    case Slot::Kind::Text: return random_text(rng);
    case Slot::Kind::Enum: return s.values[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(s.values.size()) - 1))];
    case Slot::Kind::List: {
        const std::size_t hi = std::min(s.max_items, s.min_items + 3);
        const std::size_t n = static_cast<std::size_t>(uniform(rng, static_cast<int>(s.min_items), static_cast<int>(hi)));
        Json arr = Json::array();
        for (std::size_t i = 0; i < n; ++i) arr.push_back(random_value(*s.element, rng));
        return arr;
    }
    case Slot::Kind::Record: return random_group_value(s.fields, rng);
    case Slot::Kind::Map: {
        Json obj = Json::object();
        const int n = uniform(rng, 0, 3);
        for (int i = 0; i < n; ++i) obj["m" + std::to_string(i)] = random_value(*s.element, rng);
        return obj;
    }
    case Slot::Kind::Any:
        switch (uniform(rng, 0, 4)) {
        case 0: return nullptr;
        case 1: return uniform(rng, -100, 100);
        case 2: return random_text(rng);
        case 3: return Json::array({1, "two"});
        default: return Json{{"nested", coin(rng)}};
        }
    }
    return nullptr;
}

// Mutation sites: every present value, with its slot and whether removing it must be reported.
struct Site {
    Json::json_pointer pointer;
    std::string path;
    const Slot* slot;
    bool removable;
};

void collect_sites(const Json& v, const Slot& s, const Json::json_pointer& ptr, const std::string& path,
                   std::vector<Site>& out);

void collect_group_sites(const Json& obj, const std::vector<ArqQuery>& group, const Json::json_pointer& ptr,
                         const std::string& prefix, std::vector<Site>& out) {
    for (const auto& q : group) {
        if (!obj.contains(q.key)) continue;
        const std::string path = prefix.empty() ? q.key : prefix + "." + q.key;
        // Removing a key that is the subject of a sibling's condition can change that sibling's
        // requirement, but never hides the missing key itself.
        out.push_back({ptr / q.key, path, &q.slot, q.required_in(obj)});
        collect_sites(obj.at(q.key), q.slot, ptr / q.key, path, out);
    }
}

void collect_sites(const Json& v, const Slot& s, const Json::json_pointer& ptr, const std::string& path,
                   std::vector<Site>& out) {
    switch (s.kind) {
    case Slot::Kind::Record: collect_group_sites(v, s.fields, ptr, path, out); break;
    case Slot::Kind::List:
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string p = path + "[" + std::to_string(i) + "]";
            out.push_back({ptr / i, p, s.element.get(), false});
            collect_sites(v[i], *s.element, ptr / i, p, out);
        }
        break;
    case Slot::Kind::Map:
        for (auto it = v.begin(); it != v.end(); ++it) {
            const std::string p = path + "." + it.key();
            out.push_back({ptr / it.key(), p, s.element.get(), false});
            collect_sites(it.value(), *s.element, ptr / it.key(), p, out);
        }
        break;
    default: break;
    }
}

// A value of a JSON type the slot rejects.
Json wrong_type(const Slot& s, std::mt19937_64& rng) {
    switch (s.kind) {
    case Slot::Kind::Boolean: return coin(rng) ? Json("true") : Json(1);
    case Slot::Kind::Integer: return coin(rng) ? Json("7") : Json(2.5);
    case Slot::Kind::Text:
    case Slot::Kind::Enum: return coin(rng) ? Json(3) : Json(false);
    case Slot::Kind::List: return Json::object();
    case Slot::Kind::Record:
    case Slot::Kind::Map: return Json::array();
    case Slot::Kind::Any: break;
    }
    return nullptr;
}

}  // namespace

ReasoningBlueprint random_blueprint(std::mt19937_64& rng) {
    ReasoningBlueprint bp;
    int counter = 0;
    bp.queries = random_group(rng, 0, counter);
    std::vector<std::string> paths;
    collect_paths(bp.queries, "", paths);
    for (const auto& p : paths) {
        if (coin(rng, 0.3)) bp.answer_keys.push_back(p);
    }
    if (bp.answer_keys.empty()) bp.answer_keys.push_back(paths.front());
    return bp;
}

Json conforming_object(const ReasoningBlueprint& bp, std::mt19937_64& rng) {
    return random_group_value(bp.queries, rng);
}

std::string wrap_in_prose(const Json& object, std::mt19937_64& rng) {
    static const std::vector<std::string> before = {"", "Here is my answer:\n", "Let me think (carefully) first.\n```json\n",
                                                    "Reasoning: x > y, so [a] wins.\n\n"};
    static const std::vector<std::string> after = {"", "\n```", "\nDone.", "\n```\nHope this helps :)"};
    const int indent = uniform(rng, -1, 4);
    return before[static_cast<std::size_t>(uniform(rng, 0, 3))] + object.dump(indent) +
           after[static_cast<std::size_t>(uniform(rng, 0, 3))];
}

bool mutate(const ReasoningBlueprint& bp, const Json& object, std::mt19937_64& rng, Mutation& out) {
    std::vector<Site> sites;
    collect_group_sites(object, bp.queries, Json::json_pointer(), "", sites);

    std::vector<std::function<bool()>> options;
    for (const auto& site : sites) {
        if (site.removable) {
            options.push_back([&, site] {
                Json m = object;
                const auto parent = site.pointer.parent_pointer();
                m.at(parent).erase(site.pointer.back());
                out = {Violation::Kind::Missing, site.path, std::move(m), "remove " + site.path};
                return true;
            });
        }
        if (site.slot->kind != Slot::Kind::Any) {
            options.push_back([&, site] {
                Json m = object;
                m[site.pointer] = wrong_type(*site.slot, rng);
                out = {Violation::Kind::Type, site.path, std::move(m), "type flip at " + site.path};
                return true;
            });
        }
        if (site.slot->kind == Slot::Kind::Integer) {
            options.push_back([&, site] {
                Json m = object;
                m[site.pointer] = coin(rng) ? site.slot->max + 1 : site.slot->min - 1;
                out = {Violation::Kind::Range, site.path, std::move(m), "out of range at " + site.path};
                return true;
            });
        }
        if (site.slot->kind == Slot::Kind::Enum) {
            options.push_back([&, site] {
                Json m = object;
                m[site.pointer] = "not-a-listed-value";
                out = {Violation::Kind::Enum, site.path, std::move(m), "invalid enum at " + site.path};
                return true;
            });
        }
        if (site.slot->kind == Slot::Kind::List && site.slot->bounded_list()) {
            options.push_back([&, site] {
                Json m = object;
                Json& arr = m[site.pointer];
                Json filler = arr.empty() ? conforming_object(ReasoningBlueprint{ReasoningMode::Arq,
                                                                                 {ArqQuery{"x", "", *site.slot->element}},
                                                                                 {}},
                                                              rng)
                                                .at("x")
                                          : arr.front();
                while (arr.size() <= site.slot->max_items) arr.push_back(filler);
                out = {Violation::Kind::Length, site.path, std::move(m), "too many items at " + site.path};
                return true;
            });
        }
        if (site.slot->kind == Slot::Kind::List && site.slot->min_items > 0) {
            options.push_back([&, site] {
                Json m = object;
                m[site.pointer] = Json::array();
                out = {Violation::Kind::Length, site.path, std::move(m), "too few items at " + site.path};
                return true;
            });
        }
    }
    if (options.empty()) return false;
    return options[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(options.size()) - 1))]();
}

namespace {

void leaves(const Json& v, const Slot& s, const std::string& path, std::vector<std::pair<std::string, Json>>& out);

void group_leaves(const Json& obj, const std::vector<ArqQuery>& group, const std::string& prefix,
                  std::vector<std::pair<std::string, Json>>& out) {
    for (const auto& q : group) {
        if (obj.contains(q.key)) leaves(obj.at(q.key), q.slot, prefix.empty() ? q.key : prefix + "." + q.key, out);
    }
}

void leaves(const Json& v, const Slot& s, const std::string& path, std::vector<std::pair<std::string, Json>>& out) {
    if (s.kind == Slot::Kind::Record) {
        group_leaves(v, s.fields, path, out);
    } else if (s.kind == Slot::Kind::List && !v.empty()) {
        for (std::size_t i = 0; i < v.size(); ++i) leaves(v[i], *s.element, path + "[" + std::to_string(i) + "]", out);
    } else if (s.kind == Slot::Kind::Map && !v.empty()) {
        for (auto it = v.begin(); it != v.end(); ++it) leaves(it.value(), *s.element, path + "." + it.key(), out);
    } else {
        out.emplace_back(path, v);
    }
}

}  // namespace

std::vector<std::pair<std::string, Json>> reference_leaves(const ReasoningBlueprint& bp, const Json& object) {
    std::vector<std::pair<std::string, Json>> out;
    group_leaves(object, bp.queries, "", out);
    return out;
}

}  // namespace arq::testing
