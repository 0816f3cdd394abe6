#include "alignforge/ingest.hpp"

#include "alignforge/errors.hpp"
#include "alignforge/text.hpp"

namespace alignforge {

json FieldMapping::to_json() const {
    json j;
    j["instruction"] = instruction_field;
    j["reply"] = reply_field;
    if (!turns_field.empty()) {
        json mt;
        mt["field"] = turns_field;
        mt["role_key"] = role_key;
        mt["content_key"] = content_key;
        mt["user_role"] = user_role;
        mt["assistant_role"] = assistant_role;
        mt["mode"] = mode;
        j["multi_turn"] = mt;
    }
    return j;
}

FieldMapping FieldMapping::from_json(const json& j) {
    FieldMapping m;
    if (j.contains("instruction")) m.instruction_field = j.at("instruction").get<std::string>();
    if (j.contains("reply")) m.reply_field = j.at("reply").get<std::string>();
    if (j.contains("multi_turn")) {
        const auto& mt = j.at("multi_turn");
        m.turns_field = mt.at("field").get<std::string>();
        if (mt.contains("role_key")) m.role_key = mt.at("role_key").get<std::string>();
        if (mt.contains("content_key")) m.content_key = mt.at("content_key").get<std::string>();
        if (mt.contains("user_role")) m.user_role = mt.at("user_role").get<std::string>();
        if (mt.contains("assistant_role")) m.assistant_role = mt.at("assistant_role").get<std::string>();
        if (mt.contains("mode")) m.mode = mt.at("mode").get<std::string>();
        if (m.mode != "first_turn" && m.mode != "concat")
            throw ConfigError("multi_turn.mode must be first_turn or concat, got: " + m.mode);
    }
    return m;
}

RuleSet RuleSet::from_json(const json& j) {
    RuleSet rs;
    if (j.contains("fallback")) rs.fallback = j.at("fallback").get<std::string>();
    for (const auto& rj : j.at("rules")) {
        CategoryRule r;
        r.category = rj.at("category").get<std::string>();
        if (rj.contains("source_contains"))
            r.source_contains = rj.at("source_contains").get<std::vector<std::string>>();
        if (rj.contains("keywords"))
            r.keywords = rj.at("keywords").get<std::vector<std::string>>();
        rs.rules.push_back(std::move(r));
    }
    return rs;
}

RuleSet RuleSet::load(const std::string& path) {
    return from_json(read_json_file(path));
}

json CorpusManifest::to_json() const {
    json j;
    j["source"] = source;
    j["record_count"] = record_count;
    j["accepted"] = accepted;
    j["rejected"] = rejected;
    j["reject_reasons"] = reject_reasons;
    return j;
}

std::string rule_categorize(const Sample& s, const RuleSet& rules) {
    std::string source_lc = to_lower_ascii(s.source);
    std::string instr_lc = to_lower_ascii(s.instruction);
    for (const auto& r : rules.rules) {
        for (const auto& pat : r.source_contains)
            if (source_lc.find(to_lower_ascii(pat)) != std::string::npos) return r.category;
        for (const auto& kw : r.keywords)
            if (instr_lc.find(to_lower_ascii(kw)) != std::string::npos) return r.category;
    }
    return rules.fallback;
}

namespace {

// Returns {instruction, reply} or nullopt when the record does not map.
std::optional<std::pair<std::string, std::string>> map_record(const json& rec,
                                                              const FieldMapping& m) {
    if (!rec.is_object()) return std::nullopt;

    if (rec.contains(m.instruction_field) && rec.contains(m.reply_field)) {
        const auto& iv = rec.at(m.instruction_field);
        const auto& rv = rec.at(m.reply_field);
        if (!iv.is_string() || !rv.is_string()) return std::nullopt;
        return std::make_pair(iv.get<std::string>(), rv.get<std::string>());
    }

    if (!m.turns_field.empty() && rec.contains(m.turns_field)) {
        const auto& turns = rec.at(m.turns_field);
        if (!turns.is_array()) return std::nullopt;
        std::vector<std::string> users;
        std::vector<std::string> assistants;
        bool saw_user = false;
        std::string first_user, first_assistant;
        bool have_first_assistant = false;
        for (const auto& t : turns) {
            if (!t.is_object() || !t.contains(m.role_key) || !t.contains(m.content_key)) continue;
            const auto& role_v = t.at(m.role_key);
            const auto& text_v = t.at(m.content_key);
            if (!role_v.is_string() || !text_v.is_string()) continue;
            std::string role = role_v.get<std::string>();
            std::string text = text_v.get<std::string>();
            if (role == m.user_role) {
                users.push_back(text);
                if (!saw_user) { first_user = text; saw_user = true; }
            } else if (role == m.assistant_role) {
                assistants.push_back(text);
                if (saw_user && !have_first_assistant) {
                    first_assistant = text;
                    have_first_assistant = true;
                }
            }
        }
        if (m.mode == "first_turn") {
            if (!saw_user || !have_first_assistant) return std::nullopt;
            return std::make_pair(first_user, first_assistant);
        }
        // concat: all user turns joined as the instruction, last assistant turn as the reply
        if (users.empty() || assistants.empty()) return std::nullopt;
        std::string instr;
        for (size_t i = 0; i < users.size(); i++) {
            if (i) instr += '\n';
            instr += users[i];
        }
        return std::make_pair(instr, assistants.back());
    }

    return std::nullopt;
}

} // namespace

CorpusManifest ingest_file(const std::string& path, const std::string& source_name,
                           const FieldMapping& mapping, const RuleSet& rules,
                           const std::function<void(Sample&&)>& emit) {
    JsonlReader reader(path); // unreadable file throws here (fatal)
    CorpusManifest manifest;
    manifest.source = source_name;

    while (auto line = reader.next_line()) {
        manifest.record_count++;
        json rec = json::parse(*line, nullptr, false);
        auto mapped = rec.is_discarded() ? std::nullopt : map_record(rec, mapping);
        if (!mapped) {
            manifest.rejected++;
            manifest.reject_reasons["schema"]++;
            continue;
        }
        std::string instruction(trim(mapped->first));
        std::string reply(trim(mapped->second));
        if (instruction.empty()) {
            manifest.rejected++;
            manifest.reject_reasons["empty"]++;
            continue;
        }
        Sample s;
        s.instruction = std::move(instruction);
        s.original_reply = std::move(reply);
        s.source = source_name;
        s.id = sample_id(s.source, s.instruction, s.original_reply);
        s.lang = detect_lang(s.instruction);
        s.rule_category = rule_categorize(s, rules);
        manifest.accepted++;
        emit(std::move(s));
    }
    return manifest;
}

CorpusManifest ingest_file(const std::string& path, const std::string& source_name,
                           const FieldMapping& mapping, const RuleSet& rules,
                           std::vector<Sample>& out) {
    return ingest_file(path, source_name, mapping, rules,
                       [&out](Sample&& s) { out.push_back(std::move(s)); });
}

} // namespace alignforge
