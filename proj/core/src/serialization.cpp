#include "rolekit/serialization.hpp"

namespace rolekit {

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> read_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

void to_json(json& j, const ProfileSection& v) { j = json{{"title", v.title}, {"body", v.body}}; }

void from_json(const json& j, ProfileSection& v) {
  j.at("title").get_to(v.title);
  j.at("body").get_to(v.body);
}

void to_json(json& j, const RoleProfile& v) {
  j = json{{"role_id", v.role_id},       {"name", v.name},
           {"language", to_string(v.language)},
           {"summary", v.summary},       {"sections", v.sections},
           {"source_uri", opt(v.source_uri)},
           {"aliases", v.aliases}};
}

void from_json(const json& j, RoleProfile& v) {
  j.at("role_id").get_to(v.role_id);
  j.at("name").get_to(v.name);
  v.language = language_from_string(j.value("language", std::string("en")));
  j.at("summary").get_to(v.summary);
  j.at("sections").get_to(v.sections);
  v.source_uri = read_opt<std::string>(j, "source_uri");
  v.aliases = j.value("aliases", std::vector<std::string>{});
}

void to_json(json& j, const LifeSegment& v) {
  j = json{{"role_id", v.role_id},
           {"segment_index", v.segment_index},
           {"period_label", v.period_label},
           {"narrative", v.narrative}};
}

void from_json(const json& j, LifeSegment& v) {
  j.at("role_id").get_to(v.role_id);
  j.at("segment_index").get_to(v.segment_index);
  j.at("period_label").get_to(v.period_label);
  j.at("narrative").get_to(v.narrative);
}

void to_json(json& j, const Scene& v) {
  j = json{{"scene_id", v.scene_id},     {"role_id", v.role_id},
           {"origin", to_string(v.origin)},
           {"segment_ref", opt(v.segment_ref)},
           {"location", v.location},     {"background", v.background},
           {"participants", v.participants}};
}

void from_json(const json& j, Scene& v) {
  j.at("scene_id").get_to(v.scene_id);
  j.at("role_id").get_to(v.role_id);
  v.origin = scene_origin_from_string(j.at("origin").get<std::string>());
  v.segment_ref = read_opt<int>(j, "segment_ref");
  j.at("location").get_to(v.location);
  j.at("background").get_to(v.background);
  v.participants = j.value("participants", std::vector<std::string>{});
}

void to_json(json& j, const Turn& v) {
  j = json{{"speaker", v.speaker}, {"action", to_string(v.action)}, {"text", v.text}};
}

void from_json(const json& j, Turn& v) {
  j.at("speaker").get_to(v.speaker);
  v.action = action_from_string(j.at("action").get<std::string>());
  j.at("text").get_to(v.text);
}

void to_json(json& j, const Dialogue& v) {
  j = json{{"dialogue_id", v.dialogue_id()},
           {"role_id", v.role_id()},
           {"role_name", v.role_name()},
           {"scene_ref", opt(v.scene_ref())},
           {"origin", to_string(v.origin())},
           {"turns", v.turns()}};
}

Dialogue dialogue_from_json(const json& j) {
  return Dialogue::create(j.at("dialogue_id").get<std::string>(), j.at("role_id").get<std::string>(),
                          j.at("role_name").get<std::string>(), read_opt<std::string>(j, "scene_ref"),
                          dialogue_origin_from_string(j.at("origin").get<std::string>()),
                          j.at("turns").get<std::vector<Turn>>());
}

void to_json(json& j, const DialoguePair& v) {
  j = json{{"pair_id", v.pair_id},
           {"dialogue_ref", v.dialogue_ref},
           {"scene_ref", v.scene_ref},
           {"role_name", v.role_name},
           {"context", v.context},
           {"trigger", v.trigger},
           {"thought", opt(v.thought)},
           {"response", v.response},
           {"continuation", opt(v.continuation)}};
}

void from_json(const json& j, DialoguePair& v) {
  j.at("pair_id").get_to(v.pair_id);
  j.at("dialogue_ref").get_to(v.dialogue_ref);
  j.at("scene_ref").get_to(v.scene_ref);
  j.at("role_name").get_to(v.role_name);
  j.at("context").get_to(v.context);
  j.at("trigger").get_to(v.trigger);
  v.thought = read_opt<Turn>(j, "thought");
  j.at("response").get_to(v.response);
  v.continuation = read_opt<Turn>(j, "continuation");
}

void to_json(json& j, const HallucinationProbe& v) {
  j = json{{"probe_id", v.probe_id},
           {"role_id", v.role_id},
           {"question", v.question},
           {"anachronism_topic", v.anachronism_topic},
           {"refusal", v.refusal},
           {"direct", v.direct},
           {"rationale", opt(v.rationale)}};
}

void from_json(const json& j, HallucinationProbe& v) {
  j.at("probe_id").get_to(v.probe_id);
  j.at("role_id").get_to(v.role_id);
  j.at("question").get_to(v.question);
  j.at("anachronism_topic").get_to(v.anachronism_topic);
  j.at("refusal").get_to(v.refusal);
  v.direct = j.value("direct", false);
  v.rationale = read_opt<std::string>(j, "rationale");
}

}  // namespace rolekit
