#pragma once

#include <json.hpp>

#include "rolekit/types.hpp"

// JSON mapping for the domain types. Optional fields encode as null; enums
// encode as their lower-case names.
namespace rolekit {

using json = nlohmann::json;

void to_json(json& j, const ProfileSection& v);
void from_json(const json& j, ProfileSection& v);
void to_json(json& j, const RoleProfile& v);
void from_json(const json& j, RoleProfile& v);
void to_json(json& j, const LifeSegment& v);
void from_json(const json& j, LifeSegment& v);
void to_json(json& j, const Scene& v);
void from_json(const json& j, Scene& v);
void to_json(json& j, const Turn& v);
void from_json(const json& j, Turn& v);
void to_json(json& j, const Dialogue& v);
void to_json(json& j, const DialoguePair& v);
void from_json(const json& j, DialoguePair& v);
void to_json(json& j, const HallucinationProbe& v);
void from_json(const json& j, HallucinationProbe& v);

Dialogue dialogue_from_json(const json& j);

}  // namespace rolekit

namespace nlohmann {

template <>
struct adl_serializer<rolekit::Dialogue> {
  static rolekit::Dialogue from_json(const json& j) { return rolekit::dialogue_from_json(j); }
  static void to_json(json& j, const rolekit::Dialogue& v) { rolekit::to_json(j, v); }
};

}  // namespace nlohmann
