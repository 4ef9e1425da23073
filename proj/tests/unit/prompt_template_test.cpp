#include <gtest/gtest.h>

#include "rolekit/error.hpp"
#include "rolekit/prompt_template.hpp"

namespace rolekit {
namespace {

TEST(PromptTemplate, RendersSlotsAndLiteralBraces) {
  PromptTemplate t("Hi {name}, {{literal}} and {not a slot} and {name} again {");
  EXPECT_EQ(t.slots(), std::vector<std::string>{"name"});
  EXPECT_EQ(t.render({{"name", "Karl"}}), "Hi Karl, {literal}} and {not a slot} and Karl again {");
}

TEST(PromptTemplate, MissingOrEmptySlotIsARenderError) {
  PromptTemplate t("{a} and {b}");
  EXPECT_THROW(t.render({{"a", "x"}}), RenderError);
  EXPECT_THROW(t.render({{"a", "x"}, {"b", ""}}), RenderError);
  try {
    t.render({{"a", "x"}});
  } catch (const RenderError& e) {
    EXPECT_NE(std::string(e.what()).find("b"), std::string::npos);
    EXPECT_EQ(e.exit_code(), 1);
  }
}

TEST(PromptTemplate, ExtraValuesAreIgnoredAndValuesAreNotReexpanded) {
  EXPECT_EQ(render_template("{a}", {{"a", "{b}"}, {"b", "no"}}), "{b}");
}

TEST(PromptTemplate, SlotOrderFollowsFirstAppearance) {
  PromptTemplate t("{z}{a}{z}{m_1}");
  EXPECT_EQ(t.slots(), (std::vector<std::string>{"z", "a", "m_1"}));
}

}  // namespace
}  // namespace rolekit
