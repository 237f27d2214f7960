#pragma once

#include <string_view>

namespace uwh {

// Built-in copies of data/schema.txt, data/plan.uwh and data/rules.txt.
std::string_view canonical_manifest();
std::string_view canonical_plan();
std::string_view canonical_rules();

}  // namespace uwh
