#pragma once

#include <functional>
#include <string_view>

namespace rvqmotion {

using WarningSink = std::function<void(std::string_view)>;

// Emits a non-fatal warning. Defaults to stderr.
void warn(std::string_view message);

// Replaces the warning sink; returns the previous one. Passing an empty
// function restores the default.
WarningSink set_warning_sink(WarningSink sink);

} // namespace rvqmotion
