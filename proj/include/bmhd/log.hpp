#pragma once

#include <functional>
#include <string>

namespace bmhd {

/// Warnings go to stderr unless a sink is installed (tests capture them).
using WarningSink = std::function<void(const std::string&)>;

void warn(const std::string& message);
/// Returns the previous sink; an empty sink restores stderr.
WarningSink set_warning_sink(WarningSink sink);

}  // namespace bmhd
