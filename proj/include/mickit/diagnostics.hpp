#pragma once

#include <functional>
#include <string_view>

namespace mickit {

using WarningSink = std::function<void(std::string_view)>;

/// Replaces the process-wide warning sink and returns the previous one. The
/// default sink writes to standard error. Passing an empty function silences
/// warnings.
WarningSink set_warning_sink(WarningSink sink);

/// Reports a recoverable condition such as a degenerate input axis.
void warn(std::string_view message);

} // namespace mickit
