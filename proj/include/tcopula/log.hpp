#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace tcopula::log {

using WarningSink = std::function<void(std::string_view)>;

/// Replaces the process-wide warning sink and returns the previous one.
/// The default sink writes "warning: <msg>" lines to standard error.
WarningSink set_warning_sink(WarningSink sink);

void warn(std::string_view message);

/// Collects warnings for the lifetime of the object (restores the previous sink on exit).
class ScopedWarningCapture {
public:
    ScopedWarningCapture();
    ~ScopedWarningCapture();
    ScopedWarningCapture(const ScopedWarningCapture&) = delete;
    ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

    const std::vector<std::string>& messages() const { return messages_; }
    bool contains(std::string_view fragment) const;

private:
    std::vector<std::string> messages_;
    WarningSink previous_;
};

}  // namespace tcopula::log
