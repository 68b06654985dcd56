#pragma once

#include <string_view>

namespace webnav {

// Diagnostics go to stderr unless silenced (the CLI's --quiet).
void SetQuiet(bool quiet);
bool IsQuiet();
void Warn(std::string_view message);
void Info(std::string_view message);

}  // namespace webnav
