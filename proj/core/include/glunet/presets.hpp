#pragma once

#include <string>
#include <vector>

#include "glunet/arch.hpp"

namespace glunet {

/// Named desk-scale architecture presets.
std::vector<std::string> preset_names();
bool is_preset(const std::string& name);
std::string preset_text(const std::string& name);

/// Resolves a preset name or a config file path to a parsed spec.
ArchSpec load_arch(const std::string& name_or_path);

}  // namespace glunet
