#include "glunet/presets.hpp"

#include <array>
#include <fstream>
#include <sstream>
#include <utility>

namespace glunet {

namespace {

// Desk-scale shrinks of the reference architectures. gcnn8-tiny follows the
// 8-layer non-bottleneck shape, gcnn8b-tiny its equal-receptive-field
// bottleneck counterpart (both have a receptive field of 25).
constexpr std::array<std::pair<const char*, const char*>, 7> kPresets = {{
    {"gcnn8-tiny",
     "embed=64\n"
     "conv=[4,64]x1\n"
     "conv=[4,64]x7\n"
     "gate=glu\n"
     "cutoffs=40,80\n"},
    {"gcnn8b-tiny",
     "embed=64\n"
     "conv=[1,64]x1\n"
     "conv=B[1,16;5,16;1,64]x3\n"
     "conv=B[1,24;5,24;1,64]x3\n"
     "gate=glu\n"
     "cutoffs=40,80\n"},
    {"gcnnsweep-gate",
     "embed=48\n"
     "conv=[4,48]x5\n"
     "gate=glu\n"},
    {"gcnnsweep-train",
     "embed=32\n"
     "conv=[4,32]x3\n"
     "gate=glu\n"},
    {"gcnnsweep-rf3",
     "embed=48\n"
     "conv=[3,48]x1\n"
     "gate=glu\n"
     "context_window=3\n"},
    {"gcnnsweep-rf10",
     "embed=48\n"
     "conv=[4,48]x3\n"
     "gate=glu\n"
     "context_window=10\n"},
    {"gcnnsweep-rf25",
     "embed=48\n"
     "conv=[4,48]x8\n"
     "gate=glu\n"
     "context_window=25\n"},
}};

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : kPresets) names.push_back(name);
  return names;
}

bool is_preset(const std::string& name) {
  for (const auto& [n, text] : kPresets) {
    if (name == n) return true;
  }
  return false;
}

std::string preset_text(const std::string& name) {
  for (const auto& [n, text] : kPresets) {
    if (name == n) return text;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

ArchSpec load_arch(const std::string& name_or_path) {
  if (is_preset(name_or_path)) return parse_arch(preset_text(name_or_path));
  std::ifstream in(name_or_path, std::ios::binary);
  if (!in) {
    std::ostringstream os;
    os << "'" << name_or_path << "' is neither a preset (";
    const auto names = preset_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (i) os << ", ";
      os << names[i];
    }
    os << ") nor a readable config file";
    throw ConfigError(os.str());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_arch(buf.str());
}

}  // namespace glunet
