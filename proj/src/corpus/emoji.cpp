#include "ctpt/corpus/emoji.hpp"

#include <fstream>

#include "ctpt/util/error.hpp"

namespace ctpt {

bool is_emoji_codepoint(uint32_t cp) {
  return (cp >= 0x1F000 && cp <= 0x1FAFF) ||  // SMP emoji & pictograph blocks
         (cp >= 0x2600 && cp <= 0x27BF) ||    // misc symbols, dingbats
         (cp >= 0x2B00 && cp <= 0x2BFF) ||    // misc symbols and arrows
         (cp >= 0xFE00 && cp <= 0xFE0F) ||    // variation selectors
         cp == 0x200D ||                      // zero width joiner
         cp == 0x20E3;                        // combining keycap
}

EmojiTable EmojiTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("emoji table: cannot open " + path);
  EmojiTable table;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw data_error("emoji table: missing tab at line " + std::to_string(lineno));
    }
    uint32_t cp = static_cast<uint32_t>(std::stoul(line.substr(0, tab), nullptr, 16));
    table.add(cp, line.substr(tab + 1));
  }
  return table;
}

}  // namespace ctpt
