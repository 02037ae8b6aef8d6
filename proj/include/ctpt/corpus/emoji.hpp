#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>

namespace ctpt {

// Codepoint ranges treated as emoji. Anything in these ranges is either
// mapped through the table or dropped.
bool is_emoji_codepoint(uint32_t cp);

class EmojiTable {
 public:
  EmojiTable() = default;

  // TSV, one mapping per line: codepoint-hex \t shortcode.
  static EmojiTable load(const std::string& path);

  void add(uint32_t cp, const std::string& shortcode) { map_[cp] = shortcode; }

  // nullptr when the codepoint has no shortcode.
  const std::string* lookup(uint32_t cp) const {
    auto it = map_.find(cp);
    return it == map_.end() ? nullptr : &it->second;
  }

  size_t size() const { return map_.size(); }

 private:
  std::unordered_map<uint32_t, std::string> map_;
};

}  // namespace ctpt
