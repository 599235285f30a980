#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace layerlab::pipeline {

struct SectionInfo {
  std::string name;
  int order = 0;
  std::size_t first_block = 0;  // inclusive block range in reading order
  std::size_t last_block = 0;
};

struct HeadingMark {
  std::size_t block = 0;
  std::string name;  // empty names become "unnamed_section_<order>"
};

// Sections run from each heading to the block before the next one. Blocks
// ahead of the first heading form "front_matter" (order 0); with no headings
// at all it covers the whole document. `headings` must be sorted by block.
std::vector<SectionInfo> assign_sections(std::size_t block_count, const std::vector<HeadingMark>& headings);

// Section index for every block, given assign_sections output.
std::vector<std::size_t> section_of_blocks(std::size_t block_count, const std::vector<SectionInfo>& sections);

}  // namespace layerlab::pipeline
