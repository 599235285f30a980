#include "layerlab/pipeline/sections.hpp"

namespace layerlab::pipeline {

std::vector<SectionInfo> assign_sections(std::size_t block_count, const std::vector<HeadingMark>& headings) {
  std::vector<SectionInfo> out;
  if (block_count == 0) return out;
  const std::size_t first_heading = headings.empty() ? block_count : headings.front().block;
  if (first_heading > 0) out.push_back({"front_matter", 0, 0, first_heading - 1});
  for (std::size_t i = 0; i < headings.size(); ++i) {
    const std::size_t begin = headings[i].block;
    const std::size_t end = i + 1 < headings.size() ? headings[i + 1].block - 1 : block_count - 1;
    SectionInfo s;
    s.order = static_cast<int>(out.size());
    s.name = headings[i].name.empty() ? "unnamed_section_" + std::to_string(s.order) : headings[i].name;
    s.first_block = begin;
    s.last_block = end;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::size_t> section_of_blocks(std::size_t block_count, const std::vector<SectionInfo>& sections) {
  std::vector<std::size_t> out(block_count, 0);
  for (std::size_t s = 0; s < sections.size(); ++s)
    for (std::size_t b = sections[s].first_block; b <= sections[s].last_block && b < block_count; ++b) out[b] = s;
  return out;
}

}  // namespace layerlab::pipeline
