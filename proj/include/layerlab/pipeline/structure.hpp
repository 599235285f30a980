#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace layerlab::pipeline {

// Section headings (text of <head> elements directly inside <div>) of a
// TEI-like XML document, in document order. Errors: unparseable-response.
std::vector<std::string> parse_structure_xml(std::string_view xml);

// Posts the PDF as multipart field "input" and parses the XML reply.
// Errors: service-unreachable (connection failure, timeout or non-2xx),
// unparseable-response, invalid-url.
std::vector<std::string> fetch_external_structure(std::string_view pdf_bytes, const std::string& url,
                                                  double timeout_s = 30);

struct HeadingCandidate {
  std::size_t block = 0;
  std::string text;  // first line of the block
};

// Aligns service headings to candidate blocks in order: an exact match after
// whitespace/case normalization (with or without numbering) wins, otherwise
// the first candidate sharing a common substring of at least 90% of the
// heading length. Result is parallel to `headings`; unmatched ones are empty.
std::vector<std::optional<std::size_t>> align_headings(const std::vector<std::string>& headings,
                                                       const std::vector<HeadingCandidate>& candidates);

// Longest common substring length in code points.
std::size_t longest_common_substring(std::u32string_view a, std::u32string_view b);

}  // namespace layerlab::pipeline
