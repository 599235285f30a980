#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "layerlab/pdf/object.hpp"

namespace layerlab::pdf {

struct Page {
  Dict dict;
  Dict resources;
  // MediaBox (or CropBox when present) in default user space.
  double x0 = 0, y0 = 0, x1 = 612, y1 = 792;
  int rotate = 0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

// Random-access view over a PDF's objects. Objects are located by scanning
// for "n g obj" headers rather than trusting the xref table, which tolerates
// the stale offsets common in producer output. Later definitions win.
class File {
 public:
  // Errors: not-a-pdf, encrypted-pdf, malformed-pdf.
  static File open(std::string bytes);

  // Follows indirect references; unknown references resolve to null.
  const Object& resolve(const Object& obj) const;
  const Object& object(int num) const;

  std::string decode_stream(const Stream& stream) const;
  const std::vector<Page>& pages() const { return pages_; }
  std::string page_contents(const Page& page) const;

  const std::string& bytes() const { return *bytes_; }

 private:
  File() = default;

  void scan();
  void load_object_streams();
  void collect_pages(const Object& node, const Dict& inherited_resources, const Array* inherited_box,
                     int inherited_rotate, int depth);
  Object load_at(std::size_t offset) const;

  std::shared_ptr<std::string> bytes_;
  std::map<int, std::size_t> offsets_;
  std::map<int, std::pair<int, std::size_t>> packed_;  // num -> (object stream num, offset in decoded data)
  std::map<int, std::shared_ptr<std::string>> packed_data_;
  std::vector<int> object_streams_;
  Dict trailer_;
  std::vector<Page> pages_;
  mutable std::map<int, std::shared_ptr<Object>> cache_;
};

// Decoders for the standard stream filters, exposed for tests.
std::string flate_decode(std::string_view data);
std::string flate_encode(std::string_view data);
std::string ascii_hex_decode(std::string_view data);
std::string ascii85_decode(std::string_view data);

}  // namespace layerlab::pdf
