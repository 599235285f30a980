#include "layerlab/pdf/file.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <set>

#include "layerlab/error.hpp"

namespace layerlab::pdf {

namespace {

const Object kNull{};

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string inflate_with(std::string_view data, int window_bits, bool& ok) {
  z_stream zs{};
  ok = false;
  if (inflateInit2(&zs, window_bits) != Z_OK) return {};
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  std::string out;
  char buffer[16384];
  int rc = Z_OK;
  do {
    zs.next_out = reinterpret_cast<Bytef*>(buffer);
    zs.avail_out = sizeof(buffer);
    rc = inflate(&zs, Z_NO_FLUSH);
    out.append(buffer, sizeof(buffer) - zs.avail_out);
  } while (rc == Z_OK && (zs.avail_in > 0 || zs.avail_out == 0));
  inflateEnd(&zs);
  // Truncated streams still yield their decodable prefix.
  ok = rc == Z_STREAM_END || (!out.empty() && (rc == Z_OK || rc == Z_BUF_ERROR || rc == Z_DATA_ERROR));
  return out;
}

std::string png_unpredict(const std::string& data, int columns, int colors, int bits) {
  const int bpp = std::max(1, colors * bits / 8);
  const int row_len = (columns * colors * bits + 7) / 8;
  std::string out;
  std::vector<unsigned char> prev(row_len, 0), cur(row_len, 0);
  std::size_t pos = 0;
  while (pos + 1 + row_len <= data.size()) {
    const int type = static_cast<unsigned char>(data[pos]);
    for (int i = 0; i < row_len; ++i) cur[i] = static_cast<unsigned char>(data[pos + 1 + i]);
    for (int i = 0; i < row_len; ++i) {
      const int left = i >= bpp ? cur[i - bpp] : 0;
      const int up = prev[i];
      const int up_left = i >= bpp ? prev[i - bpp] : 0;
      switch (type) {
        case 1: cur[i] = static_cast<unsigned char>(cur[i] + left); break;
        case 2: cur[i] = static_cast<unsigned char>(cur[i] + up); break;
        case 3: cur[i] = static_cast<unsigned char>(cur[i] + (left + up) / 2); break;
        case 4: {
          const int p = left + up - up_left;
          const int pa = std::abs(p - left), pb = std::abs(p - up), pc = std::abs(p - up_left);
          const int pred = (pa <= pb && pa <= pc) ? left : (pb <= pc ? up : up_left);
          cur[i] = static_cast<unsigned char>(cur[i] + pred);
          break;
        }
        default: break;
      }
    }
    out.append(reinterpret_cast<const char*>(cur.data()), row_len);
    prev = cur;
    pos += 1 + row_len;
  }
  return out;
}

}  // namespace

std::string flate_decode(std::string_view data) {
  bool ok = false;
  std::string out = inflate_with(data, 15 + 32, ok);
  if (ok) return out;
  out = inflate_with(data, -15, ok);
  if (ok) return out;
  throw Error("malformed-pdf", "corrupt Flate stream");
}

std::string flate_encode(std::string_view data) {
  uLongf size = compressBound(static_cast<uLong>(data.size()));
  std::string out(size, '\0');
  if (compress2(reinterpret_cast<Bytef*>(out.data()), &size, reinterpret_cast<const Bytef*>(data.data()),
                static_cast<uLong>(data.size()), Z_BEST_COMPRESSION) != Z_OK)
    throw Error("internal", "zlib compression failed");
  out.resize(size);
  return out;
}

std::string ascii_hex_decode(std::string_view data) {
  std::string out;
  int hi = -1;
  for (char c : data) {
    if (c == '>') break;
    int v = -1;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    if (v < 0) continue;
    if (hi < 0) {
      hi = v;
    } else {
      out.push_back(static_cast<char>((hi << 4) | v));
      hi = -1;
    }
  }
  if (hi >= 0) out.push_back(static_cast<char>(hi << 4));
  return out;
}

std::string ascii85_decode(std::string_view data) {
  std::string out;
  std::uint32_t tuple = 0;
  int count = 0;
  std::size_t i = 0;
  if (data.substr(0, 2) == "<~") i = 2;
  for (; i < data.size(); ++i) {
    const char c = data[i];
    if (c == '~') break;
    if (is_pdf_whitespace(c)) continue;
    if (c == 'z' && count == 0) {
      out.append(4, '\0');
      continue;
    }
    if (c < '!' || c > 'u') throw Error("malformed-pdf", "bad ASCII85 character");
    tuple = tuple * 85 + static_cast<std::uint32_t>(c - '!');
    if (++count == 5) {
      for (int k = 3; k >= 0; --k) out.push_back(static_cast<char>((tuple >> (8 * k)) & 0xFF));
      tuple = 0;
      count = 0;
    }
  }
  if (count > 1) {
    for (int k = count; k < 5; ++k) tuple = tuple * 85 + 84;
    for (int k = 0; k < count - 1; ++k) out.push_back(static_cast<char>((tuple >> (8 * (3 - k))) & 0xFF));
  }
  return out;
}

File File::open(std::string bytes) {
  // The header may be preceded by junk; accept it within the first KiB.
  const auto header = bytes.find("%PDF-");
  if (header == std::string::npos || header > 1024) throw Error("not-a-pdf", "input is not a PDF (no %PDF- header)");
  File f;
  f.bytes_ = std::make_shared<std::string>(std::move(bytes));
  f.scan();
  if (f.offsets_.empty()) throw Error("not-a-pdf", "input contains no PDF objects");
  if (lookup(f.trailer_, "Encrypt")) throw Error("encrypted-pdf", "encrypted PDFs are not supported");
  f.load_object_streams();

  const Object* root = lookup(f.trailer_, "Root");
  const Object* catalog = root ? &f.resolve(*root) : nullptr;
  if (!catalog || !catalog->dict()) {
    catalog = nullptr;
    for (const auto& [num, _] : f.offsets_) {
      const Object& o = f.object(num);
      if (const Dict* d = o.dict()) {
        const Object* type = lookup(*d, "Type");
        if (type && type->name() && *type->name() == "Catalog") {
          catalog = &o;
          break;
        }
      }
    }
  }
  if (!catalog) throw Error("malformed-pdf", "PDF has no document catalog");
  const Object* pages = lookup(*catalog->dict(), "Pages");
  if (!pages) throw Error("malformed-pdf", "catalog has no page tree");
  f.collect_pages(*pages, Dict{}, nullptr, 0, 0);
  if (f.pages_.empty()) throw Error("malformed-pdf", "PDF has no pages");
  return f;
}

void File::scan() {
  const std::string& b = *bytes_;
  std::size_t pos = 0;
  while (true) {
    const std::size_t k = b.find("obj", pos);
    if (k == std::string::npos) break;
    pos = k + 3;
    if (k + 3 < b.size() && !is_pdf_whitespace(b[k + 3]) && !is_pdf_delimiter(b[k + 3])) continue;
    // Walk back over "num gen ".
    std::size_t j = k;
    if (j == 0 || !is_pdf_whitespace(b[j - 1])) continue;
    while (j > 0 && is_pdf_whitespace(b[j - 1])) --j;
    const std::size_t gen_end = j;
    while (j > 0 && is_digit(b[j - 1])) --j;
    if (j == gen_end) continue;
    if (j == 0 || !is_pdf_whitespace(b[j - 1])) continue;
    while (j > 0 && is_pdf_whitespace(b[j - 1])) --j;
    const std::size_t num_end = j;
    while (j > 0 && is_digit(b[j - 1])) --j;
    if (j == num_end) continue;
    if (j > 0 && !is_pdf_whitespace(b[j - 1]) && !is_pdf_delimiter(b[j - 1])) continue;
    const int num = std::atoi(b.substr(j, num_end - j).c_str());

    offsets_[num] = k + 3;
    // Parse the header object so stream bodies are skipped, not scanned.
    try {
      Parser p(b, k + 3);
      auto obj = p.next();
      if (obj && obj->dict()) {
        const Dict& d = *obj->dict();
        const Object* type = lookup(d, "Type");
        const std::string* type_name = type ? type->name() : nullptr;
        if (type_name && *type_name == "XRef") {
          for (const auto& [key, value] : d)
            if (key == "Root" || key == "Encrypt" || key == "Info") trailer_[key] = value;
        } else if (type_name && *type_name == "ObjStm") {
          object_streams_.push_back(num);
        }
      }
      p.skip_whitespace();
      if (b.compare(p.position(), 6, "stream") == 0) {
        const std::size_t end = b.find("endstream", p.position() + 6);
        if (end != std::string::npos) pos = end + 9;
      } else {
        pos = std::max(pos, p.position());
      }
    } catch (const Error&) {
    }
  }

  std::size_t t = 0;
  while ((t = b.find("trailer", t)) != std::string::npos) {
    t += 7;
    try {
      Parser p(b, t);
      auto obj = p.next();
      if (obj && obj->dict())
        for (const auto& [key, value] : *obj->dict()) trailer_[key] = value;
    } catch (const Error&) {
    }
  }
}

Object File::load_at(std::size_t offset) const {
  const std::string& b = *bytes_;
  Parser p(b, offset);
  auto obj = p.next();
  if (!obj) return Object{};
  p.skip_whitespace();
  if (obj->is<Dict>() && b.compare(p.position(), 6, "stream") == 0) {
    std::size_t start = p.position() + 6;
    if (start < b.size() && b[start] == '\r') ++start;
    if (start < b.size() && b[start] == '\n') ++start;
    Stream s{*obj->get_if<Dict>(), {}};
    std::int64_t length = -1;
    if (const Object* len = lookup(s.dict, "Length")) length = resolve(*len).int_or(-1);
    bool trusted = false;
    if (length >= 0 && start + static_cast<std::size_t>(length) <= b.size()) {
      Parser check(b, start + static_cast<std::size_t>(length));
      check.skip_whitespace();
      trusted = b.compare(check.position(), 9, "endstream") == 0;
    }
    if (trusted) {
      s.data = b.substr(start, static_cast<std::size_t>(length));
    } else {
      std::size_t end = b.find("endstream", start);
      if (end == std::string::npos) end = b.size();
      std::size_t stop = end;
      if (stop > start && b[stop - 1] == '\n') --stop;
      if (stop > start && b[stop - 1] == '\r') --stop;
      s.data = b.substr(start, stop - start);
    }
    return s;
  }
  return *obj;
}

const Object& File::object(int num) const {
  if (auto it = cache_.find(num); it != cache_.end()) return *it->second;
  auto obj = std::make_shared<Object>();
  // Insert first so reference cycles terminate at null.
  cache_[num] = obj;
  try {
    if (auto it = offsets_.find(num); it != offsets_.end()) {
      *obj = load_at(it->second);
    } else if (auto pk = packed_.find(num); pk != packed_.end()) {
      const auto& data = packed_data_.at(pk->second.first);
      Parser p(*data, pk->second.second);
      if (auto o = p.next()) *obj = std::move(*o);
    }
  } catch (const Error&) {
    *obj = Object{};
  }
  return *obj;
}

const Object& File::resolve(const Object& obj) const {
  const Object* cur = &obj;
  for (int depth = 0; depth < 32; ++depth) {
    const Ref* r = cur->ref();
    if (!r) return *cur;
    cur = &object(r->num);
  }
  return kNull;
}

void File::load_object_streams() {
  for (int num : object_streams_) {
    const Object& o = object(num);
    const Stream* s = o.stream();
    if (!s) continue;
    std::shared_ptr<std::string> data;
    try {
      data = std::make_shared<std::string>(decode_stream(*s));
    } catch (const Error&) {
      continue;
    }
    const std::int64_t n = lookup(s->dict, "N") ? resolve(*lookup(s->dict, "N")).int_or(0) : 0;
    const std::int64_t first = lookup(s->dict, "First") ? resolve(*lookup(s->dict, "First")).int_or(0) : 0;
    Parser header(*data);
    for (std::int64_t i = 0; i < n; ++i) {
      auto obj_num = header.next();
      auto obj_off = header.next();
      if (!obj_num || !obj_off) break;
      const int onum = static_cast<int>(obj_num->int_or(-1));
      const auto off = static_cast<std::size_t>(first + obj_off->int_or(0));
      if (onum < 0 || offsets_.count(onum) || off >= data->size()) continue;
      packed_[onum] = {num, off};
    }
    packed_data_[num] = data;
  }
}

void File::collect_pages(const Object& node_ref, const Dict& inherited_resources, const Array* inherited_box,
                         int inherited_rotate, int depth) {
  if (depth > 64) return;
  const Object& node = resolve(node_ref);
  const Dict* d = node.dict();
  if (!d) return;

  Dict resources = inherited_resources;
  if (const Object* r = lookup(*d, "Resources"))
    if (const Dict* rd = resolve(*r).dict()) resources = *rd;
  const Array* box = inherited_box;
  if (const Object* mb = lookup(*d, "MediaBox"))
    if (const Array* a = resolve(*mb).array(); a && a->size() == 4) box = a;
  int rotate = inherited_rotate;
  if (const Object* r = lookup(*d, "Rotate")) rotate = static_cast<int>(resolve(*r).int_or(0));

  const Object* kids = lookup(*d, "Kids");
  const Object* type = lookup(*d, "Type");
  const bool is_tree = kids && (!type || !type->name() || *type->name() != "Page");
  if (is_tree) {
    if (const Array* ka = resolve(*kids).array())
      for (const auto& kid : *ka) collect_pages(kid, resources, box, rotate, depth + 1);
    return;
  }

  Page page;
  page.dict = *d;
  page.resources = std::move(resources);
  page.rotate = ((rotate % 360) + 360) % 360;
  const Array* crop = nullptr;
  if (const Object* cb = lookup(*d, "CropBox"))
    if (const Array* a = resolve(*cb).array(); a && a->size() == 4) crop = a;
  const Array* use = crop ? crop : box;
  if (use) {
    double v[4];
    for (int i = 0; i < 4; ++i) v[i] = resolve((*use)[i]).number_or(0);
    page.x0 = std::min(v[0], v[2]);
    page.x1 = std::max(v[0], v[2]);
    page.y0 = std::min(v[1], v[3]);
    page.y1 = std::max(v[1], v[3]);
  }
  if (page.width() <= 0 || page.height() <= 0) {
    page.x0 = page.y0 = 0;
    page.x1 = 612;
    page.y1 = 792;
  }
  pages_.push_back(std::move(page));
}

std::string File::decode_stream(const Stream& stream) const {
  std::vector<std::string> filters;
  std::vector<const Dict*> parms;
  if (const Object* f = lookup(stream.dict, "Filter")) {
    const Object& fr = resolve(*f);
    if (const std::string* n = fr.name()) {
      filters.push_back(*n);
    } else if (const Array* a = fr.array()) {
      for (const auto& item : *a)
        if (const std::string* n = resolve(item).name()) filters.push_back(*n);
    }
  }
  if (const Object* p = lookup(stream.dict, "DecodeParms")) {
    const Object& pr = resolve(*p);
    if (const Dict* pd = pr.dict()) {
      parms.push_back(pd);
    } else if (const Array* a = pr.array()) {
      for (const auto& item : *a) parms.push_back(resolve(item).dict());
    }
  }

  std::string data = stream.data;
  for (std::size_t i = 0; i < filters.size(); ++i) {
    const std::string& name = filters[i];
    if (name == "FlateDecode" || name == "Fl") {
      data = flate_decode(data);
      const Dict* dp = i < parms.size() ? parms[i] : nullptr;
      if (dp) {
        const auto get = [&](const char* key, std::int64_t dflt) {
          const Object* o = lookup(*dp, key);
          return o ? resolve(*o).int_or(dflt) : dflt;
        };
        const auto predictor = get("Predictor", 1);
        if (predictor >= 10)
          data = png_unpredict(data, static_cast<int>(get("Columns", 1)), static_cast<int>(get("Colors", 1)),
                               static_cast<int>(get("BitsPerComponent", 8)));
      }
    } else if (name == "ASCIIHexDecode" || name == "AHx") {
      data = ascii_hex_decode(data);
    } else if (name == "ASCII85Decode" || name == "A85") {
      data = ascii85_decode(data);
    } else {
      throw Error("unsupported-filter", "unsupported stream filter " + name);
    }
  }
  return data;
}

std::string File::page_contents(const Page& page) const {
  const Object* contents = lookup(page.dict, "Contents");
  if (!contents) return {};
  std::string out;
  const Object& c = resolve(*contents);
  const auto append = [&](const Object& o) {
    if (const Stream* s = resolve(o).stream()) {
      out += decode_stream(*s);
      out.push_back('\n');
    }
  };
  if (const Array* a = c.array()) {
    for (const auto& item : *a) append(item);
  } else {
    append(c);
  }
  return out;
}

}  // namespace layerlab::pdf
