#include "sparseg/metaimage.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "sparseg/errors.hpp"

namespace sparseg {
namespace {

namespace fs = std::filesystem;

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

bool iequals(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw FormatError(std::string("bad number in ") + what);
    return v;
  } catch (const FormatError&) {
    throw;
  } catch (...) {
    throw FormatError(std::string("bad number in ") + what + ": " + s);
  }
}

int parse_int(const std::string& s, const char* what) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw FormatError(std::string("bad integer in ") + what + ": " + s);
  return v;
}

std::size_t element_size(MetaElementType t) {
  switch (t) {
    case MetaElementType::Short: return 2;
    case MetaElementType::Uchar: return 1;
    case MetaElementType::Float: return 4;
  }
  return 0;
}

const char* element_name(MetaElementType t) {
  switch (t) {
    case MetaElementType::Short: return "MET_SHORT";
    case MetaElementType::Uchar: return "MET_UCHAR";
    case MetaElementType::Float: return "MET_FLOAT";
  }
  return "";
}

// Shortest round-trip decimal, with a ".0" kept on integral values so the
// header stays unambiguous about being floating point.
std::string format_real(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, p);
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

struct Header {
  int nx = 0, ny = 0, nz = 0;
  double sx = 1, sy = 1, sz = 1;
  double ox = 0, oy = 0, oz = 0;
  MetaElementType type = MetaElementType::Float;
  bool msb = false;
  std::string data_file;
};

Header read_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open MetaImage header: " + path);

  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    if (trim(line.substr(0, eq)) == "ElementDataFile") break;  // header ends here
  }

  Header h;
  if (auto it = kv.find("ObjectType"); it != kv.end() && it->second != "Image")
    throw FormatError("unsupported ObjectType: " + it->second);
  if (auto it = kv.find("NDims"); it == kv.end())
    throw FormatError("header missing NDims: " + path);
  else if (parse_int(it->second, "NDims") != 3)
    throw FormatError("only 3-dimensional MetaImage supported: " + path);
  if (auto it = kv.find("CompressedData");
      it != kv.end() && iequals(it->second, "true"))
    throw FormatError("compressed MetaImage not supported: " + path);
  if (auto it = kv.find("ElementNumberOfChannels");
      it != kv.end() && parse_int(it->second, "ElementNumberOfChannels") != 1)
    throw FormatError("multi-channel MetaImage not supported: " + path);

  auto dims = kv.find("DimSize");
  if (dims == kv.end()) throw FormatError("header missing DimSize: " + path);
  auto dv = split_ws(dims->second);
  if (dv.size() != 3) throw FormatError("DimSize must have 3 entries");
  h.nx = parse_int(dv[0], "DimSize");
  h.ny = parse_int(dv[1], "DimSize");
  h.nz = parse_int(dv[2], "DimSize");
  if (h.nx <= 0 || h.ny <= 0 || h.nz <= 0)
    throw FormatError("DimSize entries must be positive");

  if (auto it = kv.find("ElementSpacing"); it != kv.end()) {
    auto sv = split_ws(it->second);
    if (sv.size() != 3) throw FormatError("ElementSpacing must have 3 entries");
    h.sx = parse_double(sv[0], "ElementSpacing");
    h.sy = parse_double(sv[1], "ElementSpacing");
    h.sz = parse_double(sv[2], "ElementSpacing");
    if (h.sx <= 0 || h.sy <= 0 || h.sz <= 0)
      throw FormatError("ElementSpacing entries must be positive");
  }
  if (auto it = kv.find("Offset"); it != kv.end()) {
    auto ov = split_ws(it->second);
    if (ov.size() != 3) throw FormatError("Offset must have 3 entries");
    h.ox = parse_double(ov[0], "Offset");
    h.oy = parse_double(ov[1], "Offset");
    h.oz = parse_double(ov[2], "Offset");
  }

  auto et = kv.find("ElementType");
  if (et == kv.end()) throw FormatError("header missing ElementType: " + path);
  if (et->second == "MET_SHORT") h.type = MetaElementType::Short;
  else if (et->second == "MET_UCHAR") h.type = MetaElementType::Uchar;
  else if (et->second == "MET_FLOAT") h.type = MetaElementType::Float;
  else throw FormatError("unsupported ElementType: " + et->second);

  if (auto it = kv.find("ElementByteOrderMSB"); it != kv.end())
    h.msb = iequals(it->second, "true");
  else if (auto it2 = kv.find("BinaryDataByteOrderMSB"); it2 != kv.end())
    h.msb = iequals(it2->second, "true");

  auto df = kv.find("ElementDataFile");
  if (df == kv.end()) throw FormatError("header missing ElementDataFile");
  if (df->second == "LOCAL" || df->second == "LIST")
    throw FormatError("only companion raw files supported, got ElementDataFile=" +
                      df->second);
  h.data_file = df->second;
  return h;
}

std::vector<char> read_raw(const fs::path& raw_path, std::size_t expected) {
  std::ifstream in(raw_path, std::ios::binary);
  if (!in) throw IoError("cannot open raw file: " + raw_path.string());
  in.seekg(0, std::ios::end);
  const std::size_t actual = static_cast<std::size_t>(in.tellg());
  if (actual != expected)
    throw IoError("raw file size mismatch for " + raw_path.string() + ": got " +
                  std::to_string(actual) + ", expected " + std::to_string(expected));
  in.seekg(0, std::ios::beg);
  std::vector<char> buf(expected);
  in.read(buf.data(), static_cast<std::streamsize>(expected));
  if (!in) throw IoError("short read from raw file: " + raw_path.string());
  return buf;
}

void byte_swap(std::vector<char>& buf, std::size_t width) {
  if (width <= 1) return;
  for (std::size_t i = 0; i + width <= buf.size(); i += width)
    std::reverse(buf.begin() + i, buf.begin() + i + width);
}

Volume3D decode(const Header& h, std::vector<char> raw) {
  Volume3D v(h.nx, h.ny, h.nz, {h.sx, h.sy, h.sz});
  v.ox = h.ox; v.oy = h.oy; v.oz = h.oz;
  v.source_type = h.type;
  if (h.msb) byte_swap(raw, element_size(h.type));
  const std::size_t n = v.size();
  switch (h.type) {
    case MetaElementType::Short: {
      const auto* p = reinterpret_cast<const std::int16_t*>(raw.data());
      for (std::size_t i = 0; i < n; ++i) v.data[i] = static_cast<float>(p[i]);
      break;
    }
    case MetaElementType::Uchar: {
      const auto* p = reinterpret_cast<const std::uint8_t*>(raw.data());
      for (std::size_t i = 0; i < n; ++i) v.data[i] = static_cast<float>(p[i]);
      break;
    }
    case MetaElementType::Float: {
      std::memcpy(v.data.data(), raw.data(), n * sizeof(float));
      break;
    }
  }
  return v;
}

}  // namespace

Volume3D load_metaimage(const std::string& header_path) {
  Header h = read_header(header_path);
  fs::path raw = fs::path(header_path).parent_path() / h.data_file;
  std::size_t expected =
      static_cast<std::size_t>(h.nx) * h.ny * h.nz * element_size(h.type);
  return decode(h, read_raw(raw, expected));
}

Mask3D load_mask_metaimage(const std::string& header_path) {
  Volume3D v = load_metaimage(header_path);
  Mask3D m = Mask3D::like(v);
  for (std::size_t i = 0; i < v.data.size(); ++i) m.data[i] = v.data[i] != 0.0f;
  return m;
}

void save_metaimage(const Volume3D& vol, const std::string& header_path,
                    MetaElementType type) {
  vol.validate();
  if (header_path.empty()) throw IoError("save_metaimage: empty path");
  fs::path hp(header_path);
  fs::path raw = hp;
  raw.replace_extension(".raw");

  std::ofstream hout(hp);
  if (!hout) throw IoError("cannot write header: " + header_path);
  hout << "ObjectType = Image\n"
       << "NDims = 3\n"
       << "BinaryData = True\n"
       << "ElementByteOrderMSB = False\n"
       << "DimSize = " << vol.nx << " " << vol.ny << " " << vol.nz << "\n"
       << "ElementSpacing = " << format_real(vol.sx) << " " << format_real(vol.sy)
       << " " << format_real(vol.sz) << "\n"
       << "Offset = " << format_real(vol.ox) << " " << format_real(vol.oy) << " "
       << format_real(vol.oz) << "\n"
       << "ElementType = " << element_name(type) << "\n"
       << "ElementDataFile = " << raw.filename().string() << "\n";
  if (!hout) throw IoError("write failure on header: " + header_path);
  hout.close();

  const std::size_t n = vol.size();
  std::vector<char> buf(n * element_size(type));
  switch (type) {
    case MetaElementType::Short: {
      auto* p = reinterpret_cast<std::int16_t*>(buf.data());
      for (std::size_t i = 0; i < n; ++i) {
        double v = std::clamp(static_cast<double>(vol.data[i]), -32768.0, 32767.0);
        p[i] = static_cast<std::int16_t>(std::lrint(v));
      }
      break;
    }
    case MetaElementType::Uchar: {
      auto* p = reinterpret_cast<std::uint8_t*>(buf.data());
      for (std::size_t i = 0; i < n; ++i) {
        double v = std::clamp(static_cast<double>(vol.data[i]), 0.0, 255.0);
        p[i] = static_cast<std::uint8_t>(std::lrint(v));
      }
      break;
    }
    case MetaElementType::Float: {
      std::memcpy(buf.data(), vol.data.data(), n * sizeof(float));
      break;
    }
  }
  static_assert(std::endian::native == std::endian::little,
                "raw writer assumes a little-endian host");
  std::ofstream rout(raw, std::ios::binary);
  if (!rout) throw IoError("cannot write raw file: " + raw.string());
  rout.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!rout) throw IoError("write failure on raw file: " + raw.string());
}

void save_metaimage(const Volume3D& vol, const std::string& header_path) {
  save_metaimage(vol, header_path, vol.source_type);
}

void save_metaimage(const Mask3D& mask, const std::string& header_path) {
  Volume3D v(mask.nx, mask.ny, mask.nz, {mask.sx, mask.sy, mask.sz});
  v.ox = mask.ox; v.oy = mask.oy; v.oz = mask.oz;
  for (std::size_t i = 0; i < mask.data.size(); ++i)
    v.data[i] = mask.data[i] ? 1.0f : 0.0f;
  save_metaimage(v, header_path, MetaElementType::Uchar);
}

}  // namespace sparseg
