#include "bravo/io.hpp"

#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <utility>

#include <json.hpp>
#include <png.h>

#include "bravo/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "tensor io assumes a little-endian host");

namespace bravo {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void create_parent_dirs(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec)
    fail(ErrorKind::IoFailure,
         "cannot create directory " + parent.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// PNG. libpng reports errors through longjmp, so the jump frames below keep
// only trivially destructible locals; resources live in the caller's holder.

struct PngErrBuf {
  char msg[240] = "libpng failure";
};

void on_png_error(png_structp png, png_const_charp text) {
  auto* buf = static_cast<PngErrBuf*>(png_get_error_ptr(png));
  if (buf != nullptr) std::snprintf(buf->msg, sizeof buf->msg, "%s", text);
  std::longjmp(png_jmpbuf(png), 1);
}

void on_png_warning(png_structp, png_const_charp) {}

struct PngReader {
  FILE* file = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;
  PngErrBuf err;

  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (file) std::fclose(file);
  }
};

bool read_png_header(PngReader& r, png_uint_32* width, png_uint_32* height,
                     int* depth, int* color, int* channels) {
  if (setjmp(png_jmpbuf(r.png))) return false;
  png_init_io(r.png, r.file);
  png_set_sig_bytes(r.png, 8);
  png_read_info(r.png, r.info);
  *width = png_get_image_width(r.png, r.info);
  *height = png_get_image_height(r.png, r.info);
  *depth = png_get_bit_depth(r.png, r.info);
  *color = png_get_color_type(r.png, r.info);
  *channels = png_get_channels(r.png, r.info);
  return true;
}

bool read_png_rows(PngReader& r, png_bytep* rows) {
  if (setjmp(png_jmpbuf(r.png))) return false;
  png_read_image(r.png, rows);
  png_read_end(r.png, nullptr);
  return true;
}

struct PngWriter {
  FILE* file = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;
  PngErrBuf err;

  ~PngWriter() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (file) std::fclose(file);
  }
};

bool write_png_all(PngWriter& w, png_uint_32 width, png_uint_32 height,
                   png_bytep* rows) {
  if (setjmp(png_jmpbuf(w.png))) return false;
  png_init_io(w.png, w.file);
  png_set_IHDR(w.png, w.info, width, height, 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  png_write_image(w.png, rows);
  png_write_end(w.png, w.info);
  return true;
}

// ---------------------------------------------------------------------------
// Tensor container.

constexpr char kTensorMagic[4] = {'B', 'T', 'E', 'N'};
constexpr std::uint8_t kTensorVersion = 1;
constexpr std::uint8_t kDtypeFloat32 = 1;
constexpr std::size_t kMaxTensorElements = std::size_t{1} << 28;

struct RawTensor {
  int rank = 0;
  std::uint32_t extents[3] = {0, 0, 0};
  std::vector<float> data;
};

std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 |
         static_cast<std::uint32_t>(p[3]) << 24;
}

RawTensor read_tensor_raw(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoFailure, "cannot open " + path.string());
  std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>()};
  if (bytes.size() < 4 ||
      std::memcmp(bytes.data(), kTensorMagic, sizeof kTensorMagic) != 0)
    fail(ErrorKind::BadMagic, path.string() + ": not a tensor file (bad magic)");
  if (bytes.size() < 7)
    fail(ErrorKind::TruncatedPayload, path.string() + ": header truncated");
  if (bytes[4] != kTensorVersion)
    fail(ErrorKind::UnsupportedVersion,
         path.string() + ": version " + std::to_string(bytes[4]) +
             ", reader supports version 1");
  if (bytes[5] != kDtypeFloat32)
    fail(ErrorKind::UnsupportedVersion,
         path.string() + ": dtype " + std::to_string(bytes[5]) +
             ", reader supports float32 (1)");
  RawTensor raw;
  raw.rank = bytes[6];
  if (raw.rank != 2 && raw.rank != 3)
    fail(ErrorKind::UnsupportedVersion,
         path.string() + ": rank " + std::to_string(raw.rank) +
             ", reader supports 2 and 3");
  const std::size_t header = 7 + 4 * static_cast<std::size_t>(raw.rank);
  if (bytes.size() < header)
    fail(ErrorKind::TruncatedPayload, path.string() + ": extent list truncated");
  std::size_t elements = 1;
  for (int i = 0; i < raw.rank; ++i) {
    raw.extents[i] = read_u32le(bytes.data() + 7 + 4 * i);
    if (raw.extents[i] == 0)
      fail(ErrorKind::ShapeMismatch,
           path.string() + ": extent " + std::to_string(i) + " is zero");
    elements *= raw.extents[i];
    if (elements > kMaxTensorElements)
      fail(ErrorKind::IoFailure, path.string() + ": tensor too large");
  }
  const std::size_t expected = 4 * elements;
  const std::size_t actual = bytes.size() - header;
  if (actual != expected)
    fail(ErrorKind::TruncatedPayload,
         path.string() + ": payload holds " + std::to_string(actual) +
             " bytes, extents require " + std::to_string(expected));
  raw.data.resize(elements);
  std::memcpy(raw.data.data(), bytes.data() + header, expected);
  for (std::size_t i = 0; i < raw.data.size(); ++i)
    if (!std::isfinite(raw.data[i]))
      fail(ErrorKind::NonFiniteData,
           path.string() + ": non-finite value at element " + std::to_string(i));
  return raw;
}

void write_tensor_raw(int rank, const std::uint32_t* extents,
                      const std::vector<float>& data, const fs::path& path) {
  create_parent_dirs(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoFailure, "cannot open " + path.string());
  out.write(kTensorMagic, sizeof kTensorMagic);
  out.put(static_cast<char>(kTensorVersion));
  out.put(static_cast<char>(kDtypeFloat32));
  out.put(static_cast<char>(rank));
  for (int i = 0; i < rank; ++i) {
    const std::uint32_t e = extents[i];
    const char le[4] = {static_cast<char>(e & 0xff),
                        static_cast<char>((e >> 8) & 0xff),
                        static_cast<char>((e >> 16) & 0xff),
                        static_cast<char>((e >> 24) & 0xff)};
    out.write(le, 4);
  }
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(4 * data.size()));
  out.flush();
  if (!out) fail(ErrorKind::IoFailure, "failed writing " + path.string());
}

const char* tensor_kind_name(TensorKind kind) {
  switch (kind) {
    case TensorKind::SegLogits: return "seg logits";
    case TensorKind::MaskLogits: return "mask logits";
    case TensorKind::ClassLogits: return "class logits";
    case TensorKind::Features: return "features";
  }
  return "tensor";
}

bool file_starts_with_tensor_magic(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoFailure, "cannot open " + path.string());
  char head[4] = {0, 0, 0, 0};
  in.read(head, sizeof head);
  return in.gcount() == 4 && std::memcmp(head, kTensorMagic, 4) == 0;
}

[[noreturn]] void rethrow_with_path(const Error& e, const fs::path& path) {
  fail(e.kind(), path.string() + ": " + e.what());
}

}  // namespace

// ---------------------------------------------------------------------------

ByteRaster read_png_gray(const fs::path& path) {
  PngReader r;
  r.file = std::fopen(path.string().c_str(), "rb");
  if (!r.file) fail(ErrorKind::IoFailure, "cannot open " + path.string());
  unsigned char sig[8];
  if (std::fread(sig, 1, sizeof sig, r.file) != sizeof sig ||
      png_sig_cmp(sig, 0, sizeof sig) != 0)
    fail(ErrorKind::BadMagic, path.string() + ": not a png file");
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &r.err, on_png_error,
                                 on_png_warning);
  r.info = r.png ? png_create_info_struct(r.png) : nullptr;
  if (!r.info) fail(ErrorKind::IoFailure, "libpng initialization failed");

  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int depth = 0;
  int color = 0;
  int channels = 0;
  if (!read_png_header(r, &width, &height, &depth, &color, &channels))
    fail(ErrorKind::IoFailure, path.string() + ": " + r.err.msg);
  if (depth != 8)
    fail(ErrorKind::BadBitDepth, path.string() + ": bit depth " +
                                     std::to_string(depth) + ", expected 8");
  if (color != PNG_COLOR_TYPE_GRAY) {
    if (channels != 1)
      fail(ErrorKind::BadChannelCount,
           path.string() + ": " + std::to_string(channels) +
               " channels, expected single-channel grayscale");
    fail(ErrorKind::BadChannelCount,
         path.string() + ": indexed color, expected grayscale");
  }
  if (width == 0 || height == 0 || width > (1u << 20) || height > (1u << 20) ||
      static_cast<std::uint64_t>(width) * height > (std::uint64_t{1} << 31))
    fail(ErrorKind::DimensionMismatch, path.string() + ": unreasonable size");

  ByteRaster out;
  out.height = static_cast<int>(height);
  out.width = static_cast<int>(width);
  out.values.resize(static_cast<std::size_t>(width) * height);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y)
    rows[y] = out.values.data() + static_cast<std::size_t>(y) * width;
  if (!read_png_rows(r, rows.data()))
    fail(ErrorKind::IoFailure, path.string() + ": " + r.err.msg);
  return out;
}

void write_png_gray(const ByteRaster& raster, const fs::path& path) {
  if (raster.height <= 0 || raster.width <= 0 ||
      raster.values.size() !=
          static_cast<std::size_t>(raster.height) * raster.width)
    fail(ErrorKind::DimensionMismatch,
         "raster extents do not match the value count");
  create_parent_dirs(path);
  PngWriter w;
  w.file = std::fopen(path.string().c_str(), "wb");
  if (!w.file) fail(ErrorKind::IoFailure, "cannot open " + path.string());
  w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &w.err, on_png_error,
                                  on_png_warning);
  w.info = w.png ? png_create_info_struct(w.png) : nullptr;
  if (!w.info) fail(ErrorKind::IoFailure, "libpng initialization failed");

  std::vector<png_bytep> rows(raster.height);
  for (int y = 0; y < raster.height; ++y)
    rows[y] = const_cast<png_bytep>(raster.values.data()) +
              static_cast<std::size_t>(y) * raster.width;
  if (!write_png_all(w, static_cast<png_uint_32>(raster.width),
                     static_cast<png_uint_32>(raster.height), rows.data()))
    fail(ErrorKind::IoFailure, path.string() + ": " + w.err.msg);
  if (std::fflush(w.file) != 0)
    fail(ErrorKind::IoFailure, "failed writing " + path.string());
}

ClassMap read_class_map(const fs::path& path, const ClassCatalog& catalog) {
  ByteRaster raster = read_png_gray(path);
  try {
    return ClassMap(raster.height, raster.width, std::move(raster.values),
                    catalog);
  } catch (const Error& e) {
    rethrow_with_path(e, path);
  }
}

void write_class_map(const ClassMap& map, const fs::path& path) {
  write_png_gray(ByteRaster{map.height(), map.width(), map.labels()}, path);
}

ConfidenceMap read_confidence_map(const fs::path& path) {
  if (file_starts_with_tensor_magic(path)) {
    RawTensor raw = read_tensor_raw(path);
    if (raw.rank != 2)
      fail(ErrorKind::ShapeMismatch,
           path.string() + ": confidence tensor must be rank 2, file is rank " +
               std::to_string(raw.rank));
    std::vector<double> scores(raw.data.begin(), raw.data.end());
    try {
      return ConfidenceMap(static_cast<int>(raw.extents[0]),
                           static_cast<int>(raw.extents[1]),
                           std::move(scores));
    } catch (const Error& e) {
      rethrow_with_path(e, path);
    }
  }
  ByteRaster raster = read_png_gray(path);
  std::vector<double> scores(raster.values.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    scores[i] = raster.values[i] / 255.0;
  return ConfidenceMap(raster.height, raster.width, std::move(scores));
}

void write_confidence_map(const ConfidenceMap& map, const fs::path& path) {
  ByteRaster raster;
  raster.height = map.height();
  raster.width = map.width();
  raster.values.resize(map.pixels());
  for (std::size_t i = 0; i < raster.values.size(); ++i)
    raster.values[i] = static_cast<std::uint8_t>(quantize255(map.scores()[i]));
  write_png_gray(raster, path);
}

void write_confidence_tensor(const ConfidenceMap& map, const fs::path& path) {
  std::vector<float> data(map.scores().begin(), map.scores().end());
  const std::uint32_t extents[2] = {static_cast<std::uint32_t>(map.height()),
                                    static_cast<std::uint32_t>(map.width())};
  write_tensor_raw(2, extents, data, path);
}

ValidityMask read_validity_mask(const fs::path& path) {
  ByteRaster raster = read_png_gray(path);
  return ValidityMask(raster.height, raster.width, std::move(raster.values));
}

void write_validity_mask(const ValidityMask& mask, const fs::path& path) {
  ByteRaster raster;
  raster.height = mask.height();
  raster.width = mask.width();
  raster.values.resize(mask.flags().size());
  for (std::size_t i = 0; i < raster.values.size(); ++i)
    raster.values[i] = mask.flags()[i] ? 255 : 0;
  write_png_gray(raster, path);
}

LogitsTensor read_tensor(const fs::path& path, TensorKind kind) {
  RawTensor raw = read_tensor_raw(path);
  const int expected_rank = kind == TensorKind::ClassLogits ? 2 : 3;
  if (raw.rank != expected_rank)
    fail(ErrorKind::ShapeMismatch,
         path.string() + ": " + tensor_kind_name(kind) + " must be rank " +
             std::to_string(expected_rank) + ", file is rank " +
             std::to_string(raw.rank));
  try {
    if (raw.rank == 2)
      return LogitsTensor(kind, static_cast<int>(raw.extents[0]),
                          static_cast<int>(raw.extents[1]), 1,
                          std::move(raw.data), 2);
    return LogitsTensor(kind, static_cast<int>(raw.extents[0]),
                        static_cast<int>(raw.extents[1]),
                        static_cast<int>(raw.extents[2]), std::move(raw.data),
                        3);
  } catch (const Error& e) {
    rethrow_with_path(e, path);
  }
}

void write_tensor(const LogitsTensor& tensor, const fs::path& path) {
  const std::uint32_t extents[3] = {static_cast<std::uint32_t>(tensor.channels()),
                                    static_cast<std::uint32_t>(tensor.height()),
                                    static_cast<std::uint32_t>(tensor.width())};
  write_tensor_raw(tensor.rank(), extents, tensor.data(), path);
}

// ---------------------------------------------------------------------------

std::string to_string(DecoderKind kind) {
  return kind == DecoderKind::Linear ? "linear" : "mask2former";
}

DecoderKind decoder_from_string(const std::string& name) {
  if (name == "linear") return DecoderKind::Linear;
  if (name == "mask2former") return DecoderKind::Mask2Former;
  fail(ErrorKind::InvalidArgument, "unknown decoder kind: " + name);
}

std::size_t Manifest::item_count() const {
  std::size_t n = 0;
  for (const auto& s : subsets) n += s.items.size();
  return n;
}

namespace {

[[noreturn]] void schema_error(const fs::path& file, const std::string& pointer,
                               const std::string& detail) {
  fail(ErrorKind::SchemaViolation,
       file.string() + ":" + pointer + ": " + detail);
}

void check_keys(const ordered_json& obj, std::initializer_list<const char*> allowed,
                const fs::path& file, const std::string& pointer) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) schema_error(file, pointer, "unknown key '" + key + "'");
  }
}

std::string require_string(const ordered_json& obj, const char* key,
                           const fs::path& file, const std::string& pointer) {
  if (!obj.contains(key))
    schema_error(file, pointer, std::string("missing key '") + key + "'");
  if (!obj[key].is_string())
    schema_error(file, pointer + "/" + key, "expected a string");
  return obj[key].get<std::string>();
}

std::optional<std::string> optional_string(const ordered_json& obj,
                                           const char* key, const fs::path& file,
                                           const std::string& pointer) {
  if (!obj.contains(key)) return std::nullopt;
  if (!obj[key].is_string())
    schema_error(file, pointer + "/" + key, "expected a string");
  return obj[key].get<std::string>();
}

fs::path resolve(const std::string& raw, const fs::path& root) {
  fs::path p(raw);
  if (p.is_relative()) p = root / p;
  return p.lexically_normal();
}

ManifestItem parse_item(const ordered_json& node, const fs::path& file,
                        const std::string& pointer, const fs::path& root) {
  if (!node.is_object()) schema_error(file, pointer, "expected an object");
  check_keys(node,
             {"id", "gt", "validity", "classes", "confidence", "decoder",
              "seg_logits", "mask_logits", "class_logits"},
             file, pointer);
  ManifestItem item;
  item.id = require_string(node, "id", file, pointer);
  if (item.id.empty()) schema_error(file, pointer + "/id", "id is empty");
  item.gt = resolve(require_string(node, "gt", file, pointer), root);
  if (auto v = optional_string(node, "validity", file, pointer))
    item.validity = resolve(*v, root);

  const bool fused = node.contains("classes") || node.contains("confidence");
  const bool logits = node.contains("decoder") || node.contains("seg_logits") ||
                      node.contains("mask_logits") ||
                      node.contains("class_logits");
  if (fused && logits)
    schema_error(file, pointer, "item mixes fused maps and decoder logits");
  if (!fused && !logits)
    schema_error(file, pointer,
                 "item needs either fused maps (classes + confidence) or "
                 "decoder logits");
  if (fused) {
    item.classes = resolve(require_string(node, "classes", file, pointer), root);
    item.confidence =
        resolve(require_string(node, "confidence", file, pointer), root);
    return item;
  }
  const std::string decoder = require_string(node, "decoder", file, pointer);
  if (decoder == "linear") {
    item.decoder = DecoderKind::Linear;
    item.seg_logits =
        resolve(require_string(node, "seg_logits", file, pointer), root);
    if (node.contains("mask_logits") || node.contains("class_logits"))
      schema_error(file, pointer, "linear decoder does not take mask logits");
  } else if (decoder == "mask2former") {
    item.decoder = DecoderKind::Mask2Former;
    item.mask_logits =
        resolve(require_string(node, "mask_logits", file, pointer), root);
    item.class_logits =
        resolve(require_string(node, "class_logits", file, pointer), root);
    if (node.contains("seg_logits"))
      schema_error(file, pointer, "mask2former decoder does not take seg logits");
  } else {
    schema_error(file, pointer + "/decoder",
                 "unknown decoder kind '" + decoder + "'");
  }
  return item;
}

}  // namespace

Manifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoFailure, "cannot open " + path.string());
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::SchemaViolation,
         path.string() + ": not valid json: " + e.what());
  }
  if (!j.is_object()) schema_error(path, "", "expected a json object");
  check_keys(j, {"$schema", "class_count", "subsets"}, path, "");
  if (auto schema = optional_string(j, "$schema", path, ""))
    if (*schema != kManifestSchemaId)
      schema_error(path, "/$schema",
                   "unknown schema id '" + *schema + "', expected '" +
                       kManifestSchemaId + "'");

  Manifest manifest;
  manifest.root = fs::absolute(path).parent_path();
  if (!j.contains("class_count"))
    schema_error(path, "", "missing key 'class_count'");
  if (!j["class_count"].is_number_integer())
    schema_error(path, "/class_count", "expected an integer");
  manifest.class_count = j["class_count"].get<int>();
  if (manifest.class_count < 2 || manifest.class_count > 255)
    schema_error(path, "/class_count",
                 "class count " + std::to_string(manifest.class_count) +
                     " outside 2..255");

  if (!j.contains("subsets")) schema_error(path, "", "missing key 'subsets'");
  if (!j["subsets"].is_array())
    schema_error(path, "/subsets", "expected an array");
  for (std::size_t i = 0; i < j["subsets"].size(); ++i) {
    const auto& snode = j["subsets"][i];
    const std::string spointer = "/subsets/" + std::to_string(i);
    if (!snode.is_object()) schema_error(path, spointer, "expected an object");
    check_keys(snode, {"name", "items"}, path, spointer);
    ManifestSubset subset;
    subset.name = require_string(snode, "name", path, spointer);
    if (!is_known_subset(subset.name))
      schema_error(path, spointer + "/name",
                   "unknown subset '" + subset.name + "'");
    for (const auto& existing : manifest.subsets)
      if (existing.name == subset.name)
        fail(ErrorKind::DuplicateId, path.string() + ":" + spointer +
                                         ": subset '" + subset.name +
                                         "' appears twice");
    if (!snode.contains("items"))
      schema_error(path, spointer, "missing key 'items'");
    if (!snode["items"].is_array())
      schema_error(path, spointer + "/items", "expected an array");
    for (std::size_t k = 0; k < snode["items"].size(); ++k) {
      const std::string ipointer = spointer + "/items/" + std::to_string(k);
      ManifestItem item =
          parse_item(snode["items"][k], path, ipointer, manifest.root);
      for (const auto& existing : subset.items)
        if (existing.id == item.id)
          fail(ErrorKind::DuplicateId, path.string() + ":" + ipointer +
                                           ": duplicate item id '" + item.id +
                                           "'");
      subset.items.push_back(std::move(item));
    }
    manifest.subsets.push_back(std::move(subset));
  }
  return manifest;
}

void write_manifest(const Manifest& manifest, const fs::path& path) {
  create_parent_dirs(path);
  const fs::path dir = fs::absolute(path).parent_path().lexically_normal();
  auto rel = [&dir](const fs::path& p) {
    return p.lexically_proximate(dir).generic_string();
  };
  ordered_json j;
  j["$schema"] = kManifestSchemaId;
  j["class_count"] = manifest.class_count;
  j["subsets"] = ordered_json::array();
  for (const auto& subset : manifest.subsets) {
    ordered_json snode;
    snode["name"] = subset.name;
    snode["items"] = ordered_json::array();
    for (const auto& item : subset.items) {
      ordered_json inode;
      inode["id"] = item.id;
      inode["gt"] = rel(item.gt);
      if (item.validity) inode["validity"] = rel(*item.validity);
      if (item.classes) inode["classes"] = rel(*item.classes);
      if (item.confidence) inode["confidence"] = rel(*item.confidence);
      if (item.decoder) inode["decoder"] = to_string(*item.decoder);
      if (item.seg_logits) inode["seg_logits"] = rel(*item.seg_logits);
      if (item.mask_logits) inode["mask_logits"] = rel(*item.mask_logits);
      if (item.class_logits) inode["class_logits"] = rel(*item.class_logits);
      snode["items"].push_back(std::move(inode));
    }
    j["subsets"].push_back(std::move(snode));
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::IoFailure, "cannot open " + path.string());
  out << j.dump(2) << "\n";
  out.flush();
  if (!out) fail(ErrorKind::IoFailure, "failed writing " + path.string());
}

}  // namespace bravo
