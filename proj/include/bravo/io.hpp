#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bravo/types.hpp"

namespace bravo {

// 8-bit single-channel PNG, the storage form for class maps, quantized
// confidence maps, and validity masks. Readers reject other depths and
// channel layouts rather than converting.
ByteRaster read_png_gray(const std::filesystem::path& path);
void write_png_gray(const ByteRaster& raster, const std::filesystem::path& path);

ClassMap read_class_map(const std::filesystem::path& path,
                        const ClassCatalog& catalog);
void write_class_map(const ClassMap& map, const std::filesystem::path& path);

/// Accepts either a quantized PNG (value / 255) or a float tensor file,
/// distinguished by magic bytes.
ConfidenceMap read_confidence_map(const std::filesystem::path& path);
void write_confidence_map(const ConfidenceMap& map,
                          const std::filesystem::path& path);
void write_confidence_tensor(const ConfidenceMap& map,
                             const std::filesystem::path& path);

ValidityMask read_validity_mask(const std::filesystem::path& path);
void write_validity_mask(const ValidityMask& mask,
                         const std::filesystem::path& path);

// Binary float tensor container: magic "BTEN", version byte 1, dtype byte
// (1 = float32), rank byte, little-endian u32 extents, row-major
// little-endian payload. Round-trips are bit-exact.
LogitsTensor read_tensor(const std::filesystem::path& path, TensorKind kind);
void write_tensor(const LogitsTensor& tensor,
                  const std::filesystem::path& path);

enum class DecoderKind { Linear, Mask2Former };
std::string to_string(DecoderKind kind);
DecoderKind decoder_from_string(const std::string& name);

/// One image in a manifest. Ground truth is always present; the prediction
/// side is either fused maps (classes + confidence) or exported logits with
/// a decoder kind, never both.
struct ManifestItem {
  std::string id;
  std::filesystem::path gt;
  std::optional<std::filesystem::path> validity;

  std::optional<std::filesystem::path> classes;
  std::optional<std::filesystem::path> confidence;

  std::optional<DecoderKind> decoder;
  std::optional<std::filesystem::path> seg_logits;
  std::optional<std::filesystem::path> mask_logits;
  std::optional<std::filesystem::path> class_logits;

  bool fused() const { return classes.has_value(); }
};

struct ManifestSubset {
  std::string name;
  std::vector<ManifestItem> items;
};

struct Manifest {
  int class_count = 19;
  std::filesystem::path root;
  std::vector<ManifestSubset> subsets;

  std::size_t item_count() const;
};

inline constexpr const char* kManifestSchemaId = "bravoeval-manifest-v1";

/// Parses and validates a manifest; schema errors carry a json-pointer style
/// location. Relative paths are resolved against the manifest's directory.
Manifest load_manifest(const std::filesystem::path& path);

/// Writes a manifest with paths relative to the destination directory.
void write_manifest(const Manifest& manifest,
                    const std::filesystem::path& path);

}  // namespace bravo
