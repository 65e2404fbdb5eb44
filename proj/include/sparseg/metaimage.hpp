#pragma once

#include <string>

#include "sparseg/volume.hpp"

namespace sparseg {

// MetaImage (.mhd header + companion .raw file) support, 3D only.
// Recognized keys: ObjectType, NDims, DimSize, ElementSpacing, Offset,
// ElementType (MET_SHORT | MET_UCHAR | MET_FLOAT), ElementByteOrderMSB,
// ElementDataFile. Raw data is read/written little-endian unless
// ElementByteOrderMSB=True. Compressed and embedded (LOCAL/LIST) data
// are rejected.
Volume3D load_metaimage(const std::string& header_path);
Mask3D load_mask_metaimage(const std::string& header_path);  // nonzero -> 1

// Writes <path> and a .raw next to it. The element type defaults to the
// volume's source_type; Short data is clamped to int16 range.
void save_metaimage(const Volume3D& vol, const std::string& header_path);
void save_metaimage(const Volume3D& vol, const std::string& header_path,
                    MetaElementType type);
void save_metaimage(const Mask3D& mask, const std::string& header_path);

}  // namespace sparseg
