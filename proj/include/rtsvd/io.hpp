// Tensor file serialization, PGM image reading, and dataset ingestion.
//
// Tensor file layout (all integers little-endian):
//   bytes 0..3    magic "TT3F"
//   bytes 4..5    format version, u16, currently 1
//   bytes 6..29   n1, n2, n3 as u64
//   payload       8 * n1 * n2 * n3 bytes, IEEE-754 doubles in storage order
//                 (entry (i, j, k) at position i + n1 * (j + n2 * k))
//   trailer       CRC-32 of the payload, u32

#pragma once

#include <string>

#include "rtsvd/recognition.hpp"

namespace rtsvd {

void save_tensor(const std::string& path, const Tensor3& t);

// Throws IoError on short files, bad magic, unknown version, dimension
// overflow, payload length mismatch, or checksum failure.
Tensor3 load_tensor(const std::string& path);

// Binary PGM (P5) with maxval up to 65535; two-byte samples are
// big-endian.  Returns rows x cols with values scaled into [0, 1].
Matrix read_pgm(const std::string& path);

// Values are clamped to [0, 1] and quantized to maxval levels; a maxval
// above 255 selects the two-byte encoding.
void write_pgm(const std::string& path, const Matrix& img, int maxval = 255);

// Reads every .pgm file under the immediate subdirectories of `path`;
// subdirectory names become labels.  Directory and file order is sorted
// by name, so the slice order is stable across platforms.  An r x c image
// becomes the lateral slice (r x 1 x c) of the result.
FaceDataset load_image_dir(const std::string& path);

} // namespace rtsvd
