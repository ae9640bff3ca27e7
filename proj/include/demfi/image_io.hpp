#pragma once

#include <string>

#include "demfi/degrade.hpp"

namespace demfi {

Tensor read_png(const std::string& path);
void write_png(const Tensor& frame, const std::string& path);

// Directory of zero-padded numbered 8-bit RGB PNGs; values scaled to [0,1].
// Missing files, ragged shapes and numbering gaps are rejected.
FrameSequence read_sequence(const std::string& dir, double fps = 30.0);
void write_sequence(const FrameSequence& seq, const std::string& dir);

}  // namespace demfi
