#pragma once

#include <string>

#include "anygraph/trainer.hpp"

namespace anygraph {

/// Binary container: magic "AGCKPT01", a JSON header (config, counters,
/// router state, shapes), an f64 payload (parameters and Adam moments,
/// little-endian), and a trailing FNV-1a checksum of everything before it.
/// save(load(f)) reproduces f byte for byte.
void save_checkpoint(const std::string& path, const CheckpointData& data);

CheckpointData load_checkpoint(const std::string& path);

}  // namespace anygraph
