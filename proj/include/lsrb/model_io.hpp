#pragma once

#include <string>

#include "lsrb/rb.hpp"

namespace lsrb {

// Single-file JSON model, format tag "lsrb-model-1". Numbers are written with
// shortest round-trip precision, so save/load is lossless.
void save_model(const RbModel& m, const std::string& path);
RbModel load_model(const std::string& path);

// Reads only the online payload; the basis subtrees are discarded during
// parsing, so the footprint is independent of the truth-space dimension.
OnlineData load_online(const std::string& path);

}  // namespace lsrb
