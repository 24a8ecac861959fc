#pragma once

namespace canon_gnn {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace canon_gnn
