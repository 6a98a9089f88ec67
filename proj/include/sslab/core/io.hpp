#pragma once

#include <functional>
#include <ostream>
#include <string>

namespace sslab {

/// Writes through `path.tmp` and renames, so readers never see a partial file.
void write_atomic(const std::string& path, const std::function<void(std::ostream&)>& body, bool binary = false);

}  // namespace sslab
