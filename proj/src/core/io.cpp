#include "sslab/core/io.hpp"

#include <filesystem>
#include <fstream>

#include "sslab/core/error.hpp"

namespace sslab {

void write_atomic(const std::string& path, const std::function<void(std::ostream&)>& body, bool binary) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::io_failure, "cannot open '" + tmp + "' for writing");
    body(out);
    out.flush();
    require(static_cast<bool>(out), ErrorCode::io_failure, "write to '" + tmp + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, ErrorCode::io_failure, "rename to '" + path + "' failed: " + ec.message());
}

}  // namespace sslab
