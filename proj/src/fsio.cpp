#include "pinsynth/fsio.hpp"

#include <fstream>
#include <sstream>

#include "pinsynth/error.hpp"

namespace pinsynth {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error("I/O failure reading " + path.string());
  return std::move(buf).str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  const auto parent = path.parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot create " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("I/O failure writing " + path.string());
}

}  // namespace pinsynth
