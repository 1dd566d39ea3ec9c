#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lmoa/core_types.hpp"

// JSON-lines oracle protocol. One compact JSON object per LF-terminated line.
//
//   parent -> child  {"type":"hello","shape":[H,W,C]}
//   child  -> parent {"type":"ready","classes":m}
//   parent -> child  {"type":"query","id":n,"pixels":"<base64 row-major bytes>"}
//   child  -> parent {"type":"probs","id":n,"probs":[...]}
//   child  -> parent {"type":"error","id":n,"message":"..."}   (on a bad request)
//
// Query ids are strictly increasing and replies come back in request order.
namespace lmoa::wire {

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string hello_line(const ImageShape& shape);
std::string ready_line(std::size_t classes);
std::string query_line(std::int64_t id, const ImageTensor& image);
std::string probs_line(std::int64_t id, const std::vector<double>& probs);
std::string error_line(std::int64_t id, const std::string& message);

} // namespace lmoa::wire
