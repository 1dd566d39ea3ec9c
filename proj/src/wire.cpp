#include "lmoa/wire.hpp"

#include <openssl/evp.h>

#include <json.hpp>

#include "lmoa/error.hpp"

namespace lmoa::wire {

using nlohmann::json;

std::string base64_encode(std::span<const std::uint8_t> bytes)
{
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text)
{
    if (text.size() % 4 != 0) throw ParseError("base64 length is not a multiple of 4");
    std::vector<std::uint8_t> out(3 * (text.size() / 4));
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
    if (n < 0) throw ParseError("malformed base64");
    // EVP_DecodeBlock keeps the zero bytes that stand in for '=' padding.
    std::size_t pad = 0;
    if (!text.empty() && text.back() == '=') ++pad;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

std::string hello_line(const ImageShape& shape)
{
    return json{{"type", "hello"}, {"shape", {shape.height, shape.width, shape.channels}}}.dump() + "\n";
}

std::string ready_line(std::size_t classes)
{
    return json{{"type", "ready"}, {"classes", classes}}.dump() + "\n";
}

std::string query_line(std::int64_t id, const ImageTensor& image)
{
    return json{{"type", "query"}, {"id", id}, {"pixels", base64_encode(image.pixels())}}.dump() + "\n";
}

std::string probs_line(std::int64_t id, const std::vector<double>& probs)
{
    return json{{"type", "probs"}, {"id", id}, {"probs", probs}}.dump() + "\n";
}

std::string error_line(std::int64_t id, const std::string& message)
{
    return json{{"type", "error"}, {"id", id}, {"message", message}}.dump() + "\n";
}

} // namespace lmoa::wire
