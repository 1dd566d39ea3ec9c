#include "lmoa/image_io.hpp"

#include <png.h>

#include <cctype>
#include <fstream>
#include <string>

#include "lmoa/error.hpp"

namespace lmoa {

ImageTensor read_png(const std::filesystem::path& path)
{
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.c_str()))
        throw ParseError(path.string() + ": " + img.message);

    const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
    img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const ImageShape shape{img.height, img.width, color ? 3u : 1u};
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, pixels.data(), 0, nullptr)) {
        const std::string msg = img.message;
        png_image_free(&img);
        throw ParseError(path.string() + ": " + msg);
    }
    return ImageTensor(shape, std::move(pixels));
}

void write_png(const std::filesystem::path& path, const ImageTensor& image)
{
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(image.width());
    img.height = static_cast<png_uint_32>(image.height());
    img.format = image.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&img, path.c_str(), 0, image.pixels().data(), 0, nullptr))
        throw Error("cannot write " + path.string() + ": " + img.message);
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::istream& in, const std::string& name)
{
    std::string tok;
    char c;
    while (in.get(c)) {
        if (c == '#') {
            std::string skip;
            std::getline(in, skip);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(c);
    }
    if (tok.empty()) throw ParseError(name + ": truncated PGM header");
    return tok;
}

std::size_t pgm_number(std::istream& in, const std::string& name)
{
    const auto tok = pgm_token(in, name);
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
        v = std::stoul(tok, &pos);
    } catch (const std::exception&) {
        throw ParseError(name + ": bad PGM header field '" + tok + "'");
    }
    if (pos != tok.size()) throw ParseError(name + ": bad PGM header field '" + tok + "'");
    return v;
}

} // namespace

ImageTensor read_pgm(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    const auto name = path.string();
    if (pgm_token(in, name) != "P5") throw ParseError(name + ": not a binary PGM (P5)");
    const auto width = pgm_number(in, name);
    const auto height = pgm_number(in, name);
    const auto maxval = pgm_number(in, name);
    if (width == 0 || height == 0) throw ParseError(name + ": empty PGM");
    if (maxval != 255) throw ParseError(name + ": PGM maxval must be 255, got " + std::to_string(maxval));

    std::vector<std::uint8_t> pixels(width * height);
    in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != pixels.size()) throw ParseError(name + ": truncated PGM raster");
    return ImageTensor({height, width, 1}, std::move(pixels));
}

void write_pgm(const std::filesystem::path& path, const ImageTensor& image)
{
    if (image.channels() != 1) throw StructuralError("PGM output needs a single-channel image");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels().data()), static_cast<std::streamsize>(image.size()));
}

} // namespace lmoa
