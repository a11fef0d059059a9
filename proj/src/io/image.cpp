#include "io/image.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "core/errors.hpp"

namespace sca {
namespace {

// Pulls the next header token, skipping whitespace and '#' comments.
std::string next_token(const std::string& bytes, size_t& pos) {
    while (pos < bytes.size()) {
        unsigned char c = bytes[pos];
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(c)) {
            ++pos;
        } else {
            break;
        }
    }
    size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])) && bytes[pos] != '#') ++pos;
    if (start == pos) throw IoError("ppm: truncated header");
    return bytes.substr(start, pos - start);
}

int token_int(const std::string& bytes, size_t& pos, const char* what) {
    std::string tok = next_token(bytes, pos);
    size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(tok, &used);
    } catch (const std::exception&) {
        throw IoError(std::string("ppm: bad ") + what + " '" + tok + "'");
    }
    if (used != tok.size() || v < 0) throw IoError(std::string("ppm: bad ") + what + " '" + tok + "'");
    return v;
}

int header_int(const std::string& bytes, size_t& pos, const char* what) {
    int v = token_int(bytes, pos, what);
    if (v == 0) throw IoError(std::string("ppm: bad ") + what + " '0'");
    return v;
}

}  // namespace

ImageGrid parse_ppm(const std::string& bytes) {
    size_t pos = 0;
    std::string magic = next_token(bytes, pos);
    if (magic != "P3" && magic != "P6") throw IoError("ppm: expected P3 or P6, got '" + magic + "'");
    ImageGrid img;
    img.width = header_int(bytes, pos, "width");
    img.height = header_int(bytes, pos, "height");
    int maxval = header_int(bytes, pos, "maxval");
    if (maxval != 255) throw IoError("ppm: only 8-bit images supported (maxval 255), got " + std::to_string(maxval));
    img.channels = 3;
    size_t count = size_t(img.width) * img.height * 3;
    img.data.resize(count);
    if (magic == "P6") {
        if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
            throw IoError("ppm: missing separator after maxval");
        ++pos;
        if (bytes.size() - pos < count) throw IoError("ppm: truncated pixel data");
        for (size_t i = 0; i < count; ++i)
            img.data[i] = static_cast<unsigned char>(bytes[pos + i]) / 255.0;
    } else {
        for (size_t i = 0; i < count; ++i) {
            int v = token_int(bytes, pos, "pixel value");
            if (v > 255) throw IoError("ppm: pixel value out of range");
            img.data[i] = v / 255.0;
        }
    }
    return img;
}

ImageGrid load_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("ppm: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_ppm(ss.str());
}

ImageGrid downsample(const ImageGrid& img, int factor) {
    if (factor < 1) throw ContractError("downsample: factor must be >= 1");
    ImageGrid out;
    out.channels = img.channels;
    out.height = (img.height + factor - 1) / factor;
    out.width = (img.width + factor - 1) / factor;
    out.data.resize(size_t(out.height) * out.width * out.channels);
    for (int i = 0; i < out.height; ++i)
        for (int j = 0; j < out.width; ++j)
            for (int c = 0; c < out.channels; ++c)
                out.at(i, j, c) = img.at(i * factor, j * factor, c);
    return out;
}

double pixel_center_x(int j, int width) { return (j + 0.5) / width * 2.0 - 1.0; }
double pixel_center_y(int i, int height) { return (i + 0.5) / height * 2.0 - 1.0; }

}  // namespace sca
