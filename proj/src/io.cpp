#include "rtsvd/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include <zlib.h>

namespace fs = std::filesystem;

namespace rtsvd {

namespace {

constexpr char kMagic[4] = {'T', 'T', '3', 'F'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 2 + 3 * 8;

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b)
        out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b)
        out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int b = 3; b >= 0; --b)
        v = (v << 8) | p[b];
    return v;
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b)
        v = (v << 8) | p[b];
    return v;
}

std::uint32_t payload_crc(const unsigned char* data, std::size_t len) {
    return static_cast<std::uint32_t>(crc32_z(crc32(0L, Z_NULL, 0), data, len));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        throw IoError("read failure on '" + path + "'");
    return bytes;
}

} // namespace

void save_tensor(const std::string& path, const Tensor3& t) {
    std::string bytes;
    const std::size_t payload =
        static_cast<std::size_t>(t.size()) * sizeof(double);
    bytes.reserve(kHeaderBytes + payload + 4);
    bytes.append(kMagic, 4);
    put_u16(bytes, kVersion);
    put_u64(bytes, static_cast<std::uint64_t>(t.n1()));
    put_u64(bytes, static_cast<std::uint64_t>(t.n2()));
    put_u64(bytes, static_cast<std::uint64_t>(t.n3()));
    for (Index idx = 0; idx < t.size(); ++idx) {
        std::uint64_t u;
        double d = t.data()[idx];
        std::memcpy(&u, &d, sizeof(u));
        put_u64(bytes, u);
    }
    put_u32(bytes, payload_crc(reinterpret_cast<const unsigned char*>(bytes.data()) + kHeaderBytes,
                               payload));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot create '" + path + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("write failure on '" + path + "'");
}

Tensor3 load_tensor(const std::string& path) {
    const std::string bytes = read_file(path);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < kHeaderBytes + 4)
        throw IoError("'" + path + "' is shorter than a tensor file header");
    if (std::memcmp(p, kMagic, 4) != 0)
        throw IoError("'" + path + "' is not a tensor file (bad magic)");
    if (get_u16(p + 4) != kVersion)
        throw IoError("'" + path + "' has unsupported format version");

    const std::uint64_t n1 = get_u64(p + 6), n2 = get_u64(p + 14), n3 = get_u64(p + 22);
    const std::uint64_t limit = std::uint64_t(1) << 31;
    if (n1 >= limit || n2 >= limit || n3 >= limit || (n1 && n2 && n3 > limit / n1 / n2))
        throw IoError("'" + path + "' declares oversized dimensions");
    const std::uint64_t count = n1 * n2 * n3;
    if (bytes.size() != kHeaderBytes + count * 8 + 4)
        throw IoError("'" + path + "' payload length does not match its dimensions");
    if (payload_crc(p + kHeaderBytes, count * 8) != get_u32(p + kHeaderBytes + count * 8))
        throw IoError("'" + path + "' failed its checksum");

    std::vector<double> data(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint64_t u = get_u64(p + kHeaderBytes + i * 8);
        std::memcpy(&data[i], &u, sizeof(double));
    }
    return Tensor3(static_cast<Index>(n1), static_cast<Index>(n2), static_cast<Index>(n3),
                   std::move(data));
}

namespace {

// Whitespace-delimited header token, with '#' comments running to end of line.
std::string next_token(const std::string& bytes, std::size_t& pos) {
    while (pos < bytes.size()) {
        char c = bytes[pos];
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n')
                ++pos;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
        } else {
            break;
        }
    }
    std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])))
        ++pos;
    return bytes.substr(start, pos - start);
}

long parse_header_int(const std::string& tok, const std::string& path) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        throw UnreadableImage("'" + path + "': malformed header field '" + tok + "'");
    return std::stol(tok);
}

} // namespace

Matrix read_pgm(const std::string& path) {
    std::string bytes;
    try {
        bytes = read_file(path);
    } catch (const IoError& e) {
        throw UnreadableImage(e.what());
    }

    std::size_t pos = 0;
    if (next_token(bytes, pos) != "P5")
        throw UnreadableImage("'" + path + "' is not a binary PGM");
    const long width = parse_header_int(next_token(bytes, pos), path);
    const long height = parse_header_int(next_token(bytes, pos), path);
    const long maxval = parse_header_int(next_token(bytes, pos), path);
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
        throw UnreadableImage("'" + path + "' has out-of-range header values");
    ++pos; // single whitespace byte separates the header from the raster

    const int bytes_per = maxval > 255 ? 2 : 1;
    const std::size_t need = static_cast<std::size_t>(width) * height * bytes_per;
    if (bytes.size() < pos + need)
        throw UnreadableImage("'" + path + "' raster is truncated");

    const auto* raster = reinterpret_cast<const unsigned char*>(bytes.data()) + pos;
    Matrix img(height, width);
    const double scale = 1.0 / static_cast<double>(maxval);
    for (long r = 0; r < height; ++r)
        for (long c = 0; c < width; ++c) {
            std::size_t at = (static_cast<std::size_t>(r) * width + c) * bytes_per;
            unsigned v = bytes_per == 2 ? (raster[at] << 8 | raster[at + 1]) : raster[at];
            img(r, c) = v * scale;
        }
    return img;
}

void write_pgm(const std::string& path, const Matrix& img, int maxval) {
    if (maxval <= 0 || maxval > 65535)
        throw InvalidArgument("pgm maxval must lie in [1, 65535]");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot create '" + path + "'");
    out << "P5\n" << img.cols() << ' ' << img.rows() << '\n' << maxval << '\n';
    for (Index r = 0; r < img.rows(); ++r)
        for (Index c = 0; c < img.cols(); ++c) {
            double v = std::clamp(img(r, c), 0.0, 1.0);
            unsigned q = static_cast<unsigned>(std::lround(v * maxval));
            if (maxval > 255)
                out.put(static_cast<char>(q >> 8));
            out.put(static_cast<char>(q & 0xFF));
        }
    if (!out)
        throw IoError("write failure on '" + path + "'");
}

FaceDataset load_image_dir(const std::string& path) {
    if (!fs::is_directory(path))
        throw IoError("'" + path + "' is not a directory");

    std::vector<fs::path> class_dirs;
    for (const auto& entry : fs::directory_iterator(path))
        if (entry.is_directory())
            class_dirs.push_back(entry.path());
    std::sort(class_dirs.begin(), class_dirs.end());

    FaceDataset data;
    std::vector<Matrix> images;
    Index rows = 0, cols = 0;
    for (const auto& dir : class_dirs) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().extension() == ".pgm")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        if (files.empty())
            continue;

        const int label = static_cast<int>(data.label_names.size());
        data.label_names.push_back(dir.filename().string());
        for (const auto& file : files) {
            Matrix img = read_pgm(file.string());
            if (images.empty()) {
                rows = img.rows();
                cols = img.cols();
            } else if (img.rows() != rows || img.cols() != cols) {
                throw MixedImageSizes("'" + file.string() + "' does not match the first image");
            }
            images.push_back(std::move(img));
            data.labels.push_back(label);
        }
    }
    if (images.empty())
        throw TooFewSamples("no .pgm images under '" + path + "'");

    const Index count = static_cast<Index>(images.size());
    std::vector<double> buf(static_cast<std::size_t>(rows * count * cols));
    for (Index c = 0; c < cols; ++c)
        for (Index j = 0; j < count; ++j)
            for (Index i = 0; i < rows; ++i)
                buf[static_cast<std::size_t>(i + rows * (j + count * c))] =
                    images[static_cast<std::size_t>(j)](i, c);
    data.images = Tensor3(rows, count, cols, std::move(buf));
    return data;
}

} // namespace rtsvd
