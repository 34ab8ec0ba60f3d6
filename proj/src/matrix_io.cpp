#include "anygraph/matrix_io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace anygraph {

namespace {

std::uint64_t decode_u64le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

void encode_u64le(std::uint64_t v, unsigned char* p) {
    for (int i = 0; i < 8; ++i) {
        p[i] = static_cast<unsigned char>(v & 0xff);
        v >>= 8;
    }
}

float decode_f32le(const unsigned char* p) {
    std::uint32_t bits = 0;
    for (int i = 3; i >= 0; --i) bits = (bits << 8) | p[i];
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

void encode_f32le(float f, unsigned char* p) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    for (int i = 0; i < 4; ++i) {
        p[i] = static_cast<unsigned char>(bits & 0xff);
        bits >>= 8;
    }
}

// Parses an unsigned decimal field, rejecting stray characters.
template <typename T>
T parse_uint_field(const std::string& field, const std::string& path,
                   std::size_t line_no, const char* what) {
    T value{};
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || field.empty())
        throw ParseError(path + ":" + std::to_string(line_no) + ": bad " +
                         what + " '" + field + "'");
    return value;
}

}  // namespace

DenseMatrix read_matrix_f32(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open matrix file: " + path);
    unsigned char header[16];
    if (!in.read(reinterpret_cast<char*>(header), 16))
        throw ParseError(path + ": truncated header (need 16 bytes)");
    const std::uint64_t rows = decode_u64le(header);
    const std::uint64_t cols = decode_u64le(header + 8);
    if (rows == 0 || cols == 0)
        throw ParseError(path + ": zero dimension in header");
    if (rows > (1u << 28) || cols > (1u << 28) ||
        rows * cols > (1ull << 33))
        throw ParseError(path + ": implausible dimensions in header");
    DenseMatrix m(rows, cols);
    std::vector<unsigned char> buf(cols * 4);
    for (std::uint64_t i = 0; i < rows; ++i) {
        if (!in.read(reinterpret_cast<char*>(buf.data()),
                     static_cast<std::streamsize>(buf.size())))
            throw ParseError(path + ": truncated payload at row " +
                             std::to_string(i));
        for (std::uint64_t j = 0; j < cols; ++j)
            m(i, j) = static_cast<double>(decode_f32le(buf.data() + j * 4));
    }
    return m;
}

void write_matrix_f32(const std::string& path, const DenseMatrix& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open matrix file for writing: " + path);
    unsigned char header[16];
    encode_u64le(m.rows, header);
    encode_u64le(m.cols, header + 8);
    out.write(reinterpret_cast<const char*>(header), 16);
    std::vector<unsigned char> buf(m.cols * 4);
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j)
            encode_f32le(static_cast<float>(m(i, j)), buf.data() + j * 4);
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size()));
    }
    if (!out) throw IoError("write failed: " + path);
}

std::vector<std::pair<NodeId, NodeId>> read_edges_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open edges file: " + path);
    std::vector<std::pair<NodeId, NodeId>> edges;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError(path + ":" + std::to_string(line_no) +
                             ": expected 'src,dst'");
        const NodeId s = parse_uint_field<NodeId>(line.substr(0, comma), path,
                                                  line_no, "src node id");
        const NodeId d = parse_uint_field<NodeId>(line.substr(comma + 1), path,
                                                  line_no, "dst node id");
        edges.emplace_back(s, d);
    }
    return edges;
}

void write_edges_csv(const std::string& path,
                     const std::vector<std::pair<NodeId, NodeId>>& edges) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open edges file for writing: " + path);
    for (const auto& [s, d] : edges) out << s << ',' << d << '\n';
    if (!out) throw IoError("write failed: " + path);
}

std::vector<LabelRow> read_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open labels file: " + path);
    std::vector<LabelRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? std::string::npos
                                                : line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw ParseError(path + ":" + std::to_string(line_no) +
                             ": expected 'node_id,class_id,split'");
        LabelRow row;
        row.node = parse_uint_field<NodeId>(line.substr(0, c1), path, line_no,
                                            "node id");
        row.cls = parse_uint_field<std::int32_t>(
            line.substr(c1 + 1, c2 - c1 - 1), path, line_no, "class id");
        const std::string split = line.substr(c2 + 1);
        if (split == "train") {
            row.train = true;
        } else if (split == "test") {
            row.train = false;
        } else {
            throw ParseError(path + ":" + std::to_string(line_no) +
                             ": split must be 'train' or 'test', got '" +
                             split + "'");
        }
        rows.push_back(row);
    }
    return rows;
}

void write_labels_csv(const std::string& path,
                      const std::vector<LabelRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open labels file for writing: " + path);
    for (const auto& r : rows)
        out << r.node << ',' << r.cls << ',' << (r.train ? "train" : "test")
            << '\n';
    if (!out) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace anygraph
