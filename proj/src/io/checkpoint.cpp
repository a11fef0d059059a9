#include "io/checkpoint.hpp"

#include <cstring>
#include <sstream>

#include "core/errors.hpp"
#include "io/csv.hpp"

namespace sca {
namespace {

constexpr char kMagic[4] = {'S', 'P', 'C', 'A'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    put_u64(out, bits);
}

struct Cursor {
    const std::string& bytes;
    size_t pos = 0;

    void need(size_t n) const {
        if (bytes.size() - pos < n) throw IoError("checkpoint: truncated file");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() {
        std::uint64_t bits = u64();
        double x;
        std::memcpy(&x, &bits, 8);
        return x;
    }
    std::string str(size_t n) {
        need(n);
        std::string s = bytes.substr(pos, n);
        pos += n;
        return s;
    }
};

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return &t;
    return nullptr;
}

void Checkpoint::put(const std::string& name, Tensor t) {
    for (auto& [n, existing] : tensors) {
        if (n == name) {
            existing = std::move(t);
            return;
        }
    }
    tensors.emplace_back(name, std::move(t));
}

std::string encode_checkpoint(const Checkpoint& st) {
    std::string out;
    out.append(kMagic, 4);
    put_u32(out, st.version);
    put_u64(out, st.config_text.size());
    out += st.config_text;
    put_u64(out, st.epoch);
    put_u64(out, st.rng_state);
    put_u32(out, std::uint32_t(st.tensors.size()));
    for (const auto& [name, t] : st.tensors) {
        put_u32(out, std::uint32_t(name.size()));
        out += name;
        put_u32(out, 2);
        put_u64(out, std::uint64_t(t.rows()));
        put_u64(out, std::uint64_t(t.cols()));
        for (size_t i = 0; i < t.size(); ++i) put_f64(out, t.at(i));
    }
    return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
    Cursor c{bytes};
    if (c.str(4) != std::string(kMagic, 4)) throw IoError("checkpoint: bad magic, not a checkpoint file");
    Checkpoint st;
    st.version = c.u32();
    if (st.version != kVersion)
        throw IoError("checkpoint: unsupported version " + std::to_string(st.version));
    std::uint64_t cfg_len = c.u64();
    if (cfg_len > bytes.size()) throw IoError("checkpoint: truncated file");
    st.config_text = c.str(size_t(cfg_len));
    st.epoch = c.u64();
    st.rng_state = c.u64();
    std::uint32_t count = c.u32();
    st.tensors.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint32_t name_len = c.u32();
        if (name_len > bytes.size()) throw IoError("checkpoint: truncated file");
        std::string name = c.str(name_len);
        std::uint32_t rank = c.u32();
        if (rank != 2) throw IoError("checkpoint: unsupported tensor rank " + std::to_string(rank));
        std::uint64_t rows = c.u64();
        std::uint64_t cols = c.u64();
        if (rows == 0 || cols == 0 || rows > (1u << 30) || cols > (1u << 30) ||
            rows * cols > (std::uint64_t(1) << 32))
            throw IoError("checkpoint: implausible tensor shape for '" + name + "'");
        Tensor t(static_cast<int>(rows), static_cast<int>(cols));
        for (size_t k = 0; k < t.size(); ++k) t.at(k) = c.f64();
        st.tensors.emplace_back(std::move(name), std::move(t));
    }
    if (c.pos != bytes.size()) throw IoError("checkpoint: trailing bytes after payload");
    return st;
}

void save_checkpoint(const std::string& path, const Checkpoint& st) {
    write_text_atomic(path, encode_checkpoint(st));
}

Checkpoint load_checkpoint(const std::string& path) {
    return decode_checkpoint(read_file(path));
}

std::string describe_checkpoint(const Checkpoint& st) {
    std::ostringstream out;
    out << "version: " << st.version << "\n";
    out << "epoch: " << st.epoch << "\n";
    out << "rng_state: " << st.rng_state << "\n";
    size_t entries = 0;
    for (const auto& [name, t] : st.tensors) entries += t.size();
    out << "tensors: " << st.tensors.size() << " (" << entries << " values)\n";
    for (const auto& [name, t] : st.tensors) out << "  " << name << " " << t.shape_str() << "\n";
    out << "config:\n";
    std::istringstream cfg(st.config_text);
    std::string line;
    while (std::getline(cfg, line)) out << "  " << line << "\n";
    return out.str();
}

}  // namespace sca
